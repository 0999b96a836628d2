#pragma once

#include "hyplab/boundary.hpp"
#include "hyplab/cayley.hpp"
#include "hyplab/error.hpp"
#include "hyplab/experiments.hpp"
#include "hyplab/group.hpp"
#include "hyplab/opnorm.hpp"
#include "hyplab/radial.hpp"
#include "hyplab/word.hpp"
