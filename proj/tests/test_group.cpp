#include <random>

#include <gtest/gtest.h>

#include "hyplab/group.hpp"
#include "support.hpp"

using namespace hyplab;

namespace {

Word random_word(std::mt19937_64& rng, std::size_t nletters, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> letter(0, static_cast<int>(nletters) - 1);
  Word w;
  for (int i = len(rng); i > 0; --i) w.push_back(static_cast<Letter>(letter(rng)));
  return w;
}

}  // namespace

TEST(FreeGroup, Alphabet) {
  const auto g = make_free(2);
  ASSERT_EQ(g.alphabet().size(), 4u);
  EXPECT_EQ(g.alphabet().name(0), "a");
  EXPECT_EQ(g.alphabet().name(1), "a-");
  EXPECT_EQ(g.alphabet().inverse(2), 3);
  EXPECT_TRUE(g.is_free());
  EXPECT_EQ(g.free_rank(), 2);
}

TEST(FreeGroup, FreeReduction) {
  const auto g = make_free(2);
  EXPECT_TRUE(g.normalize("a a-").empty());
  EXPECT_EQ(g.format(g.normalize("a b b- a")), "a a");
  EXPECT_EQ(g.format(g.normalize("b- a a- b a")), "a");
  EXPECT_EQ(g.format(g.multiply(g.normalize("a b"), g.normalize("b- a-"))), "eps");
  EXPECT_EQ(g.format(g.invert(g.normalize("a b-"))), "b a-");
}

TEST(FreeGroup, RankBounds) {
  EXPECT_THROW(make_free(0), Error);
  EXPECT_NO_THROW(make_free(1));
}

TEST(CyclicProduct, Rules) {
  const auto g = compile_cyclicprod({2, 3});
  EXPECT_TRUE(g.is_cyclic_product());
  EXPECT_EQ(g.format(g.normalize("b b")), "b-");
  EXPECT_EQ(g.format(g.normalize("b b b")), "eps");
  EXPECT_TRUE(g.normalize("a a").empty());
  EXPECT_TRUE(g.multiply(g.normalize("a b"), g.normalize("b- a")).empty());
  EXPECT_EQ(g.format(g.invert(g.normalize("a b"))), "b- a");
}

TEST(CyclicProduct, EvenOrderUsesPositiveSyllable) {
  const auto g = compile_cyclicprod({4});
  EXPECT_EQ(g.format(g.normalize("a- a-")), "a a");
  EXPECT_EQ(g.format(g.normalize("a a a")), "a-");
  EXPECT_TRUE(g.normalize("a a a a").empty());
}

TEST(CyclicProduct, InvalidOrders) {
  try {
    compile_cyclicprod({1, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidOrder);
  }
  EXPECT_THROW(compile_cyclicprod({}), Error);
}

TEST(CyclicProduct, Elementarity) {
  EXPECT_EQ(compile_cyclicprod({2, 3}).elementarity(), Elementarity::NonElementary);
  EXPECT_NE(compile_cyclicprod({2, 2}).elementarity(), Elementarity::NonElementary);
  EXPECT_NE(compile_cyclicprod({5}).elementarity(), Elementarity::NonElementary);
  EXPECT_NE(make_free(1).elementarity(), Elementarity::NonElementary);
  EXPECT_EQ(make_free(2).elementarity(), Elementarity::NonElementary);
}

TEST(CyclicProduct, AgreesWithPsl2z) {
  const auto g = compile_cyclicprod({2, 3});
  const auto mg = oracle::psl2z();
  std::mt19937_64 rng(11);
  std::map<oracle::Mat, Word> seen;
  for (int trial = 0; trial < 2000; ++trial) {
    const Word raw = random_word(rng, g.alphabet().size(), 14);
    const Word nf = g.normalize(raw);
    const auto m = oracle::word_matrix(g, raw, mg);
    ASSERT_EQ(oracle::word_matrix(g, nf, mg), m) << g.format(raw);
    auto [it, fresh] = seen.emplace(m, nf);
    if (!fresh) {
      ASSERT_EQ(it->second, nf) << "two normal forms for one element";
    }
  }
}

TEST(FreeGroup, AgreesWithSanov) {
  const auto g = make_free(2);
  const auto mg = oracle::sanov();
  std::mt19937_64 rng(12);
  std::map<oracle::Mat, Word> seen;
  for (int trial = 0; trial < 2000; ++trial) {
    const Word raw = random_word(rng, 4, 16);
    const Word nf = g.normalize(raw);
    const auto m = oracle::word_matrix(g, raw, mg);
    ASSERT_EQ(oracle::word_matrix(g, nf, mg), m);
    auto [it, fresh] = seen.emplace(m, nf);
    if (!fresh) {
      ASSERT_EQ(it->second, nf);
    }
  }
}

TEST(GroupBackend, GroupAxiomsOnRandomWords) {
  for (const auto& g : {make_free(2), compile_cyclicprod({2, 3}), compile_cyclicprod({3, 4, 5})}) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
      const Word x = g.normalize(random_word(rng, g.alphabet().size(), 10));
      const Word y = g.normalize(random_word(rng, g.alphabet().size(), 10));
      const Word z = g.normalize(random_word(rng, g.alphabet().size(), 10));
      ASSERT_EQ(g.normalize(x), x);
      ASSERT_TRUE(g.multiply(x, g.invert(x)).empty());
      ASSERT_TRUE(g.multiply(g.invert(x), x).empty());
      ASSERT_EQ(g.multiply(g.multiply(x, y), z), g.multiply(x, g.multiply(y, z)));
      ASSERT_EQ(g.invert(g.invert(x)), x);
    }
  }
}

TEST(GromovProduct, HalfIntegers) {
  const auto g = compile_cyclicprod({2, 3});
  // |b| = |b-| = 1 and b^-1 b- = b, so (b, b-) = (1 + 1 - 1) / 2.
  const HalfInt p = gromov_product(g, g.normalize("b"), g.normalize("b-"));
  EXPECT_EQ(p.doubled, 1);
  EXPECT_EQ(p.str(), "0.5");
  EXPECT_EQ(p.ceil(), 1);
  const auto f = make_free(2);
  EXPECT_EQ(gromov_product(f, f.normalize("a b a"), f.normalize("a b b")).doubled, 4);
  EXPECT_EQ(gromov_product(f, f.normalize("a"), f.normalize("b")).doubled, 0);
}

TEST(Rws, ParseAndRoundTrip) {
  const std::string text =
      "# Z/2 * Z/3\n"
      "letters: a b b-\n"
      "inverses: a:a b:b-\n"
      "a a -> eps\n"
      "b b- -> eps\n"
      "b- b -> eps\n"
      "b b -> b-\n"
      "b- b- -> b\n";
  const auto g = load_rws(text);
  const auto c = compile_cyclicprod({2, 3});
  EXPECT_EQ(g.format(g.normalize("b b a b b")), "b- a b-");
  const auto again = load_rws(to_rws_text(g));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const Word w = random_word(rng, 3, 12);
    ASSERT_EQ(g.normalize(w), again.normalize(w));
    ASSERT_EQ(g.normalize(w), c.normalize(w));  // same letter order
  }
}

TEST(Rws, RejectsNonConfluent) {
  // b^3 = 1 without b^-1 b^-1 -> b: the overlap b b b- does not resolve.
  const std::string text =
      "letters: b b-\ninverses: b:b-\nb b- -> eps\nb- b -> eps\nb b -> b-\n";
  try {
    load_rws(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotLocallyConfluent);
  }
}

TEST(Rws, RejectsNonReducingRule) {
  const std::string text = "letters: a a-\ninverses: a:a-\na -> a a\n";
  try {
    load_rws(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonReducingRule);
  }
}

TEST(Rws, InputErrors) {
  auto kind_of = [](const std::string& text) {
    try {
      load_rws(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  EXPECT_EQ(kind_of("letters: a b\ninverses: a:a\n"), ErrorKind::AsymmetricAlphabet);
  EXPECT_EQ(kind_of("letters: a\ninverses: a:a\na c -> eps\n"), ErrorKind::UnknownLetter);
  EXPECT_EQ(kind_of("letters: a\ninverses: a:a\na a\n"), ErrorKind::ParseError);
  EXPECT_EQ(kind_of("inverses: a:a\n"), ErrorKind::ParseError);
  try {
    load_rws_file("/nonexistent/file.rws");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
  }
}

TEST(Alphabet, UnknownLetter) {
  const auto g = make_free(2);
  try {
    g.normalize("a z");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownLetter);
  }
}

TEST(Word, ShortlexOrder) {
  EXPECT_LT((Word{3}), (Word{0, 0}));
  EXPECT_LT((Word{0, 1}), (Word{0, 2}));
  EXPECT_EQ((Word{1, 2}), (Word{1, 2}));
}
