#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hyplab/error.hpp"
#include "hyplab/word.hpp"

namespace hyplab {

struct Rule {
  Word lhs;
  Word rhs;
  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Exact value of the form k/2, stored as the doubled integer k.
struct HalfInt {
  std::int64_t doubled = 0;

  static constexpr HalfInt from_int(std::int64_t v) { return {2 * v}; }
  constexpr double value() const { return static_cast<double>(doubled) / 2.0; }
  /// Smallest integer >= this value.
  constexpr std::int64_t ceil() const {
    return doubled >= 0 ? (doubled + 1) / 2 : -((-doubled) / 2);
  }

  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) {
    return {a.doubled - b.doubled};
  }

  std::string str() const {
    std::string s = std::to_string(doubled / 2);
    if (doubled % 2 != 0) {
      if (doubled < 0 && doubled / 2 == 0) s = "-0";
      s += ".5";
    }
    return s;
  }
};

struct FreeKind {
  int rank;
};
struct CyclicProductKind {
  std::vector<int> orders;
};
struct RwsKind {};

using BackendKind = std::variant<FreeKind, CyclicProductKind, RwsKind>;

/// Whether the group satisfies the non-elementary hypothesis the estimates
/// are stated for. Elementary groups are still accepted, but flagged.
enum class Elementarity { NonElementary, Finite, TwoEnded, Unknown };

inline std::string_view to_string(Elementarity e) {
  switch (e) {
    case Elementarity::NonElementary: return "non-elementary";
    case Elementarity::Finite: return "finite";
    case Elementarity::TwoEnded: return "two-ended";
    case Elementarity::Unknown: return "unknown";
  }
  return "unknown";
}

namespace detail {

inline void check_rules_reduce(const std::vector<Rule>& rules,
                               const Alphabet& alphabet) {
  for (const auto& r : rules) {
    if (r.lhs.empty())
      throw Error(ErrorKind::NonReducingRule, "rule with empty left side");
    if (!(r.rhs < r.lhs))
      throw Error(ErrorKind::NonReducingRule,
                  alphabet.format(r.lhs) + " -> " + alphabet.format(r.rhs) +
                      " does not decrease shortlex order");
  }
}

}  // namespace detail

/// Normal-form engine for a group given by a finite, shortlex-reducing,
/// confluent string rewriting system over a symmetric alphabet. The free
/// group is the special case whose rules are the free cancellations; it
/// takes a fast path that agrees with the generic rewriting.
class GroupBackend {
 public:
  GroupBackend(BackendKind kind, Alphabet alphabet, std::vector<Rule> rules)
      : kind_(std::move(kind)),
        alphabet_(std::move(alphabet)),
        rules_(std::move(rules)) {
    detail::check_rules_reduce(rules_, alphabet_);
    by_last_.resize(alphabet_.size());
    for (std::size_t i = 0; i < rules_.size(); ++i)
      by_last_.at(rules_[i].lhs.back()).push_back(i);
  }

  const BackendKind& kind() const noexcept { return kind_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }

  bool is_free() const noexcept {
    return std::holds_alternative<FreeKind>(kind_);
  }
  bool is_cyclic_product() const noexcept {
    return std::holds_alternative<CyclicProductKind>(kind_);
  }
  /// Rank of a free backend, 0 otherwise.
  int free_rank() const noexcept {
    if (auto* f = std::get_if<FreeKind>(&kind_)) return f->rank;
    return 0;
  }

  Elementarity elementarity() const {
    if (auto* f = std::get_if<FreeKind>(&kind_))
      return f->rank == 1 ? Elementarity::TwoEnded
                          : Elementarity::NonElementary;
    if (auto* c = std::get_if<CyclicProductKind>(&kind_)) {
      if (c->orders.size() == 1) return Elementarity::Finite;
      if (c->orders.size() == 2 && c->orders[0] == 2 && c->orders[1] == 2)
        return Elementarity::TwoEnded;
      return Elementarity::NonElementary;
    }
    return Elementarity::Unknown;
  }

  /// Appends one letter to an irreducible word, keeping it irreducible.
  void append(Word& w, Letter x) const {
    if (is_free()) {
      if (!w.empty() && w.back() == alphabet_.inverse(x))
        w.pop_back();
      else
        w.push_back(x);
      return;
    }
    std::vector<Letter> pending{x};
    rewrite(w, pending);
  }

  /// Reduces a raw letter sequence to its irreducible (shortlex-least)
  /// representative.
  Word normalize(const Word& raw) const {
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (raw[i] >= alphabet_.size())
        throw Error(ErrorKind::UnknownLetter,
                    "letter index " + std::to_string(raw[i]) +
                        " outside alphabet");
    return normalize_with(raw, rules_, by_last_, is_free());
  }

  Word normalize(std::string_view text) const {
    return normalize(alphabet_.parse(text));
  }

  Word multiply(const Word& x, const Word& y) const {
    Word out = x;
    if (is_free()) {
      for (std::size_t i = 0; i < y.size(); ++i) append(out, y[i]);
      return out;
    }
    std::vector<Letter> pending;
    pending.reserve(y.size());
    for (std::size_t i = y.size(); i-- > 0;) pending.push_back(y[i]);
    rewrite(out, pending);
    return out;
  }

  /// Group inverse. The formal inverse of an irreducible word is irreducible
  /// only for free backends (b b in Z/4 inverts to b- b-, which rewrites).
  Word invert(const Word& x) const {
    Word r = alphabet_.invert(x);
    if (is_free()) return r;
    return normalize(r);
  }

  std::size_t length(const Word& x) const { return x.size(); }

  std::string format(const Word& w) const { return alphabet_.format(w); }

  /// Generic rewriting against an explicit rule set; used by the confluence
  /// checker before a backend exists and by tests as an independent path.
  static Word normalize_with(const Word& raw, const std::vector<Rule>& rules,
                             std::size_t alphabet_size) {
    std::vector<std::vector<std::size_t>> by_last(alphabet_size);
    for (std::size_t i = 0; i < rules.size(); ++i)
      by_last.at(rules[i].lhs.back()).push_back(i);
    return normalize_with(raw, rules, by_last, false);
  }

 private:
  static Word normalize_with(
      const Word& raw, const std::vector<Rule>& rules,
      const std::vector<std::vector<std::size_t>>& by_last, bool free_fast) {
    Word out;
    std::vector<Letter> pending;
    pending.reserve(raw.size());
    for (std::size_t i = raw.size(); i-- > 0;) pending.push_back(raw[i]);
    if (free_fast) {
      // Free reduction: every rule is x x^-1 -> eps.
      while (!pending.empty()) {
        Letter x = pending.back();
        pending.pop_back();
        bool cancelled = false;
        if (!out.empty())
          for (std::size_t ri : by_last[x])
            if (rules[ri].lhs[0] == out.back()) {
              out.pop_back();
              cancelled = true;
              break;
            }
        if (!cancelled) out.push_back(x);
      }
      return out;
    }
    rewrite_with(out, pending, rules, by_last);
    return out;
  }

  // `out` is irreducible on entry; pending is a stack (next letter at back).
  // Any redex created by pushing a letter is a suffix of `out`.
  static void rewrite_with(Word& out, std::vector<Letter>& pending,
                           const std::vector<Rule>& rules,
                           const std::vector<std::vector<std::size_t>>& by_last) {
    while (!pending.empty()) {
      Letter x = pending.back();
      pending.pop_back();
      out.push_back(x);
      for (std::size_t ri : by_last[x]) {
        const Rule& r = rules[ri];
        if (out.ends_with(r.lhs)) {
          out.truncate(out.size() - r.lhs.size());
          for (std::size_t i = r.rhs.size(); i-- > 0;)
            pending.push_back(r.rhs[i]);
          break;
        }
      }
    }
  }

  void rewrite(Word& out, std::vector<Letter>& pending) const {
    rewrite_with(out, pending, rules_, by_last_);
  }

  BackendKind kind_;
  Alphabet alphabet_;
  std::vector<Rule> rules_;
  std::vector<std::vector<std::size_t>> by_last_;
};

/// Gromov product based at the identity, (x,y) = (|x| + |y| - |x^-1 y|)/2.
inline HalfInt gromov_product(const GroupBackend& g, const Word& x,
                              const Word& y) {
  const Word d = g.multiply(g.invert(x), y);
  return HalfInt{static_cast<std::int64_t>(x.size() + y.size()) -
                 static_cast<std::int64_t>(d.size())};
}

// ---------------------------------------------------------------------------
// Confluence

struct CriticalPair {
  Word overlap;
  Word left;   // normal form via the first rule
  Word right;  // normal form via the second rule
};

/// Scans all overlaps and inclusions of left-hand sides. Returns the first
/// critical pair whose two reducts have different normal forms, if any.
inline std::optional<CriticalPair> find_unresolved_critical_pair(
    const std::vector<Rule>& rules, std::size_t alphabet_size) {
  auto nf = [&](const Word& w) {
    return GroupBackend::normalize_with(w, rules, alphabet_size);
  };
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const Rule& r1 = rules[i];
    for (std::size_t j = 0; j < rules.size(); ++j) {
      const Rule& r2 = rules[j];
      // Proper overlap: suffix of l1 equals prefix of l2.
      const std::size_t max_o = std::min(r1.lhs.size(), r2.lhs.size());
      for (std::size_t o = 1; o < max_o; ++o) {
        if (r1.lhs.substr(r1.lhs.size() - o) != r2.lhs.prefix(o)) continue;
        Word tail = r2.lhs.substr(o);
        Word a = nf(r1.rhs + tail);
        Word b = nf(r1.lhs.prefix(r1.lhs.size() - o) + r2.rhs);
        if (a != b) return CriticalPair{r1.lhs + tail, a, b};
      }
      // Inclusion: l2 is a factor of l1.
      if (i != j && r2.lhs.size() <= r1.lhs.size()) {
        for (std::size_t p = r1.lhs.find(r2.lhs); p != std::string::npos;
             p = r1.lhs.find(r2.lhs, p + 1)) {
          Word a = nf(r1.rhs);
          Word b = nf(r1.lhs.prefix(p) + r2.rhs +
                      r1.lhs.substr(p + r2.lhs.size()));
          if (a != b) return CriticalPair{r1.lhs, a, b};
        }
      }
    }
  }
  return std::nullopt;
}

namespace detail {

inline void check_confluent(const std::vector<Rule>& rules,
                            const Alphabet& alphabet) {
  if (auto cp = find_unresolved_critical_pair(rules, alphabet.size()))
    throw Error(ErrorKind::NotLocallyConfluent,
                "critical pair on '" + alphabet.format(cp->overlap) +
                    "' resolves to '" + alphabet.format(cp->left) +
                    "' and '" + alphabet.format(cp->right) + "'");
}

inline std::string default_generator_name(std::size_t i) {
  if (i < 26) return std::string(1, static_cast<char>('a' + i));
  return "x" + std::to_string(i);
}

}  // namespace detail

/// Builds a backend after verifying order reduction and local confluence.
inline GroupBackend make_rws_backend(BackendKind kind, Alphabet alphabet,
                                     std::vector<Rule> rules) {
  detail::check_rules_reduce(rules, alphabet);
  detail::check_confluent(rules, alphabet);
  return GroupBackend(std::move(kind), std::move(alphabet), std::move(rules));
}

/// Free group on `rank` generators; alphabet a a- b b- ... in that order.
inline GroupBackend make_free(int rank) {
  if (rank < 1 || rank > 127)
    throw Error(ErrorKind::BadSpec,
                "free rank must be in [1,127], got " + std::to_string(rank));
  std::vector<std::string> names;
  std::vector<Letter> inv;
  std::vector<Rule> rules;
  for (int i = 0; i < rank; ++i) {
    const auto base = detail::default_generator_name(i);
    const auto x = static_cast<Letter>(2 * i), xi = static_cast<Letter>(2 * i + 1);
    names.push_back(base);
    names.push_back(base + "-");
    inv.push_back(xi);
    inv.push_back(x);
    rules.push_back({Word{x, xi}, Word{}});
    rules.push_back({Word{xi, x}, Word{}});
  }
  return GroupBackend(FreeKind{rank}, Alphabet(std::move(names), std::move(inv)),
                      std::move(rules));
}

/// Free product of cyclic groups Z/m1 * Z/m2 * ... . Order-2 factors get a
/// single self-inverse letter; others get g and g- with syllables g^j
/// (j <= m/2) and g-^j (j < m/2), the shortlex-least spellings.
inline GroupBackend compile_cyclicprod(const std::vector<int>& orders) {
  if (orders.empty())
    throw Error(ErrorKind::InvalidOrder, "no factors given");
  std::vector<std::string> names;
  std::vector<Letter> inv;
  std::vector<Rule> rules;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const int m = orders[i];
    if (m < 2 || m > 64)
      throw Error(ErrorKind::InvalidOrder,
                  "cyclic order must be in [2,64], got " + std::to_string(m));
    const auto base = detail::default_generator_name(i);
    const auto g = static_cast<Letter>(names.size());
    if (m == 2) {
      names.push_back(base);
      inv.push_back(g);
      rules.push_back({Word{g, g}, Word{}});
      continue;
    }
    const auto gi = static_cast<Letter>(g + 1);
    names.push_back(base);
    names.push_back(base + "-");
    inv.push_back(gi);
    inv.push_back(g);
    auto power = [](Letter l, int n) {
      Word w;
      for (int k = 0; k < n; ++k) w.push_back(l);
      return w;
    };
    const int pos_max = m / 2;        // g^j allowed for j <= pos_max
    const int neg_max = (m - 1) / 2;  // g-^j allowed for j <= neg_max
    rules.push_back({Word{g, gi}, Word{}});
    rules.push_back({Word{gi, g}, Word{}});
    rules.push_back({power(g, pos_max + 1), power(gi, m - pos_max - 1)});
    rules.push_back({power(gi, neg_max + 1), power(g, m - neg_max - 1)});
  }
  return make_rws_backend(CyclicProductKind{orders},
                          Alphabet(std::move(names), std::move(inv)),
                          std::move(rules));
}

// ---------------------------------------------------------------------------
// RWS text format

namespace detail {

inline std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace detail

/// Parses the line-oriented rule format:
///   letters: a a- b b-
///   inverses: a:a- b:b-
///   lhs -> rhs          (letters separated by whitespace, `eps` = empty)
inline GroupBackend load_rws(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::optional<std::vector<std::string>> letters;
  std::optional<std::vector<std::pair<std::string, std::string>>> inverse_pairs;
  std::vector<std::pair<std::string, std::string>> rule_text;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::strip_comment(raw);
    if (detail::split_ws(line).empty()) continue;
    if (auto p = line.find("letters:"); p != std::string::npos &&
                                        detail::split_ws(line.substr(0, p)).empty()) {
      if (letters) fail("duplicate letters line");
      letters = detail::split_ws(line.substr(p + 8));
      continue;
    }
    if (auto p = line.find("inverses:"); p != std::string::npos &&
                                         detail::split_ws(line.substr(0, p)).empty()) {
      if (inverse_pairs) fail("duplicate inverses line");
      inverse_pairs.emplace();
      for (const auto& tok : detail::split_ws(line.substr(p + 9))) {
        auto c = tok.find(':');
        if (c == std::string::npos || c == 0 || c + 1 == tok.size())
          fail("malformed inverse pair '" + tok + "'");
        inverse_pairs->emplace_back(tok.substr(0, c), tok.substr(c + 1));
      }
      continue;
    }
    auto arrow = line.find("->");
    if (arrow == std::string::npos) fail("expected 'lhs -> rhs'");
    if (!letters || !inverse_pairs)
      fail("rules must follow the letters and inverses lines");
    rule_text.emplace_back(line.substr(0, arrow), line.substr(arrow + 2));
  }
  if (!letters) throw Error(ErrorKind::ParseError, "missing letters line");
  if (!inverse_pairs) throw Error(ErrorKind::ParseError, "missing inverses line");

  std::vector<Letter> inv(letters->size(), 255);
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < letters->size(); ++i) idx[(*letters)[i]] = i;
  auto lookup = [&](const std::string& n) -> std::size_t {
    auto it = idx.find(n);
    if (it == idx.end())
      throw Error(ErrorKind::UnknownLetter, "inverse names unknown letter '" + n + "'");
    return it->second;
  };
  for (const auto& [x, y] : *inverse_pairs) {
    const auto i = lookup(x), j = lookup(y);
    if ((inv[i] != 255 && inv[i] != j) || (inv[j] != 255 && inv[j] != i))
      throw Error(ErrorKind::AsymmetricAlphabet,
                  "conflicting inverse for '" + x + "' / '" + y + "'");
    inv[i] = static_cast<Letter>(j);
    inv[j] = static_cast<Letter>(i);
  }
  for (std::size_t i = 0; i < inv.size(); ++i)
    if (inv[i] == 255)
      throw Error(ErrorKind::AsymmetricAlphabet,
                  "letter '" + (*letters)[i] + "' has no inverse");

  Alphabet alphabet(*letters, inv);
  std::vector<Rule> rules;
  for (const auto& [l, r] : rule_text) {
    Word lhs = alphabet.parse(l), rhs = alphabet.parse(r);
    rules.push_back({std::move(lhs), std::move(rhs)});
  }
  return make_rws_backend(RwsKind{}, std::move(alphabet), std::move(rules));
}

inline GroupBackend load_rws_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_rws(ss.str());
}

/// Serializes any backend in the rule-file format.
inline std::string to_rws_text(const GroupBackend& g) {
  const auto& a = g.alphabet();
  std::string out = "letters:";
  for (const auto& n : a.names()) out += " " + n;
  out += "\ninverses:";
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto j = a.inverse(static_cast<Letter>(i));
    if (j >= i) out += " " + a.name(static_cast<Letter>(i)) + ":" + a.name(j);
  }
  out += "\n";
  for (const auto& r : g.rules())
    out += a.format(r.lhs) + " -> " + a.format(r.rhs) + "\n";
  return out;
}

}  // namespace hyplab
