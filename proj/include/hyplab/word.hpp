#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hyplab/error.hpp"

namespace hyplab {

using Letter = std::uint8_t;

/// A word over a finite alphabet, stored as its canonical byte string (one
/// byte per letter index). The byte string doubles as the deduplication key.
class Word {
 public:
  Word() = default;
  explicit Word(std::string bytes) : bytes_(std::move(bytes)) {}
  Word(std::initializer_list<Letter> letters) {
    for (Letter l : letters) push_back(l);
  }

  std::size_t size() const noexcept { return bytes_.size(); }
  bool empty() const noexcept { return bytes_.empty(); }
  Letter operator[](std::size_t i) const {
    return static_cast<Letter>(bytes_[i]);
  }
  Letter back() const { return static_cast<Letter>(bytes_.back()); }

  void push_back(Letter l) { bytes_.push_back(static_cast<char>(l)); }
  void pop_back() { bytes_.pop_back(); }
  void truncate(std::size_t n) { bytes_.resize(n); }
  void append(const Word& other) { bytes_ += other.bytes_; }

  Word prefix(std::size_t n) const {
    return Word(bytes_.substr(0, std::min(n, bytes_.size())));
  }
  Word substr(std::size_t pos, std::size_t n = std::string::npos) const {
    return Word(bytes_.substr(pos, n));
  }
  bool ends_with(const Word& suffix) const {
    return bytes_.size() >= suffix.bytes_.size() &&
           bytes_.compare(bytes_.size() - suffix.bytes_.size(),
                          suffix.bytes_.size(), suffix.bytes_) == 0;
  }
  std::size_t find(const Word& needle, std::size_t from = 0) const {
    return bytes_.find(needle.bytes_, from);
  }

  const std::string& bytes() const noexcept { return bytes_; }

  friend bool operator==(const Word&, const Word&) = default;

  /// Shortlex: shorter words first, then lexicographic by letter index.
  friend std::strong_ordering operator<=>(const Word& x, const Word& y) {
    if (x.size() != y.size()) return x.size() <=> y.size();
    int c = x.bytes_.compare(y.bytes_);
    return c < 0 ? std::strong_ordering::less
                 : c > 0 ? std::strong_ordering::greater
                         : std::strong_ordering::equal;
  }

  friend Word operator+(Word x, const Word& y) {
    x.append(y);
    return x;
  }

 private:
  std::string bytes_;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept {
    return std::hash<std::string>{}(w.bytes());
  }
};

/// Ordered, symmetric generating alphabet. Declaration order is the
/// shortlex order; `inverse` is a self-inverse bijection on letter indices.
class Alphabet {
 public:
  Alphabet() = default;

  Alphabet(std::vector<std::string> names, std::vector<Letter> inverse)
      : names_(std::move(names)), inverse_(std::move(inverse)) {
    if (names_.empty())
      throw Error(ErrorKind::ParseError, "alphabet has no letters");
    if (names_.size() > 255)
      throw Error(ErrorKind::ParseError, "alphabet exceeds 255 letters");
    if (inverse_.size() != names_.size())
      throw Error(ErrorKind::AsymmetricAlphabet,
                  "inverse map does not cover every letter");
    for (std::size_t i = 0; i < names_.size(); ++i) {
      const auto& n = names_[i];
      if (!valid_name(n))
        throw Error(ErrorKind::ParseError, "invalid letter name '" + n + "'");
      if (!index_.emplace(n, static_cast<Letter>(i)).second)
        throw Error(ErrorKind::ParseError, "duplicate letter '" + n + "'");
    }
    for (std::size_t i = 0; i < inverse_.size(); ++i) {
      Letter j = inverse_[i];
      if (j >= names_.size() || inverse_[j] != i)
        throw Error(ErrorKind::AsymmetricAlphabet,
                    "inverse of '" + names_[i] + "' is not an involution");
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(Letter l) const { return names_.at(l); }
  Letter inverse(Letter l) const { return inverse_.at(l); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<Letter> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  Letter letter(std::string_view name) const {
    auto l = find(name);
    if (!l)
      throw Error(ErrorKind::UnknownLetter,
                  "letter '" + std::string(name) + "' not in alphabet");
    return *l;
  }

  /// Parses whitespace-separated letter names; `eps` (or an empty string)
  /// is the empty word. The result is not normalized.
  Word parse(std::string_view text) const {
    std::istringstream in{std::string(text)};
    Word w;
    std::string tok;
    while (in >> tok) {
      if (tok == "eps") continue;
      w.push_back(letter(tok));
    }
    return w;
  }

  std::string format(const Word& w) const {
    if (w.empty()) return "eps";
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) out += ' ';
      out += names_.at(w[i]);
    }
    return out;
  }

  Word invert(const Word& w) const {
    Word r;
    for (std::size_t i = w.size(); i-- > 0;) r.push_back(inverse_[w[i]]);
    return r;
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.names_ == b.names_ && a.inverse_ == b.inverse_;
  }

  static bool valid_name(std::string_view n) {
    if (n.empty() || n == "eps" || n == "->") return false;
    return std::all_of(n.begin(), n.end(), [](unsigned char c) {
      return std::isgraph(c) && c != ':' && c != '#' && c != ',';
    });
  }

 private:
  std::vector<std::string> names_;
  std::vector<Letter> inverse_;
  std::unordered_map<std::string, Letter> index_;
};

}  // namespace hyplab
