#ifndef NORMTRANS_CORE_HPP
#define NORMTRANS_CORE_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "normtrans/error.hpp"

namespace normtrans {

// Coordinates follow the two-sided convention ... z_{-1} z_0 ; z_1 z_2 ...
// so a window starting at 1 begins right after the origin semicolon.

using SymbolId = std::int64_t;
using Coord = std::int64_t;
using Word = std::vector<SymbolId>;

enum class AlphabetTag { source, target, word };

inline std::string_view to_string(AlphabetTag t) {
  switch (t) {
    case AlphabetTag::source: return "source";
    case AlphabetTag::target: return "target";
    case AlphabetTag::word: return "word";
  }
  return "?";
}

struct Symbol {
  SymbolId id = 0;
  std::optional<std::string> label;
};

/// Explicit finite truncation of a countable alphabet.
class Alphabet {
 public:
  Alphabet() = default;

  Alphabet(AlphabetTag tag, std::vector<Symbol> support) : tag_(tag), support_(std::move(support)) {
    if (support_.empty()) throw Error(ErrorKind::invalid_argument, "alphabet support is empty");
    for (std::size_t i = 0; i < support_.size(); ++i) {
      const auto& s = support_[i];
      if (s.id < 0) throw Error(ErrorKind::invalid_argument, "symbol ids must be nonnegative");
      if (!index_.emplace(s.id, i).second)
        throw Error(ErrorKind::invalid_argument, "duplicate symbol id " + std::to_string(s.id));
      if (s.label && !labels_.emplace(*s.label, s.id).second)
        throw Error(ErrorKind::invalid_argument, "duplicate symbol label '" + *s.label + "'");
    }
  }

  /// Unlabeled alphabet over the given ids.
  static Alphabet of_ids(AlphabetTag tag, const std::vector<SymbolId>& ids) {
    std::vector<Symbol> s;
    s.reserve(ids.size());
    for (auto id : ids) s.push_back({id, std::nullopt});
    return Alphabet(tag, std::move(s));
  }

  /// Labels become ids when every label is a nonnegative integer literal;
  /// otherwise ids are positions in the list.
  static Alphabet of_labels(AlphabetTag tag, const std::vector<std::string>& labels) {
    bool numeric = !labels.empty();
    for (const auto& l : labels) {
      if (l.empty() || l.size() > 15 || !std::all_of(l.begin(), l.end(), [](char c) { return c >= '0' && c <= '9'; }))
        numeric = false;
    }
    std::vector<Symbol> s;
    s.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      s.push_back({numeric ? static_cast<SymbolId>(std::stoll(labels[i])) : static_cast<SymbolId>(i), labels[i]});
    return Alphabet(tag, std::move(s));
  }

  AlphabetTag tag() const noexcept { return tag_; }
  const std::vector<Symbol>& support() const noexcept { return support_; }
  std::size_t size() const noexcept { return support_.size(); }

  std::vector<SymbolId> ids() const {
    std::vector<SymbolId> out;
    out.reserve(support_.size());
    for (const auto& s : support_) out.push_back(s.id);
    return out;
  }

  bool contains(SymbolId id) const { return index_.count(id) != 0; }

  std::optional<SymbolId> find_label(const std::string& label) const {
    if (auto it = labels_.find(label); it != labels_.end()) return it->second;
    return std::nullopt;
  }

  SymbolId id_of(const std::string& label) const {
    if (auto id = find_label(label)) return *id;
    throw Error(ErrorKind::unknown_symbol, "label '" + label + "' not in " + std::string(to_string(tag_)) + " alphabet");
  }

  std::string render(SymbolId id) const {
    if (auto it = index_.find(id); it != index_.end() && support_[it->second].label)
      return *support_[it->second].label;
    return std::to_string(id);
  }

  bool all_labels_single_char() const {
    return std::all_of(support_.begin(), support_.end(),
                       [](const Symbol& s) { return s.label && s.label->size() == 1; });
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    if (a.tag_ != b.tag_ || a.support_.size() != b.support_.size()) return false;
    for (std::size_t i = 0; i < a.support_.size(); ++i)
      if (a.support_[i].id != b.support_[i].id || a.support_[i].label != b.support_[i].label) return false;
    return true;
  }

 private:
  AlphabetTag tag_ = AlphabetTag::source;
  std::vector<Symbol> support_;
  std::map<SymbolId, std::size_t> index_;
  std::map<std::string, SymbolId> labels_;
};

/// Coordinates start .. start+|word|-1 of a two-sided sequence.
struct Window {
  Coord start = 1;
  Word word;

  Coord end() const noexcept { return start + static_cast<Coord>(word.size()) - 1; }
  std::size_t size() const noexcept { return word.size(); }
  bool covers(Coord first, Coord last) const noexcept { return first >= start && last <= end(); }
  SymbolId at(Coord i) const { return word.at(static_cast<std::size_t>(i - start)); }

  friend bool operator==(const Window&, const Window&) = default;
};

/// The event {z : z_{start..start+|word|-1} = word}.
struct CylinderEvent {
  AlphabetTag alphabet = AlphabetTag::target;
  Coord start = 1;
  Word word;

  CylinderEvent() = default;
  CylinderEvent(AlphabetTag a, Coord s, Word w) : alphabet(a), start(s), word(std::move(w)) {
    if (word.empty()) throw Error(ErrorKind::invalid_argument, "cylinder word must be nonempty");
  }

  Coord end() const noexcept { return start + static_cast<Coord>(word.size()) - 1; }

  friend auto operator<=>(const CylinderEvent&, const CylinderEvent&) = default;
};

/// Window seen after applying the shift j times: coordinates move down by j.
inline Window shift_window(const Window& w, Coord j) { return Window{w.start - j, w.word}; }

/// The preimage event {z : T^j z in c}.
inline CylinderEvent shift_event(const CylinderEvent& c, Coord j) {
  return CylinderEvent(c.alphabet, c.start + j, c.word);
}

inline bool matches(const Window& path, const CylinderEvent& c) {
  if (!path.covers(c.start, c.end()))
    throw Error(ErrorKind::range_not_covered, "path [" + std::to_string(path.start) + "," +
                                                  std::to_string(path.end()) + "] does not cover [" +
                                                  std::to_string(c.start) + "," + std::to_string(c.end()) + "]");
  const auto off = static_cast<std::size_t>(c.start - path.start);
  return std::equal(c.word.begin(), c.word.end(), path.word.begin() + static_cast<std::ptrdiff_t>(off));
}

inline std::string render_word(std::span<const SymbolId> w, const Alphabet* a = nullptr) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += a ? a->render(w[i]) : std::to_string(w[i]);
  }
  return out;
}

/// `start:sym sym ...`
inline std::string render(const Window& w, const Alphabet* a = nullptr) {
  return std::to_string(w.start) + ":" + render_word(w.word, a);
}

/// `[start|word]`
inline std::string render(const CylinderEvent& c, const Alphabet* a = nullptr) {
  return "[" + std::to_string(c.start) + "|" + render_word(c.word, a) + "]";
}

/// Stable 64-bit FNV-1a digest used to tag reports.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string digest_hex(std::string_view s) {
  static constexpr char hex[] = "0123456789abcdef";
  auto h = fnv1a(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return out;
}

}  // namespace normtrans

#endif  // NORMTRANS_CORE_HPP
