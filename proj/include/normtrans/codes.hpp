#ifndef NORMTRANS_CODES_HPP
#define NORMTRANS_CODES_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "normtrans/core.hpp"
#include "normtrans/parse.hpp"

namespace normtrans {

enum class CodeKind { generic, comma_separated, comma_embedded, unary };

inline std::string_view to_string(CodeKind k) {
  switch (k) {
    case CodeKind::generic: return "generic";
    case CodeKind::comma_separated: return "comma_separated";
    case CodeKind::comma_embedded: return "comma_embedded";
    case CodeKind::unary: return "unary";
  }
  return "?";
}

/// Injective symbol-to-word map with |f(x)| >= 1, plus class metadata.
///
/// For the separator classes (comma-separated, comma-embedded, unary) the
/// quasi-period of the extension is exactly |f(x_1)|; these are the only
/// codes the exact transport engines accept. A unary code is structural:
/// f(x) = 0^x 1 is defined for every x >= 0, the declared support is only
/// the truncation used for enumeration.
class FinitaryCode {
 public:
  FinitaryCode(Alphabet source, Alphabet target, std::map<SymbolId, Word> table, CodeKind kind,
               std::optional<SymbolId> separator = std::nullopt, std::size_t suffix_len = 0)
      : source_(std::move(source)),
        target_(std::move(target)),
        table_(std::move(table)),
        kind_(kind),
        separator_(separator),
        suffix_len_(suffix_len) {
    validate();
  }

  const Alphabet& source() const noexcept { return source_; }
  const Alphabet& target() const noexcept { return target_; }
  const std::map<SymbolId, Word>& table() const noexcept { return table_; }
  CodeKind kind() const noexcept { return kind_; }
  std::optional<SymbolId> separator() const noexcept { return separator_; }
  std::size_t suffix_len() const noexcept { return suffix_len_; }

  bool has_exact_quasi_period() const noexcept { return kind_ != CodeKind::generic; }

  const Word& codeword(SymbolId x) const {
    if (auto it = table_.find(x); it != table_.end()) return it->second;
    if (kind_ == CodeKind::unary && x >= 0) {
      auto [it, _] = structural_.emplace(x, unary_word(x));
      return it->second;
    }
    throw Error(ErrorKind::unknown_symbol, "symbol " + std::to_string(x) + " has no codeword");
  }

  std::optional<SymbolId> decode_word(const Word& w) const {
    if (auto it = inverse_.find(w); it != inverse_.end()) return it->second;
    if (kind_ == CodeKind::unary && !w.empty() && w.back() == 1 &&
        std::all_of(w.begin(), w.end() - 1, [](SymbolId s) { return s == 0; }))
      return static_cast<SymbolId>(w.size() - 1);
    return std::nullopt;
  }

  std::size_t max_codeword_length() const {
    std::size_t m = 0;
    for (const auto& [_, w] : table_) m = std::max(m, w.size());
    return m;
  }

  std::vector<Word> codewords() const {
    std::vector<Word> out;
    for (const auto& [_, w] : table_) out.push_back(w);
    return out;
  }

  /// Event {y : a codeword of the extension ends at coordinate 0}, for the
  /// separator classes: the separator sits suffix_len places before the end.
  CylinderEvent boundary_event() const {
    if (!separator_) throw Error(ErrorKind::unsupported_kind, "generic codes have no separator event");
    return CylinderEvent(AlphabetTag::target, -static_cast<Coord>(suffix_len_), {*separator_});
  }

  std::string describe() const {
    std::string out = std::string(to_string(kind_)) + "{";
    bool first = true;
    for (const auto& [x, w] : table_) {
      if (!first) out += ", ";
      first = false;
      out += source_.render(x) + "->" + render_word(w, &target_);
    }
    out += "}";
    if (separator_) out += " sep=" + target_.render(*separator_);
    if (kind_ == CodeKind::comma_embedded) out += " n=" + std::to_string(suffix_len_);
    return out;
  }

 private:
  static Word unary_word(SymbolId x) {
    Word w(static_cast<std::size_t>(x), 0);
    w.push_back(1);
    return w;
  }

  void validate() {
    for (const auto& [x, w] : table_) {
      if (!source_.contains(x))
        throw Error(ErrorKind::unknown_symbol, "code table symbol " + std::to_string(x) + " not in source alphabet");
      if (w.empty()) throw Error(ErrorKind::empty_codeword, "codeword of " + source_.render(x) + " is empty");
      for (auto s : w)
        if (!target_.contains(s))
          throw Error(ErrorKind::unknown_symbol, "codeword symbol " + std::to_string(s) + " not in target alphabet");
      auto [it, fresh] = inverse_.emplace(w, x);
      if (!fresh)
        throw Error(ErrorKind::duplicate_codeword, "symbols " + source_.render(it->second) + " and " +
                                                       source_.render(x) + " share codeword " + render_word(w, &target_));
    }
    for (const auto& s : source_.support())
      if (!table_.count(s.id)) throw Error(ErrorKind::unknown_symbol, "source symbol " + std::to_string(s.id) + " has no codeword");
    if (kind_ == CodeKind::generic) return;
    if (!separator_) throw Error(ErrorKind::invalid_argument, "separator classes need a separator");
    const auto c = *separator_;
    for (const auto& [x, w] : table_) {
      if (w.size() < suffix_len_ + 1)
        throw Error(ErrorKind::bad_suffix_length, "codeword of " + source_.render(x) + " too short for suffix length");
      const auto sep_pos = w.size() - suffix_len_ - 1;
      for (std::size_t i = 0; i < w.size(); ++i)
        if ((w[i] == c) != (i == sep_pos))
          throw Error(ErrorKind::separator_in_word,
                      "codeword of " + source_.render(x) + " must contain the separator exactly at position " +
                          std::to_string(sep_pos + 1));
    }
    if (kind_ == CodeKind::unary) {
      for (const auto& [x, w] : table_)
        if (w != unary_word(x)) throw Error(ErrorKind::invalid_argument, "unary codeword mismatch");
    }
  }

  Alphabet source_;
  Alphabet target_;
  std::map<SymbolId, Word> table_;
  std::map<Word, SymbolId> inverse_;
  mutable std::map<SymbolId, Word> structural_;
  CodeKind kind_;
  std::optional<SymbolId> separator_;
  std::size_t suffix_len_ = 0;
};

namespace detail {

inline Alphabet ids_alphabet(AlphabetTag tag, std::set<SymbolId> ids) {
  return Alphabet::of_ids(tag, std::vector<SymbolId>(ids.begin(), ids.end()));
}

inline std::set<SymbolId> keys_of(const std::map<SymbolId, Word>& m) {
  std::set<SymbolId> out;
  for (const auto& [k, _] : m) out.insert(k);
  return out;
}

inline std::set<SymbolId> symbols_of(const std::map<SymbolId, Word>& m, std::initializer_list<SymbolId> extra) {
  std::set<SymbolId> out(extra);
  for (const auto& [_, w] : m) out.insert(w.begin(), w.end());
  return out;
}

}  // namespace detail

inline FinitaryCode make_comma_separated(Alphabet source, Alphabet target, const std::map<SymbolId, Word>& word_map,
                                         SymbolId separator) {
  std::map<SymbolId, Word> table;
  for (const auto& [x, w] : word_map) {
    if (std::find(w.begin(), w.end(), separator) != w.end())
      throw Error(ErrorKind::separator_in_word, "word of " + source.render(x) + " contains the separator");
    Word cw = w;
    cw.push_back(separator);
    table.emplace(x, std::move(cw));
  }
  return FinitaryCode(std::move(source), std::move(target), std::move(table), CodeKind::comma_separated, separator);
}

/// Convenience overload over unlabeled alphabets inferred from the map.
inline FinitaryCode make_comma_separated(const std::map<SymbolId, Word>& word_map, SymbolId separator) {
  return make_comma_separated(detail::ids_alphabet(AlphabetTag::source, detail::keys_of(word_map)),
                              detail::ids_alphabet(AlphabetTag::target, detail::symbols_of(word_map, {separator})),
                              word_map, separator);
}

inline FinitaryCode make_comma_embedded(Alphabet source, Alphabet target, const std::map<SymbolId, Word>& word_map,
                                        SymbolId separator, const std::map<SymbolId, Word>& suffix_map,
                                        std::size_t n) {
  std::map<SymbolId, Word> table;
  for (const auto& [x, w] : word_map) {
    if (std::find(w.begin(), w.end(), separator) != w.end())
      throw Error(ErrorKind::separator_in_word, "word of " + source.render(x) + " contains the separator");
    Word z;
    if (auto it = suffix_map.find(x); it != suffix_map.end()) z = it->second;
    if (z.size() != n)
      throw Error(ErrorKind::bad_suffix_length, "suffix of " + source.render(x) + " has length " +
                                                    std::to_string(z.size()) + ", expected " + std::to_string(n));
    if (std::find(z.begin(), z.end(), separator) != z.end())
      throw Error(ErrorKind::separator_in_word, "suffix of " + source.render(x) + " contains the separator");
    Word cw = w;
    cw.push_back(separator);
    cw.insert(cw.end(), z.begin(), z.end());
    table.emplace(x, std::move(cw));
  }
  return FinitaryCode(std::move(source), std::move(target), std::move(table), CodeKind::comma_embedded, separator, n);
}

inline FinitaryCode make_comma_embedded(const std::map<SymbolId, Word>& word_map, SymbolId separator,
                                        const std::map<SymbolId, Word>& suffix_map, std::size_t n) {
  auto tgt = detail::symbols_of(word_map, {separator});
  for (const auto& [_, z] : suffix_map) tgt.insert(z.begin(), z.end());
  return make_comma_embedded(detail::ids_alphabet(AlphabetTag::source, detail::keys_of(word_map)),
                             detail::ids_alphabet(AlphabetTag::target, tgt), word_map, separator, suffix_map, n);
}

/// f(x) = 0^x 1 over the given (truncated) support of nonnegative integers.
inline FinitaryCode make_unary(const std::vector<SymbolId>& support) {
  std::map<SymbolId, Word> table;
  for (auto x : support) {
    if (x < 0) throw Error(ErrorKind::invalid_argument, "unary support must be nonnegative");
    Word w(static_cast<std::size_t>(x), 0);
    w.push_back(1);
    table.emplace(x, std::move(w));
  }
  std::vector<Symbol> src;
  for (auto x : support) src.push_back({x, std::to_string(x)});
  return FinitaryCode(Alphabet(AlphabetTag::source, std::move(src)),
                      Alphabet(AlphabetTag::target, {{0, "0"}, {1, "1"}}), std::move(table), CodeKind::unary, 1);
}

inline FinitaryCode make_generic(Alphabet source, Alphabet target, std::map<SymbolId, Word> table) {
  return FinitaryCode(std::move(source), std::move(target), std::move(table), CodeKind::generic);
}

inline FinitaryCode make_generic(std::map<SymbolId, Word> table) {
  auto src = detail::keys_of(table);
  auto tgt = detail::symbols_of(table, {});
  if (tgt.empty()) tgt.insert(0);
  return make_generic(detail::ids_alphabet(AlphabetTag::source, src), detail::ids_alphabet(AlphabetTag::target, tgt),
                      std::move(table));
}

// ---------------------------------------------------------------------------
// Infinitary extension on finite windows

struct CodedWindow {
  Window ywindow;
  std::vector<Coord> boundaries;  ///< coordinates where codewords end, starting with 0
};

inline CodedWindow encode(const FinitaryCode& code, const Window& xw) {
  if (xw.start != 1) throw Error(ErrorKind::invalid_argument, "encode expects a source window starting at 1");
  CodedWindow out{Window{1, {}}, {0}};
  for (auto x : xw.word) {
    const auto& w = code.codeword(x);
    out.ywindow.word.insert(out.ywindow.word.end(), w.begin(), w.end());
    out.boundaries.push_back(static_cast<Coord>(out.ywindow.word.size()));
  }
  return out;
}

inline Window decode_by_boundaries(const FinitaryCode& code, const CodedWindow& cw) {
  Window out{1, {}};
  for (std::size_t k = 0; k + 1 < cw.boundaries.size(); ++k) {
    Word w;
    for (Coord i = cw.boundaries[k] + 1; i <= cw.boundaries[k + 1]; ++i) w.push_back(cw.ywindow.at(i));
    auto x = code.decode_word(w);
    if (!x) throw Error(ErrorKind::unknown_symbol, "segment " + render_word(w) + " is not a codeword");
    out.word.push_back(*x);
  }
  return out;
}

/// L_g(x) = |f(x_1)| for the separator classes.
inline std::size_t quasi_period(const FinitaryCode& code, SymbolId x1) {
  if (!code.has_exact_quasi_period())
    throw Error(ErrorKind::unsupported_kind, "exact quasi-period needs a separator class; use quasi_period_bounded");
  return code.codeword(x1).size();
}

/// Smallest l >= 1 such that T^l g(x) and g(T x) agree on every coordinate in
/// [1-l, horizon] that the encoded window can see. Since only finitely many
/// coordinates are compared, the answer never exceeds the true quasi-period.
inline std::size_t quasi_period_bounded(const FinitaryCode& code, const Window& xw, std::size_t horizon) {
  if (xw.word.empty()) throw Error(ErrorKind::window_too_short, "empty source window");
  const auto y = encode(code, xw).ywindow;
  const auto first = code.codeword(xw.word.front()).size();
  if (y.size() < horizon + first)
    throw Error(ErrorKind::window_too_short, "encoded window has " + std::to_string(y.size()) + " symbols, need " +
                                                 std::to_string(horizon + first));
  for (std::size_t l = 1; l < first; ++l) {
    // (T^l y)_i = y_{i+l} against (T^{|f(x1)|} y)_i = y_{i+|f(x1)|}, i from 1-l to horizon.
    bool agree = true;
    for (std::size_t k = 1; k <= horizon + l && agree; ++k)
      agree = y.word[k - 1] == y.word[k - 1 + first - l];
    if (agree) return l;
  }
  return first;
}

/// G_g(B)(x): number of shifts l in [0, L) with T^l g(x) in B.
inline std::size_t spread(const FinitaryCode& code, const Window& xw, const CylinderEvent& b) {
  if (b.start < 1) throw Error(ErrorKind::negative_coordinate, "spread probes coordinates >= 1 only; canonicalize " + render(b));
  if (xw.word.empty()) throw Error(ErrorKind::window_too_short, "empty source window");
  const auto period = quasi_period(code, xw.word.front());
  const auto y = encode(code, xw).ywindow;
  const auto need = static_cast<Coord>(period) - 1 + b.end();
  if (y.end() < need)
    throw Error(ErrorKind::window_too_short, "encoded window ends at " + std::to_string(y.end()) + ", need " + std::to_string(need));
  std::size_t g = 0;
  for (std::size_t l = 0; l < period; ++l)
    if (matches(y, shift_event(b, static_cast<Coord>(l)))) ++g;
  return g;
}

// ---------------------------------------------------------------------------
// Unique decodability (Sardinas-Patterson with witness reconstruction)

struct UdResult {
  bool uniquely_decodable = true;
  Word witness;                           ///< target string with two parses
  std::vector<SymbolId> parse_a, parse_b;  ///< the two source sequences
};

inline UdResult check_unique_decodability(const FinitaryCode& code) {
  const auto& table = code.table();
  std::vector<std::pair<SymbolId, Word>> cw(table.begin(), table.end());
  auto is_prefix = [](const Word& p, const Word& w) {
    return p.size() <= w.size() && std::equal(p.begin(), p.end(), w.begin());
  };
  // State: `ahead` = concat(behind) + dangling.
  struct State {
    Word dangling;
    std::vector<SymbolId> ahead, behind;
  };
  std::deque<State> queue;
  std::set<Word> seen;
  for (const auto& [xa, a] : cw)
    for (const auto& [xb, b] : cw)
      if (xa != xb && b.size() < a.size() && is_prefix(b, a)) {
        Word d(a.begin() + static_cast<std::ptrdiff_t>(b.size()), a.end());
        if (seen.insert(d).second) queue.push_back({d, {xa}, {xb}});
      }
  while (!queue.empty()) {
    auto st = std::move(queue.front());
    queue.pop_front();
    for (const auto& [xc, c] : cw) {
      if (c == st.dangling) {
        UdResult r{false, {}, st.ahead, st.behind};
        r.parse_b.push_back(xc);
        for (auto x : r.parse_a) {
          const auto& w = code.codeword(x);
          r.witness.insert(r.witness.end(), w.begin(), w.end());
        }
        return r;
      }
      if (c.size() < st.dangling.size() && is_prefix(c, st.dangling)) {
        Word d(st.dangling.begin() + static_cast<std::ptrdiff_t>(c.size()), st.dangling.end());
        if (seen.insert(d).second) {
          auto behind = st.behind;
          behind.push_back(xc);
          queue.push_back({d, st.ahead, behind});
        }
      } else if (st.dangling.size() < c.size() && is_prefix(st.dangling, c)) {
        Word d(c.begin() + static_cast<std::ptrdiff_t>(st.dangling.size()), c.end());
        if (seen.insert(d).second) {
          auto ahead = st.behind;
          ahead.push_back(xc);
          queue.push_back({d, ahead, st.ahead});
        }
      }
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Bounded self-avoidance search

namespace detail {

/// Nondeterministic codeword parser over a finite table. Right states are
/// pending codeword prefixes, left states pending codeword suffixes.
class ParseAutomaton {
 public:
  explicit ParseAutomaton(const FinitaryCode& code) {
    for (const auto& [_, w] : code.table()) {
      words_.insert(w);
      for (std::size_t k = 0; k < w.size(); ++k) {
        prefixes_.insert(Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k)));
        suffixes_.insert(Word(w.end() - static_cast<std::ptrdiff_t>(k), w.end()));
      }
    }
  }

  using States = std::set<Word>;

  States feed_right(const States& s, SymbolId sym) const {
    States out;
    for (const auto& p : s) {
      Word q = p;
      q.push_back(sym);
      if (words_.count(q)) out.insert(Word{});
      if (prefixes_.count(q)) out.insert(std::move(q));
    }
    return out;
  }

  States feed_left(const States& s, SymbolId sym) const {
    States out;
    for (const auto& p : s) {
      Word q;
      q.reserve(p.size() + 1);
      q.push_back(sym);
      q.insert(q.end(), p.begin(), p.end());
      if (words_.count(q)) out.insert(Word{});
      if (suffixes_.count(q)) out.insert(std::move(q));
    }
    return out;
  }

  States right(States s, std::span<const SymbolId> w) const {
    for (auto sym : w) {
      if (s.empty()) break;
      s = feed_right(s, sym);
    }
    return s;
  }

  States left(States s, std::span<const SymbolId> w) const {
    for (auto it = w.rbegin(); it != w.rend() && !s.empty(); ++it) s = feed_left(s, *it);
    return s;
  }

 private:
  std::set<Word> words_, prefixes_, suffixes_;
};

}  // namespace detail

struct SelfAvoidWitness {
  std::vector<SymbolId> left;   ///< codewords before x_1, left to right
  SymbolId x1 = 0;
  std::vector<SymbolId> right;  ///< codewords after x_1
  std::size_t shift = 0;        ///< 0 < shift < |f(x_1)|
};

struct SelfAvoidVerdict {
  bool pass = true;
  std::size_t depth = 0;
  std::optional<SelfAvoidWitness> violation;
};

/// Does `y` admit a codeword parse with a boundary after `cut` symbols, where
/// the first and last codewords may extend beyond the window?
inline bool parses_with_boundary_at(const FinitaryCode& code, std::span<const SymbolId> y, std::size_t cut) {
  detail::ParseAutomaton a(code);
  auto l = a.left({Word{}}, y.first(cut));
  auto r = a.right({Word{}}, y.subspan(cut));
  return !l.empty() && !r.empty();
}

inline bool replay_violation(const FinitaryCode& code, const SelfAvoidWitness& w) {
  Word y;
  for (auto x : w.left) {
    const auto& c = code.codeword(x);
    y.insert(y.end(), c.begin(), c.end());
  }
  const auto offset = y.size();
  const auto& first = code.codeword(w.x1);
  y.insert(y.end(), first.begin(), first.end());
  for (auto x : w.right) {
    const auto& c = code.codeword(x);
    y.insert(y.end(), c.begin(), c.end());
  }
  return w.shift > 0 && w.shift < first.size() && parses_with_boundary_at(code, y, offset + w.shift);
}

/// Searches windows of `depth` codewords: x_1 with (depth-1)/2 codewords of
/// left context and the rest on the right. For each interior shift
/// 0 < j < |f(x_1)| it asks whether the window can be re-parsed with a
/// boundary at j. Pass(depth) means no window survived; left and right
/// contexts are independent given (x_1, j), so each side is a breadth-first
/// search over reachable parser state sets.
inline SelfAvoidVerdict check_self_avoiding(const FinitaryCode& code, std::size_t depth) {
  if (depth < 2) throw Error(ErrorKind::invalid_argument, "self-avoidance depth must be >= 2");
  const std::size_t left_ctx = (depth - 1) / 2;
  const std::size_t right_ctx = depth - 1 - left_ctx;
  detail::ParseAutomaton a(code);
  using States = detail::ParseAutomaton::States;

  // Returns a witnessing context sequence if some `steps`-codeword extension keeps `start` alive.
  auto search = [&](const States& start, std::size_t steps, bool leftward) -> std::optional<std::vector<SymbolId>> {
    std::map<States, std::vector<SymbolId>> level{{start, {}}};
    for (std::size_t k = 0; k < steps; ++k) {
      std::map<States, std::vector<SymbolId>> next;
      for (const auto& [s, ctx] : level)
        for (const auto& [x, w] : code.table()) {
          auto t = leftward ? a.left(s, w) : a.right(s, w);
          if (t.empty()) continue;
          auto seq = ctx;
          if (leftward) seq.insert(seq.begin(), x);
          else seq.push_back(x);
          next.emplace(std::move(t), std::move(seq));
        }
      level = std::move(next);
      if (level.empty()) return std::nullopt;
    }
    return level.begin()->second;
  };

  for (const auto& [x1, w] : code.table()) {
    for (std::size_t j = 1; j < w.size(); ++j) {
      std::span<const SymbolId> ws(w);
      auto l0 = a.left({Word{}}, ws.first(j));
      if (l0.empty()) continue;
      auto r0 = a.right({Word{}}, ws.subspan(j));
      if (r0.empty()) continue;
      auto lctx = search(l0, left_ctx, true);
      if (!lctx) continue;
      auto rctx = search(r0, right_ctx, false);
      if (!rctx) continue;
      return {false, depth, SelfAvoidWitness{*lctx, x1, *rctx, j}};
    }
  }
  return {true, depth, std::nullopt};
}

// ---------------------------------------------------------------------------
// Stationary-code factorization g = id^Z o (h o g)

/// Checks on a window that recurrence parsing of the encoded stream with the
/// boundary event returns the codewords (id o g~ = g) and that parsing
/// commutes with the shifts (T_W o g~ = g~ o T_X), for `steps` shifts.
inline bool factorization_commutes(const FinitaryCode& code, const Window& xw, std::size_t steps) {
  if (!code.has_exact_quasi_period()) throw Error(ErrorKind::unsupported_kind, "factorization check needs a separator class");
  if (xw.start != 1 || xw.word.size() < steps + 3)
    throw Error(ErrorKind::window_too_short, "need at least steps+3 source symbols starting at 1");
  const auto b = code.boundary_event();
  std::vector<Word> previous;
  for (std::size_t s = 0; s <= steps; ++s) {
    Window sub{1, Word(xw.word.begin() + static_cast<std::ptrdiff_t>(s), xw.word.end())};
    const auto coded = encode(code, sub);
    const auto parsed = recurrence_parse(coded.ywindow, b);
    // Visits must be exactly the codeword ends visible in the window.
    if (parsed.boundaries != std::vector<Coord>(coded.boundaries.begin() + 1, coded.boundaries.end())) return false;
    for (std::size_t k = 0; k < parsed.size(); ++k)
      if (parsed.words[k] != code.codeword(sub.word[k + 1])) return false;
    if (parsed.words.front().size() != code.codeword(sub.word[1]).size()) return false;
    if (s > 0 && !std::equal(parsed.words.begin(), parsed.words.end(), previous.begin() + 1)) return false;
    previous = parsed.words;
  }
  return true;
}

}  // namespace normtrans

#endif  // NORMTRANS_CODES_HPP
