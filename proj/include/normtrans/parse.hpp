#ifndef NORMTRANS_PARSE_HPP
#define NORMTRANS_PARSE_HPP

#include <vector>

#include "normtrans/core.hpp"

namespace normtrans {

/// Positions i with T^i y in `b` that the window can decide, in increasing order.
inline std::vector<Coord> visit_positions(const Window& y, const CylinderEvent& b) {
  std::vector<Coord> out;
  const Coord lo = y.start - b.start;
  const Coord hi = y.end() - b.end();
  for (Coord i = lo; i <= hi; ++i)
    if (matches(y, shift_event(b, i))) out.push_back(i);
  return out;
}

/// Segmentation of a window into the words between successive visits.
/// words[k] spans coordinates (boundaries[k], boundaries[k+1]]; the word
/// ending at the first visit >= 1 carries index 1 and the one ending at the
/// last visit <= 0 carries index 0 (indices are relative to the visits the
/// window can see).
struct ParsedWords {
  std::int64_t first_index = 1;
  std::vector<Word> words;
  std::vector<Coord> boundaries;

  std::size_t size() const noexcept { return words.size(); }
  std::int64_t index_of(std::size_t k) const noexcept { return first_index + static_cast<std::int64_t>(k); }
};

inline ParsedWords recurrence_parse(const Window& y, const CylinderEvent& b) {
  auto visits = visit_positions(y, b);
  // A visit near the right edge can sit past the last coordinate when b starts before 0.
  while (!visits.empty() && visits.back() > y.end()) visits.pop_back();
  if (visits.size() < 2)
    throw Error(ErrorKind::insufficient_visits,
                "recurrence parsing needs two visits, found " + std::to_string(visits.size()));
  ParsedWords out;
  out.boundaries = visits;
  for (std::size_t k = 0; k + 1 < visits.size(); ++k) {
    Word w;
    for (Coord i = visits[k] + 1; i <= visits[k + 1]; ++i) w.push_back(y.at(i));
    out.words.push_back(std::move(w));
  }
  // Index of the word ending at visits[1].
  const auto first_positive = std::lower_bound(visits.begin(), visits.end(), Coord{1});
  const auto ending_at_1 = static_cast<std::int64_t>(first_positive - visits.begin());
  out.first_index = 1 - (ending_at_1 - 1);
  return out;
}

/// Inverse of the parsing: the identity code on word sequences.
inline Window concatenate(const ParsedWords& p) {
  Window out{p.boundaries.empty() ? 1 : p.boundaries.front() + 1, {}};
  for (const auto& w : p.words) out.word.insert(out.word.end(), w.begin(), w.end());
  return out;
}

}  // namespace normtrans

#endif  // NORMTRANS_PARSE_HPP
