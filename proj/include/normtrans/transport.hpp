#ifndef NORMTRANS_TRANSPORT_HPP
#define NORMTRANS_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "normtrans/chain.hpp"
#include "normtrans/codes.hpp"
#include "normtrans/measures.hpp"

namespace normtrans {

/// Certified interval for a limit of parse-validity probabilities.
struct Bracket {
  double lo = 0;
  double hi = 0;
  std::size_t depth = 0;
  bool exact = false;
  double estimate = 0;  ///< point value at this depth (equals lo = hi when exact)

  double width() const noexcept { return hi - lo; }
  bool contains(double v, double tol = 0) const noexcept { return v >= lo - tol && v <= hi + tol; }
};

struct ComponentResult {
  double weight = 1;
  double value = 0;
  double numerator = 0;    ///< E[G]
  double denominator = 0;  ///< E[L]
};

struct TransportResult {
  double value = 0;
  double numerator = 0;
  double denominator = 0;
  std::vector<ComponentResult> components;
};

namespace detail {

inline void require_exact_class(const FinitaryCode& code) {
  if (!code.has_exact_quasi_period())
    throw Error(ErrorKind::unsupported_kind, "exact transport needs a comma-separated, comma-embedded or unary code");
}

inline const MarkovLaw& ergodic_law(const ProcessModel& m) {
  if (m.variant() != ProcessModel::Variant::iid && m.variant() != ProcessModel::Variant::markov)
    throw Error(ErrorKind::invalid_model, "expected an IID or Markov source law");
  return m.law();
}

inline double mean_length(const FinitaryCode& code, const MarkovLaw& law) {
  double e = 0;
  for (std::size_t i = 0; i < law.states.size(); ++i)
    if (law.pi(static_cast<Eigen::Index>(i)) > 0)
      e += law.pi(static_cast<Eigen::Index>(i)) * static_cast<double>(code.codeword(law.states[i]).size());
  return e;
}

/// E[G(B)] by summing over x_1, the shift l, and just enough continuations
/// x_2, x_3, ... for the coded stream to cover the shifted event.
class SpreadEnumerator {
 public:
  SpreadEnumerator(const FinitaryCode& code, const MarkovLaw& law, const CylinderEvent& b, std::uint64_t budget)
      : code_(code), law_(law), b_(b), budget_(budget) {}

  double run() {
    double total = 0;
    for (std::size_t i = 0; i < law_.states.size(); ++i) {
      const double p = law_.pi(static_cast<Eigen::Index>(i));
      if (p <= 0) continue;
      const auto len = code_.codeword(law_.states[i]).size();
      for (std::size_t l = 0; l < len; ++l) {
        lo_ = b_.start + static_cast<Coord>(l);
        hi_ = b_.end() + static_cast<Coord>(l);
        total += p * extend(i, 0);
      }
    }
    return total;
  }

  std::uint64_t terms() const noexcept { return terms_; }

 private:
  double extend(std::size_t a, Coord covered) {
    if (++terms_ > budget_)
      throw Error(ErrorKind::enumeration_budget_exceeded, "spread enumeration for " + render(b_) + " exceeded " +
                                                              std::to_string(budget_) + " terms");
    const auto& w = code_.codeword(law_.states[a]);
    for (std::size_t k = 0; k < w.size(); ++k) {
      const Coord pos = covered + 1 + static_cast<Coord>(k);
      if (pos >= lo_ && pos <= hi_ && w[k] != b_.word[static_cast<std::size_t>(pos - lo_)]) return 0;
    }
    const Coord next = covered + static_cast<Coord>(w.size());
    if (next >= hi_) return 1;
    double s = 0;
    for (std::size_t b = 0; b < law_.states.size(); ++b) {
      const double k = law_.K(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (k > 0) s += k * extend(b, next);
    }
    return s;
  }

  const FinitaryCode& code_;
  const MarkovLaw& law_;
  const CylinderEvent& b_;
  std::uint64_t budget_;
  std::uint64_t terms_ = 0;
  Coord lo_ = 1, hi_ = 1;
};

}  // namespace detail

/// E[L] = sum_x P(x_1 = x) |f(x)|.
inline double expected_quasi_period(const FinitaryCode& code, const ProcessModel& model_x) {
  detail::require_exact_class(code);
  return detail::mean_length(code, detail::ergodic_law(model_x));
}

/// Moves a cylinder to start 1; valid for stationary laws only.
inline CylinderEvent canonicalize(const CylinderEvent& b) { return shift_event(b, 1 - b.start); }

/// P_Y(B) = E[G(B)] / E[L], with mixtures transported component by component.
inline TransportResult forward(const FinitaryCode& code, const ProcessModel& model_x, const CylinderEvent& b,
                               std::uint64_t budget = kDefaultBudget) {
  detail::require_exact_class(code);
  if (b.start < 1) throw Error(ErrorKind::non_canonical_cylinder, render(b) + " starts below 1; canonicalize first");
  for (auto s : b.word)
    if (!code.target().contains(s)) throw Error(ErrorKind::unknown_symbol, "symbol " + std::to_string(s) + " not in target alphabet");
  TransportResult out;
  for (auto [w, comp] : model_x.ergodic_components()) {
    const auto& law = detail::ergodic_law(*comp);
    ComponentResult c;
    c.weight = w;
    c.numerator = detail::SpreadEnumerator(code, law, b, budget).run();
    c.denominator = detail::mean_length(code, law);
    c.value = c.numerator / c.denominator;
    out.value += w * c.value;
    out.numerator += w * c.numerator;
    out.denominator += w * c.denominator;
    out.components.push_back(c);
  }
  return out;
}

/// The normalized transport of `model_x` as a stationary model over the target.
inline ProcessModel transported(const FinitaryCode& code, const ProcessModel& model_x) {
  detail::require_exact_class(code);
  std::vector<double> weights;
  std::vector<ProcessModel> comps;
  for (auto [w, comp] : model_x.ergodic_components()) {
    weights.push_back(w);
    comps.push_back(ProcessModel::hidden(code.target(), coded_chain(code, detail::ergodic_law(*comp), true),
                                         "transport(" + code.describe() + "," + comp->describe() + ")"));
  }
  if (comps.size() == 1 && model_x.variant() != ProcessModel::Variant::mixture) return std::move(comps.front());
  return ProcessModel::mixture(std::move(weights), std::move(comps));
}

namespace detail {

/// Parse machinery for one stationary chain: alpha is the law of the hidden
/// state at 0 jointly with "a codeword may end at 0" (separator n places
/// back, no separator after it); W moves a boundary one codeword ahead.
struct BoundaryParser {
  BoundaryParser(const FinitaryCode& code, const EmissionChain& ch) : code(code), ch(ch) {
    const auto c = *code.separator();
    const auto n = code.suffix_len();
    Vector left = Vector::Ones(ch.size());
    for (std::size_t k = 0; k < n; ++k) {
      // Coordinates -n .. -1: separator first, then non-separators.
      const Vector m = k == 0 ? ch.mask(c) : ch.mask_not(c);
      left = ch.Qb * left.cwiseProduct(m).eval();
    }
    const Vector at0 = n == 0 ? ch.mask(c) : ch.mask_not(c);
    alpha = ch.nu0.cwiseProduct(at0).cwiseProduct(left);

    const auto h = ch.size();
    W = Matrix::Zero(h, h);
    if (!(alpha.sum() > 0)) return;
    if (code.kind() == CodeKind::unary) {
      const Matrix a = Matrix::Identity(h, h) - ch.Q * ch.mask(0).asDiagonal();
      Eigen::FullPivLU<Matrix> lu(a);
      if (!lu.isInvertible())
        throw Error(ErrorKind::invalid_model, "the model emits an endless run of 0 with positive probability");
      W = lu.solve(Matrix(ch.Q * ch.mask(1).asDiagonal()));
    } else {
      for (const auto& [_, v] : code.table()) W += word_matrix(v);
    }
  }

  Matrix word_matrix(const Word& v) const {
    Matrix m = Matrix::Identity(ch.size(), ch.size());
    for (auto s : v) m = (m * ch.Q * ch.mask(s).asDiagonal()).eval();
    return m;
  }

  Eigen::RowVectorXd advance(Eigen::RowVectorXd r, std::size_t codewords) const {
    for (std::size_t k = 0; k < codewords; ++k) r = (r * W).eval();
    return r;
  }

  double separator_prob() const { return alpha.sum(); }

  bool complete() const {
    const double sep = separator_prob();
    const double fail = (alpha.transpose() * (Vector::Ones(ch.size()) - W * Vector::Ones(ch.size()))).value();
    return fail <= 1e-12 * sep + 1e-15;
  }

  const FinitaryCode& code;
  const EmissionChain& ch;
  Vector alpha;
  Matrix W;
};

inline void require_stationary(const ProcessModel& m) {
  if (!m.is_stationary()) throw Error(ErrorKind::invalid_model, "a stationary target law is required; the plain pushforward is not");
}

}  // namespace detail

/// P_Y(g(Omega_X)): coordinate 0 ends a codeword and `depth` codewords on
/// each side parse. hi(depth) is non-increasing; codes whose separator-led
/// words are all in the image under the model collapse the bracket.
inline Bracket boundary_prob(const FinitaryCode& code, const ProcessModel& model_y, std::size_t depth) {
  detail::require_exact_class(code);
  detail::require_stationary(model_y);
  Bracket out{0, 0, depth, true, 0};
  for (const auto& [w, ch] : model_y.chains()) {
    detail::BoundaryParser p(code, ch);
    if (p.separator_prob() <= 0) continue;
    const double hi = p.advance(p.alpha.transpose(), 2 * depth).sum();
    const bool exact = p.complete();
    out.hi += w * hi;
    out.lo += exact ? w * hi : 0.0;
    out.estimate += w * hi;
    out.exact = out.exact && exact;
  }
  return out;
}

/// P(Y_0 = c) weighted over components; upper bound for the boundary probability.
inline double separator_prob(const FinitaryCode& code, const ProcessModel& model_y) {
  detail::require_exact_class(code);
  detail::require_stationary(model_y);
  double s = 0;
  for (const auto& [w, ch] : model_y.chains()) s += w * detail::BoundaryParser(code, ch).separator_prob();
  return s;
}

/// P_X(A) = P_Y(g(A)) / P_Y(g(Omega_X)) for A = (1, a_1..a_k), applied per
/// ergodic component of model_y and averaged with the component weights.
inline Bracket inverse(const FinitaryCode& code, const ProcessModel& model_y, const CylinderEvent& a, std::size_t depth) {
  detail::require_exact_class(code);
  detail::require_stationary(model_y);
  if (a.start != 1) throw Error(ErrorKind::non_canonical_cylinder, "inverse transport expects a source cylinder at 1, got " + render(a));
  std::vector<Word> words;
  for (auto x : a.word) words.push_back(code.codeword(x));
  double value = 0;
  bool exact = true;
  for (const auto& [w, ch] : model_y.chains()) {
    detail::BoundaryParser p(code, ch);
    Eigen::RowVectorXd r = p.advance(p.alpha.transpose(), depth);
    const double den = p.advance(r, depth).sum();
    if (!(den > 0))
      throw Error(ErrorKind::zero_boundary, "a component of the target law gives the code image probability 0");
    for (const auto& v : words) r = (r * p.word_matrix(v)).eval();
    value += w * p.advance(r, depth).sum() / den;
    exact = exact && p.complete();
  }
  if (exact) return {value, value, depth, true, value};
  return {0.0, 1.0, depth, false, value};
}

/// |E[L] P_Y(g(Omega_X)) - 1|, worst case over ergodic components, with the
/// boundary probability taken from the transported chain.
inline double normalization_residual(const FinitaryCode& code, const ProcessModel& model_x, std::size_t depth = 8) {
  double worst = 0;
  for (auto [w, comp] : model_x.ergodic_components()) {
    const double el = expected_quasi_period(code, *comp);
    const auto br = boundary_prob(code, transported(code, *comp), depth);
    worst = std::max(worst, std::abs(el * br.hi - 1));
  }
  return worst;
}

/// Cesaro means (1/n) sum_{i<n} P_Y(T^{-i} c) of a pushforward at every n in
/// `ns` (ascending), in a single pass.
inline std::vector<double> cesaro_means(const ProcessModel& model_y, const CylinderEvent& c, std::vector<std::size_t> ns,
                                        std::uint64_t budget = kDefaultBudget) {
  if (model_y.variant() != ProcessModel::Variant::pushforward)
    throw Error(ErrorKind::invalid_model, "Cesaro means are taken of the plain pushforward");
  if (ns.empty() || !std::is_sorted(ns.begin(), ns.end()) || ns.front() < 1)
    throw Error(ErrorKind::invalid_argument, "n values must be ascending and >= 1");
  CylinderEngine engine(model_y, budget);
  std::vector<double> out;
  double sum = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; next < ns.size(); ++i) {
    sum += engine.prob(shift_event(c, static_cast<Coord>(i)));
    while (next < ns.size() && ns[next] == i + 1) out.push_back(sum / static_cast<double>(ns[next++]));
  }
  return out;
}

inline double cesaro_mean(const ProcessModel& model_y, const CylinderEvent& c, std::size_t n,
                          std::uint64_t budget = kDefaultBudget) {
  return cesaro_means(model_y, c, {n}, budget).front();
}

struct DecompositionReport {
  double mixture_value = 0;   ///< forward() on the mixture, routed per component
  double component_sum = 0;   ///< sum_i w_i forward(component_i), computed separately
  double chain_value = 0;     ///< cylinder probability of the transported mixture
  double pooled_ratio = 0;    ///< E[G] / E[L] over the pooled mixture
  double difference = 0;      ///< mixture_value - pooled_ratio
  std::vector<ComponentResult> components;
};

inline DecompositionReport decomposition_check(const FinitaryCode& code, const ProcessModel& mixture_x, const CylinderEvent& b,
                                               std::uint64_t budget = kDefaultBudget) {
  if (mixture_x.variant() != ProcessModel::Variant::mixture)
    throw Error(ErrorKind::invalid_model, "decomposition check expects a mixture");
  DecompositionReport r;
  const auto mixed = forward(code, mixture_x, b, budget);
  r.mixture_value = mixed.value;
  r.components = mixed.components;
  double g = 0, l = 0;
  for (std::size_t i = 0; i < mixture_x.components().size(); ++i) {
    const auto part = forward(code, mixture_x.components()[i], b, budget);
    r.component_sum += mixture_x.weights()[i] * part.value;
    g += mixture_x.weights()[i] * part.numerator;
    l += mixture_x.weights()[i] * part.denominator;
  }
  r.pooled_ratio = g / l;
  r.chain_value = cylinder_prob(transported(code, mixture_x), b, budget);
  r.difference = r.mixture_value - r.pooled_ratio;
  return r;
}

}  // namespace normtrans

#endif  // NORMTRANS_TRANSPORT_HPP
