#ifndef NORMTRANS_CHAIN_HPP
#define NORMTRANS_CHAIN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "normtrans/codes.hpp"
#include "normtrans/core.hpp"

namespace normtrans {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kExactTol = 1e-12;

namespace detail {

inline void check_stochastic(const Matrix& k, const char* what) {
  if (k.rows() == 0 || k.rows() != k.cols()) throw Error(ErrorKind::invalid_model, std::string(what) + " must be square and nonempty");
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    double s = 0;
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      if (!(k(i, j) >= 0) || !std::isfinite(k(i, j)))
        throw Error(ErrorKind::invalid_model, std::string(what) + " has a negative or non-finite entry");
      s += k(i, j);
    }
    if (std::abs(s - 1) > kExactTol)
      throw Error(ErrorKind::invalid_model, std::string(what) + " row " + std::to_string(i) + " sums to " + std::to_string(s));
  }
}

inline std::vector<bool> reach(const Matrix& k, Eigen::Index from, bool transpose) {
  const auto n = k.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> stack{from};
  seen[static_cast<std::size_t>(from)] = true;
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = transpose ? k(j, i) : k(i, j);
      if (w > 0 && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

}  // namespace detail

inline bool is_irreducible(const Matrix& k) {
  auto all = [](const std::vector<bool>& v) { return std::all_of(v.begin(), v.end(), [](bool b) { return b; }); };
  return all(detail::reach(k, 0, false)) && all(detail::reach(k, 0, true));
}

/// Unique pi with pi K = pi and sum pi = 1 for an irreducible stochastic K.
inline Vector stationary_distribution(const Matrix& k) {
  detail::check_stochastic(k, "transition matrix");
  if (!is_irreducible(k)) throw Error(ErrorKind::not_irreducible, "transition matrix is not irreducible");
  const auto n = k.rows();
  Matrix a = k.transpose() - Matrix::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1;
  Vector pi = a.fullPivLu().solve(b);
  // One step of iterative refinement keeps the residual at rounding level.
  Vector r = b - a * pi;
  pi += a.fullPivLu().solve(r);
  for (Eigen::Index i = 0; i < n; ++i) pi(i) = std::max(pi(i), 0.0);
  pi /= pi.sum();
  return pi;
}

/// Stationary first-order law over an explicit state list; IID is the
/// special case with identical rows. Zero-mass states are allowed only for
/// IID laws and are pruned by the chain builders.
struct MarkovLaw {
  std::vector<SymbolId> states;
  Matrix K;
  Vector pi;

  std::size_t index_of(SymbolId s) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i] == s) return i;
    throw Error(ErrorKind::unknown_symbol, "state " + std::to_string(s) + " not in support");
  }

  /// Time reversal: Kr(x, x') = pi(x') K(x', x) / pi(x); zero rows where pi(x) = 0.
  Matrix reversed() const {
    const auto n = K.rows();
    Matrix r = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pi(i) <= 0) continue;
      for (Eigen::Index j = 0; j < n; ++j) r(i, j) = pi(j) * K(j, i) / pi(i);
      r.row(i) /= r.row(i).sum();
    }
    return r;
  }
};

/// Two-sided hidden Markov representation used for every exact computation.
///
/// Hidden state H_i emits y_i = emit[H_i]. The path from coordinate 0 forward
/// moves with Q, backward with Qb, and the two sides are independent given
/// H_0 ~ nu0. For stationary chains nu0 is invariant and Qb is the reversal of
/// Q; the plain pushforward is not stationary but shares Q and Qb.
struct EmissionChain {
  std::vector<SymbolId> emit;
  Matrix Q;
  Matrix Qb;
  Vector nu0;
  bool stationary = true;

  Eigen::Index size() const noexcept { return Q.rows(); }

  Vector mask(SymbolId a) const {
    Vector m(size());
    for (Eigen::Index h = 0; h < size(); ++h) m(h) = emit[static_cast<std::size_t>(h)] == a ? 1.0 : 0.0;
    return m;
  }

  Vector mask_not(SymbolId a) const { return Vector::Ones(size()) - mask(a); }
};

inline EmissionChain observed_chain(const MarkovLaw& law, const std::function<SymbolId(SymbolId)>& emission) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < law.pi.size(); ++i)
    if (law.pi(i) > 0) keep.push_back(i);
  const auto n = static_cast<Eigen::Index>(keep.size());
  const Matrix rev = law.reversed();
  EmissionChain ch;
  ch.Q.resize(n, n);
  ch.Qb.resize(n, n);
  ch.nu0.resize(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    ch.emit.push_back(emission(law.states[static_cast<std::size_t>(keep[a])]));
    ch.nu0(a) = law.pi(keep[a]);
    for (Eigen::Index b = 0; b < n; ++b) {
      ch.Q(a, b) = law.K(keep[a], keep[b]);
      ch.Qb(a, b) = rev(keep[a], keep[b]);
    }
  }
  return ch;
}

/// Hidden states (x, l): position l inside the codeword f(x).
struct CodedStates {
  std::vector<std::pair<SymbolId, std::size_t>> states;
  std::vector<Eigen::Index> last_of;  ///< per kept source symbol
};

/// Chain of the code extension driven by `law`. With `normalized` the
/// hidden state is uniform over codeword positions (the normalized
/// transport); otherwise coordinate 0 is a codeword end (plain pushforward).
inline EmissionChain coded_chain(const FinitaryCode& code, const MarkovLaw& law, bool normalized) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < law.pi.size(); ++i)
    if (law.pi(i) > 0) keep.push_back(i);
  std::vector<Eigen::Index> first(keep.size()), last(keep.size());
  std::vector<std::pair<std::size_t, std::size_t>> hidden;  // (kept index, l)
  for (std::size_t a = 0; a < keep.size(); ++a) {
    const auto& w = code.codeword(law.states[static_cast<std::size_t>(keep[a])]);
    first[a] = static_cast<Eigen::Index>(hidden.size());
    for (std::size_t l = 0; l < w.size(); ++l) hidden.emplace_back(a, l);
    last[a] = static_cast<Eigen::Index>(hidden.size()) - 1;
  }
  const auto n = static_cast<Eigen::Index>(hidden.size());
  const Matrix rev = law.reversed();
  double mean_len = 0;
  for (std::size_t a = 0; a < keep.size(); ++a)
    mean_len += law.pi(keep[a]) * static_cast<double>(last[a] - first[a] + 1);

  EmissionChain ch;
  ch.Q = Matrix::Zero(n, n);
  ch.Qb = Matrix::Zero(n, n);
  ch.nu0 = Vector::Zero(n);
  ch.stationary = normalized;
  for (Eigen::Index h = 0; h < n; ++h) {
    const auto [a, l] = hidden[static_cast<std::size_t>(h)];
    const auto x = law.states[static_cast<std::size_t>(keep[a])];
    ch.emit.push_back(code.codeword(x)[l]);
    if (h < last[a]) {
      ch.Q(h, h + 1) = 1;
    } else {
      for (std::size_t b = 0; b < keep.size(); ++b) ch.Q(h, first[b]) = law.K(keep[a], keep[b]);
    }
    if (h > first[a]) {
      ch.Qb(h, h - 1) = 1;
    } else {
      for (std::size_t b = 0; b < keep.size(); ++b) ch.Qb(h, last[b]) = rev(keep[a], keep[b]);
    }
    if (normalized) ch.nu0(h) = law.pi(keep[a]) / mean_len;
    else if (h == last[a]) ch.nu0(h) = law.pi(keep[a]);
  }
  return ch;
}

/// Exact cylinder probabilities on one chain, caching the one-sided
/// marginals so that long runs of shifted cylinders stay linear in the shift.
class ChainEvaluator {
 public:
  explicit ChainEvaluator(const EmissionChain& ch) : ch_(ch) {
    forward_.push_back(ch.nu0);
    backward_.push_back(ch.nu0);
  }

  double prob(Coord start, const Word& w) {
    const Coord end = start + static_cast<Coord>(w.size()) - 1;
    if (ch_.stationary || start >= 1) return run_forward(marginal(start), w, 0, w.size());
    if (end <= 0) return run_backward(marginal(end), w);
    // The window straddles the origin: condition on H_0.
    const auto zero = static_cast<std::size_t>(-start);
    Vector right = Vector::Ones(ch_.size());
    for (std::size_t i = w.size(); i-- > zero + 1;) right = ch_.Q * right.cwiseProduct(ch_.mask(w[i])).eval();
    Vector left = Vector::Ones(ch_.size());
    for (std::size_t i = 0; i < zero; ++i) left = ch_.Qb * left.cwiseProduct(ch_.mask(w[i])).eval();
    return ch_.nu0.cwiseProduct(ch_.mask(w[zero])).cwiseProduct(left).cwiseProduct(right).sum();
  }

  /// Law of H_t.
  const Vector& marginal(Coord t) {
    if (ch_.stationary) return ch_.nu0;
    auto& cache = t >= 0 ? forward_ : backward_;
    const Matrix& step = t >= 0 ? ch_.Q : ch_.Qb;
    const auto k = static_cast<std::size_t>(t >= 0 ? t : -t);
    while (cache.size() <= k) cache.push_back((cache.back().transpose() * step).transpose());
    return cache[k];
  }

 private:
  double run_forward(const Vector& nu, const Word& w, std::size_t from, std::size_t to) const {
    Vector v = nu.cwiseProduct(ch_.mask(w[from]));
    for (std::size_t i = from + 1; i < to; ++i) v = (v.transpose() * ch_.Q).transpose().cwiseProduct(ch_.mask(w[i]));
    return v.sum();
  }

  double run_backward(const Vector& nu, const Word& w) const {
    Vector v = nu.cwiseProduct(ch_.mask(w.back()));
    for (std::size_t i = w.size() - 1; i-- > 0;) v = (v.transpose() * ch_.Qb).transpose().cwiseProduct(ch_.mask(w[i]));
    return v.sum();
  }

  const EmissionChain& ch_;
  std::vector<Vector> forward_, backward_;
};

}  // namespace normtrans

#endif  // NORMTRANS_CHAIN_HPP
