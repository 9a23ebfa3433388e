#ifndef NORMTRANS_RECURRENCE_HPP
#define NORMTRANS_RECURRENCE_HPP

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "normtrans/chain.hpp"
#include "normtrans/codes.hpp"
#include "normtrans/measures.hpp"
#include "normtrans/parse.hpp"
#include "normtrans/rng.hpp"
#include "normtrans/transport.hpp"

namespace normtrans {

/// Event C: either "coordinate 0 lies in a state set" or a cylinder event.
struct EventSet {
  std::vector<SymbolId> states;
  std::optional<CylinderEvent> cylinder;

  static EventSet of_states(std::vector<SymbolId> s) {
    if (s.empty()) throw Error(ErrorKind::invalid_argument, "event state set is empty");
    return {std::move(s), std::nullopt};
  }
  static EventSet of_cylinder(CylinderEvent c) { return {{}, std::move(c)}; }

  Coord first() const noexcept { return cylinder ? cylinder->start : 0; }
  Coord last() const noexcept { return cylinder ? cylinder->end() : 0; }

  bool decidable(const Window& path, Coord i) const { return path.covers(first() + i, last() + i); }

  /// T^i path in C.
  bool contains(const Window& path, Coord i) const {
    if (cylinder) return matches(path, shift_event(*cylinder, i));
    if (!decidable(path, i)) throw Error(ErrorKind::range_not_covered, "coordinate " + std::to_string(i) + " outside path");
    return std::find(states.begin(), states.end(), path.at(i)) != states.end();
  }

  std::string describe(const Alphabet* a = nullptr) const {
    if (cylinder) return render(*cylinder, a);
    return "{" + render_word(states, a) + "}";
  }
};

/// Visit positions R_k; R_0 = 0 is present iff the anchor lies in C.
struct RecurrenceTrace {
  bool anchor_in_c = false;
  std::vector<Coord> positions;  ///< ascending: past visits, optional 0, future visits

  std::int64_t k_min() const {
    return -static_cast<std::int64_t>(std::count_if(positions.begin(), positions.end(), [](Coord p) { return p < 0; }));
  }
  std::int64_t k_max() const {
    return static_cast<std::int64_t>(std::count_if(positions.begin(), positions.end(), [](Coord p) { return p > 0; }));
  }

  /// R_k for k in [k_min, k_max]; k = 0 only when anchored.
  Coord at(std::int64_t k) const {
    if (k == 0 && !anchor_in_c) throw Error(ErrorKind::invalid_argument, "R_0 is undefined without an anchored visit");
    if (k < k_min() || k > k_max()) throw Error(ErrorKind::insufficient_visits, "R_" + std::to_string(k) + " not in trace");
    const auto past = static_cast<std::int64_t>(-k_min());
    const auto zero = anchor_in_c ? 1 : 0;
    const auto idx = k < 0 ? past + k : past + zero + k - 1;
    return positions[static_cast<std::size_t>(idx)];
  }

  std::vector<Coord> gaps() const {
    std::vector<Coord> g;
    for (std::size_t i = 1; i < positions.size(); ++i) g.push_back(positions[i] - positions[i - 1]);
    return g;
  }
};

class InsufficientVisits : public Error {
 public:
  InsufficientVisits(RecurrenceTrace partial, std::size_t wanted)
      : Error(ErrorKind::insufficient_visits, "found " + std::to_string(partial.k_max()) + " of " +
                                                  std::to_string(wanted) + " visits after 0"),
        partial_(std::move(partial)) {}
  const RecurrenceTrace& partial() const noexcept { return partial_; }

 private:
  RecurrenceTrace partial_;
};

/// First `max_k` visits after 0 (required) and up to `max_k` before 0.
inline RecurrenceTrace recurrence_times(const Window& path, const EventSet& c, std::size_t max_k) {
  RecurrenceTrace t;
  std::vector<Coord> past;
  for (Coord i = -1; past.size() < max_k && c.decidable(path, i); --i)
    if (c.contains(path, i)) past.push_back(i);
  t.positions.assign(past.rbegin(), past.rend());
  t.anchor_in_c = c.decidable(path, 0) && c.contains(path, 0);
  if (t.anchor_in_c) t.positions.push_back(0);
  std::size_t found = 0;
  for (Coord i = 1; found < max_k && c.decidable(path, i); ++i)
    if (c.contains(path, i)) {
      t.positions.push_back(i);
      ++found;
    }
  if (found < max_k) throw InsufficientVisits(std::move(t), max_k);
  return t;
}

inline RecurrenceTrace recurrence_times(const PathSample& path, const EventSet& c, std::size_t max_k) {
  return recurrence_times(path.window, c, max_k);
}

// ---------------------------------------------------------------------------
// Exact return-time laws

/// First-order chain whose state at time i decides T^i y in C. State-set
/// events use the model's own law; a cylinder of length m uses the chain of
/// m-blocks starting at the cylinder's offset.
struct ReturnProblem {
  MarkovLaw law;
  std::vector<bool> in_c;
  std::vector<Word> blocks;  ///< symbol content per state

  ReturnProblem(const ProcessModel& model, const EventSet& c) {
    const auto& base = model.law();
    if (!c.cylinder) {
      law = base;
      for (auto s : base.states) {
        in_c.push_back(std::find(c.states.begin(), c.states.end(), s) != c.states.end());
        blocks.push_back({s});
      }
      for (auto s : c.states) base.index_of(s);
    } else {
      const auto m = c.cylinder->word.size();
      for (auto s : c.cylinder->word) base.index_of(s);
      std::vector<std::vector<std::size_t>> idx;
      std::vector<double> mass;
      std::function<void(std::vector<std::size_t>&, double)> grow = [&](std::vector<std::size_t>& cur, double p) {
        if (cur.size() == m) {
          idx.push_back(cur);
          mass.push_back(p);
          return;
        }
        for (std::size_t b = 0; b < base.states.size(); ++b) {
          const double q = cur.empty() ? base.pi(static_cast<Eigen::Index>(b))
                                       : p * base.K(static_cast<Eigen::Index>(cur.back()), static_cast<Eigen::Index>(b));
          if (q <= 0) continue;
          cur.push_back(b);
          grow(cur, q);
          cur.pop_back();
        }
      };
      std::vector<std::size_t> cur;
      grow(cur, 1.0);
      const auto n = static_cast<Eigen::Index>(idx.size());
      law.K = Matrix::Zero(n, n);
      law.pi.resize(n);
      std::map<std::vector<std::size_t>, Eigen::Index> where;
      for (Eigen::Index i = 0; i < n; ++i) where[idx[static_cast<std::size_t>(i)]] = i;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& blk = idx[static_cast<std::size_t>(i)];
        law.states.push_back(i);
        law.pi(i) = mass[static_cast<std::size_t>(i)];
        Word w;
        for (auto b : blk) w.push_back(base.states[b]);
        in_c.push_back(w == c.cylinder->word);
        blocks.push_back(std::move(w));
        for (std::size_t b = 0; b < base.states.size(); ++b) {
          std::vector<std::size_t> nxt(blk.begin() + 1, blk.end());
          nxt.push_back(b);
          if (auto it = where.find(nxt); it != where.end())
            law.K(i, it->second) = base.K(static_cast<Eigen::Index>(blk.back()), static_cast<Eigen::Index>(b));
        }
      }
    }
    for (std::size_t i = 0; i < in_c.size(); ++i) (in_c[i] ? cset : nset).push_back(static_cast<Eigen::Index>(i));
    p_c = 0;
    for (auto i : cset) p_c += law.pi(i);
    if (!(p_c > 0)) throw Error(ErrorKind::invalid_argument, "the event has probability 0");
    start = Eigen::RowVectorXd(static_cast<Eigen::Index>(cset.size()));
    for (std::size_t a = 0; a < cset.size(); ++a) start(static_cast<Eigen::Index>(a)) = law.pi(cset[a]) / p_c;
    kcc = sub(cset, cset);
    kcn = sub(cset, nset);
    knn = sub(nset, nset);
    knc = sub(nset, cset);
  }

  Matrix sub(const std::vector<Eigen::Index>& r, const std::vector<Eigen::Index>& c) const {
    Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = law.K(r[i], c[j]);
    return m;
  }

  /// row * Q_r, with Q_1 = K_CC and Q_r = K_CN K_NN^{r-2} K_NC.
  Eigen::RowVectorXd step(const Eigen::RowVectorXd& row, std::int64_t r) const {
    if (r < 1) throw Error(ErrorKind::invalid_argument, "gaps must be >= 1");
    if (r == 1) return row * kcc;
    if (nset.empty()) return Eigen::RowVectorXd::Zero(row.size());
    Eigen::RowVectorXd v = row * kcn;
    for (std::int64_t k = 0; k < r - 2; ++k) v = (v * knn).eval();
    return v * knc;
  }

  double prob_c() const noexcept { return p_c; }

  std::vector<Eigen::Index> cset, nset;
  double p_c = 0;
  Eigen::RowVectorXd start;
  Matrix kcc, kcn, knn, knc;
};

/// E[R_1 | C] by first-passage solves.
inline double kac_expected_return(const ProcessModel& model, const EventSet& c) {
  ReturnProblem rp(model, c);
  if (rp.nset.empty()) return 1.0;
  const auto n = static_cast<Eigen::Index>(rp.nset.size());
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(n, n) - rp.knn);
  if (!lu.isInvertible()) throw Error(ErrorKind::not_irreducible, "C is not reachable from every state");
  const Vector h = lu.solve(Vector::Ones(n));
  return (rp.start * (Vector::Ones(static_cast<Eigen::Index>(rp.cset.size())) + rp.kcn * h)).value();
}

inline double event_prob(const ProcessModel& model, const EventSet& c) { return ReturnProblem(model, c).prob_c(); }

/// P(R_1 = r_1, R_2 - R_1 = r_2, ... | C).
inline double recurrence_joint_law(const ProcessModel& model, const EventSet& c, const std::vector<std::int64_t>& gaps) {
  if (gaps.empty()) throw Error(ErrorKind::invalid_argument, "need at least one gap");
  ReturnProblem rp(model, c);
  Eigen::RowVectorXd row = rp.start;
  for (auto r : gaps) row = rp.step(row, r);
  return row.sum();
}

/// Law of R_1 under P(.|C), truncated where the tail drops below `eps`.
struct GapLaw {
  std::vector<double> p;  ///< p[r-1] = P(R_1 = r | C)
  double tail = 0;        ///< P(R_1 > r_max | C)
  double contraction = 0; ///< last ratio of successive tails
  std::size_t r_max() const noexcept { return p.size(); }
  double at(std::int64_t r) const { return r >= 1 && static_cast<std::size_t>(r) <= p.size() ? p[static_cast<std::size_t>(r - 1)] : 0.0; }

  double mean(double cap = INFINITY) const {
    double m = 0;
    for (std::size_t i = 0; i < p.size(); ++i) m += p[i] * std::min(static_cast<double>(i + 1), cap);
    return m;
  }
  double variance(double cap = INFINITY) const {
    double m2 = 0;
    for (std::size_t i = 0; i < p.size(); ++i) m2 += p[i] * std::pow(std::min(static_cast<double>(i + 1), cap), 2);
    const double m = mean(cap);
    return m2 - m * m;
  }
};

inline GapLaw gap_law(const ProcessModel& model, const EventSet& c, double eps = 1e-12, std::size_t hard_cap = 1'000'000) {
  ReturnProblem rp(model, c);
  GapLaw g;
  g.p.push_back(rp.step(rp.start, 1).sum());
  if (rp.nset.empty()) return g;
  Eigen::RowVectorXd v = rp.start * rp.kcn;  // mass outside C after one step, not yet returned
  double prev = v.sum();
  g.tail = prev;
  while (g.tail >= eps) {
    if (g.p.size() >= hard_cap) throw Error(ErrorKind::not_irreducible, "return-time tail does not decay");
    g.p.push_back((v * rp.knc).sum());
    v = (v * rp.knn).eval();
    g.tail = v.sum();
    g.contraction = prev > 0 ? g.tail / prev : 0;
    prev = g.tail;
  }
  return g;
}

/// max_r |P(R_2 - R_1 = r | C) - P(R_1 = r | C)| for r <= r_max, with the
/// first gap summed up to the truncation of gap_law.
inline double gap_shift_residual(const ProcessModel& model, const EventSet& c, std::int64_t r_max) {
  ReturnProblem rp(model, c);
  const auto law = gap_law(model, c);
  Eigen::RowVectorXd after = Eigen::RowVectorXd::Zero(rp.start.size());
  for (std::size_t r = 1; r <= law.r_max(); ++r) after += rp.step(rp.start, static_cast<std::int64_t>(r));
  double worst = 0;
  for (std::int64_t r = 1; r <= r_max; ++r)
    worst = std::max(worst, std::abs(rp.step(after, r).sum() - rp.step(rp.start, r).sum()));
  return worst;
}

/// Stationary law of the indicator process 1{T^i y in C} over {0, 1}.
inline ProcessModel indicator_model(const ProcessModel& model, const EventSet& c) {
  ReturnProblem rp(model, c);
  auto ch = observed_chain(rp.law, [&](SymbolId s) { return rp.in_c[static_cast<std::size_t>(rp.law.index_of(s))] ? 1 : 0; });
  return ProcessModel::hidden(Alphabet(AlphabetTag::target, {{0, "0"}, {1, "1"}}), std::move(ch),
                              "indicator(" + model.describe() + "," + c.describe() + ")");
}

struct BridgeRow {
  std::vector<std::int64_t> gaps;
  double bridge = 0;
  double exact = 0;
  double residual = 0;
};

struct BridgeReport {
  std::vector<BridgeRow> rows;
  double max_residual = 0;
  bool exact_brackets = true;
  std::size_t depth = 0;
};

/// Gap law read through the unary code: P_X(S_1 = r_1 - 1, ...) from the
/// normalized inverse transport of the indicator process, against the
/// taboo-kernel law, for every tuple with entries <= r_max and length <= j_max.
inline BridgeReport unary_bridge(const ProcessModel& model, const EventSet& c, std::int64_t r_max, std::size_t j_max,
                                 std::size_t depth = 4) {
  const auto ind = indicator_model(model, c);
  std::vector<SymbolId> support;
  for (std::int64_t r = 1; r <= r_max; ++r) support.push_back(r - 1);
  const auto code = make_unary(support);
  BridgeReport rep;
  rep.depth = depth;
  std::vector<std::int64_t> tuple;
  std::function<void()> walk = [&]() {
    if (!tuple.empty()) {
      Word a;
      for (auto r : tuple) a.push_back(r - 1);
      const auto br = inverse(code, ind, CylinderEvent(AlphabetTag::source, 1, a), depth);
      BridgeRow row{tuple, br.estimate, recurrence_joint_law(model, c, tuple), 0};
      row.residual = std::abs(row.bridge - row.exact);
      rep.max_residual = std::max(rep.max_residual, row.residual);
      rep.exact_brackets = rep.exact_brackets && br.exact;
      rep.rows.push_back(std::move(row));
    }
    if (tuple.size() == j_max) return;
    for (std::int64_t r = 1; r <= r_max; ++r) {
      tuple.push_back(r);
      walk();
      tuple.pop_back();
    }
  };
  walk();
  return rep;
}

// ---------------------------------------------------------------------------
// Simulation and diagnostics

/// Trace of a path started inside C (R_0 = 0) with `max_k` later visits; the
/// gaps then follow the law of the recurrence process under P(.|C).
inline RecurrenceTrace simulate_trace(const ProcessModel& model, const EventSet& c, std::size_t max_k, std::uint64_t seed) {
  ReturnProblem rp(model, c);
  Rng rng(seed);
  std::vector<double> start(rp.law.states.size(), 0.0);
  for (auto i : rp.cset) start[static_cast<std::size_t>(i)] = rp.law.pi(i);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < rp.law.K.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(rp.law.K.cols()));
    for (Eigen::Index j = 0; j < rp.law.K.cols(); ++j) r[static_cast<std::size_t>(j)] = rp.law.K(i, j);
    rows.push_back(cumulative(r));
  }
  RecurrenceTrace t{true, {0}};
  t.positions.reserve(max_k + 1);
  auto s = rng.categorical(cumulative(start));
  for (Coord i = 1; t.positions.size() <= max_k; ++i) {
    s = rng.categorical(rows[s]);
    if (rp.in_c[s]) t.positions.push_back(i);
  }
  return t;
}

struct GapStationarity {
  std::size_t block_len = 1;
  std::size_t blocks_offset0 = 0;
  std::size_t blocks_offset1 = 0;
  double tv = 0;  ///< between empirical block laws at offsets 0 and 1
};

namespace detail {

inline std::map<std::vector<Coord>, double> block_histogram(const std::vector<Coord>& g, std::size_t off, std::size_t len,
                                                            std::size_t& count) {
  std::map<std::vector<Coord>, double> h;
  count = 0;
  for (std::size_t k = off; k + len <= g.size(); k += len, ++count)
    h[std::vector<Coord>(g.begin() + static_cast<std::ptrdiff_t>(k), g.begin() + static_cast<std::ptrdiff_t>(k + len))] += 1;
  for (auto& [_, v] : h) v /= static_cast<double>(count);
  return h;
}

}  // namespace detail

inline GapStationarity gap_stationarity_report(const RecurrenceTrace& trace, std::size_t block_len) {
  if (block_len == 0) throw Error(ErrorKind::invalid_argument, "block length must be >= 1");
  const auto g = trace.gaps();
  if (g.size() < 10 * block_len)
    throw Error(ErrorKind::insufficient_visits, "need at least " + std::to_string(10 * block_len) + " gaps, have " + std::to_string(g.size()));
  GapStationarity r;
  r.block_len = block_len;
  auto h0 = detail::block_histogram(g, 0, block_len, r.blocks_offset0);
  auto h1 = detail::block_histogram(g, 1, block_len, r.blocks_offset1);
  double s = 0;
  for (const auto& [k, v] : h0) s += std::abs(v - (h1.count(k) ? h1[k] : 0.0));
  for (const auto& [k, v] : h1)
    if (!h0.count(k)) s += v;
  r.tv = s / 2;
  return r;
}

/// Total variation between the empirical law of single gaps and the exact law.
inline double gap_tv_to_exact(const RecurrenceTrace& trace, const GapLaw& law) {
  std::size_t n = 0;
  auto h = detail::block_histogram(trace.gaps(), 0, 1, n);
  double s = 0, covered = 0;
  for (const auto& [k, v] : h) {
    const double p = law.at(k.front());
    s += std::abs(v - p);
    covered += p;
  }
  return (s + std::max(0.0, 1.0 - covered)) / 2;
}

struct SeedRun {
  std::uint64_t seed = 0;
  std::size_t gaps = 0;
  double mean_gap = 0;
  double capped_mean = 0;
  double tv_to_exact = 0;
};

struct ErgodicityReport {
  double exact_mean = 0;         ///< E[R | C]
  double exact_capped_mean = 0;  ///< E[min(R, cap) | C]
  double cap = 10;
  bool renewal = false;          ///< gaps independent (C is a single state)
  std::vector<SeedRun> runs;
  double max_pair_z = 0;         ///< worst |difference| / sigma between seeds
  double max_kac_z = 0;          ///< worst |mean gap - E[R|C]| / sigma
};

namespace detail {

/// Standard error of a mean of capped gaps: exact for renewal events,
/// otherwise from 100 batch means.
inline double mean_sigma(const std::vector<Coord>& g, double cap, bool renewal, double exact_var) {
  const auto n = static_cast<double>(g.size());
  if (renewal) return std::sqrt(exact_var / n);
  const std::size_t batches = 100, size = g.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0;
    for (std::size_t i = b * size; i < (b + 1) * size; ++i) s += std::min(static_cast<double>(g[i]), cap);
    means.push_back(s / static_cast<double>(size));
  }
  double m = 0, v = 0;
  for (double x : means) m += x / batches;
  for (double x : means) v += (x - m) * (x - m) / (batches - 1);
  return std::sqrt(v / batches);
}

}  // namespace detail

inline ErgodicityReport ergodicity_diagnostic(const ProcessModel& model, const EventSet& c, const std::vector<std::uint64_t>& seeds,
                                              std::size_t n_gaps, double cap = 10) {
  const auto law = gap_law(model, c);
  const ReturnProblem rp(model, c);
  ErgodicityReport rep;
  rep.cap = cap;
  rep.exact_mean = kac_expected_return(model, c);
  rep.exact_capped_mean = law.mean(cap);
  rep.renewal = rp.cset.size() == 1;
  std::vector<double> sig_capped, sig_raw;
  for (auto seed : seeds) {
    const auto t = simulate_trace(model, c, n_gaps, seed);
    const auto g = t.gaps();
    SeedRun run{seed, g.size(), 0, 0, gap_tv_to_exact(t, law)};
    for (auto x : g) {
      run.mean_gap += static_cast<double>(x) / static_cast<double>(g.size());
      run.capped_mean += std::min(static_cast<double>(x), cap) / static_cast<double>(g.size());
    }
    sig_capped.push_back(detail::mean_sigma(g, cap, rep.renewal, law.variance(cap)));
    sig_raw.push_back(detail::mean_sigma(g, INFINITY, rep.renewal, law.variance()));
    rep.max_kac_z = std::max(rep.max_kac_z, std::abs(run.mean_gap - rep.exact_mean) / sig_raw.back());
    rep.runs.push_back(run);
  }
  for (std::size_t a = 0; a < rep.runs.size(); ++a)
    for (std::size_t b = a + 1; b < rep.runs.size(); ++b) {
      const double s = std::hypot(sig_capped[a], sig_capped[b]);
      rep.max_pair_z = std::max(rep.max_pair_z, std::abs(rep.runs[a].capped_mean - rep.runs[b].capped_mean) / s);
    }
  return rep;
}

/// Plain-text trace: '#' header lines, then one visit position per line.
inline void write_trace(std::ostream& os, const RecurrenceTrace& t, const std::string& model_digest, const std::string& event,
                        std::uint64_t seed) {
  os << "# model " << model_digest << "\n# event " << event << "\n# seed " << seed << "\n# anchor_in_c "
     << (t.anchor_in_c ? 1 : 0) << "\n";
  for (auto p : t.positions) os << p << "\n";
}

}  // namespace normtrans

#endif  // NORMTRANS_RECURRENCE_HPP
