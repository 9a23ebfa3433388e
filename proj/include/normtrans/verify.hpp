#ifndef NORMTRANS_VERIFY_HPP
#define NORMTRANS_VERIFY_HPP

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "normtrans/codes.hpp"
#include "normtrans/measures.hpp"
#include "normtrans/parse.hpp"
#include "normtrans/recurrence.hpp"
#include "normtrans/transport.hpp"

namespace normtrans {

struct Tolerances {
  double exact = 1e-12;
  double bracket = 1e-9;
  double sigmas = 4;
  double cesaro_final = 1e-2;
  double tv = 0.01;
  double decomposition_gap = 0.01;
};

struct CaseResult {
  std::string key;
  std::string inputs;  ///< digest of the case inputs
  std::string expected;
  std::string got;
  std::optional<double> residual;
  std::optional<double> tolerance;
  bool pass = false;
};

struct SuiteReport {
  std::string name;
  Tolerances tolerances;
  std::vector<CaseResult> cases;
  bool pass = true;
  double wall_seconds = 0;  ///< informational; kept out of serialized reports

  void add(CaseResult c) {
    pass = pass && c.pass;
    cases.push_back(std::move(c));
  }

  /// Numeric case: pass iff |got - expected| <= tol.
  void close(std::string key, const std::string& inputs, double expected, double got, double tol) {
    const double r = std::abs(got - expected);
    add({std::move(key), digest_hex(inputs), detail::fmt(expected), detail::fmt(got), r, tol, r <= tol});
  }

  /// Bound case: pass iff got <= bound.
  void at_most(std::string key, const std::string& inputs, double got, double bound) {
    add({std::move(key), digest_hex(inputs), "<= " + detail::fmt(bound), detail::fmt(got), got, bound, got <= bound});
  }

  void at_least(std::string key, const std::string& inputs, double got, double bound) {
    add({std::move(key), digest_hex(inputs), ">= " + detail::fmt(bound), detail::fmt(got), got, bound, got >= bound});
  }

  void flag(std::string key, const std::string& inputs, const std::string& expected, const std::string& got) {
    add({std::move(key), digest_hex(inputs), expected, got, std::nullopt, std::nullopt, expected == got});
  }

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(), [](const CaseResult& c) { return !c.pass; }));
  }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline std::vector<Word> all_words(const std::vector<SymbolId>& alphabet, std::size_t max_len) {
  std::vector<Word> out, layer{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const auto& w : layer)
      for (auto s : alphabet) {
        auto v = w;
        v.push_back(s);
        next.push_back(v);
      }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

inline std::vector<SymbolId> positive_support(const ProcessModel& m) {
  std::vector<SymbolId> out;
  for (auto [w, comp] : m.ergodic_components())
    for (std::size_t i = 0; i < comp->law().states.size(); ++i)
      if (comp->law().pi(static_cast<Eigen::Index>(i)) > 0 &&
          std::find(out.begin(), out.end(), comp->law().states[i]) == out.end())
        out.push_back(comp->law().states[i]);
  std::sort(out.begin(), out.end());
  return out;
}

/// Standard error of the mean of xs from 100 contiguous batch means.
inline double batch_sigma(const std::vector<double>& xs, std::size_t batches = 100) {
  const std::size_t size = xs.size() / batches;
  if (size < 2) throw Error(ErrorKind::window_too_short, "too few samples for batch means");
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0;
    for (std::size_t i = b * size; i < (b + 1) * size; ++i) s += xs[i];
    means.push_back(s / static_cast<double>(size));
  }
  double m = 0, v = 0;
  for (double x : means) m += x / static_cast<double>(batches);
  for (double x : means) v += (x - m) * (x - m) / static_cast<double>(batches - 1);
  return std::sqrt(v / static_cast<double>(batches));
}

inline std::string case_inputs(const FinitaryCode& code, const ProcessModel& m, const std::string& rest) {
  return code.describe() + "|" + m.describe() + "|" + rest;
}

}  // namespace detail

/// Forward transport values agree across shifts of every target cylinder.
inline SuiteReport stationarity_suite(const FinitaryCode& code, const ProcessModel& model_x, std::size_t max_len,
                                      std::size_t max_shift, const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"stationarity", tol, {}, true, 0};
  for (const auto& w : detail::all_words(code.target().ids(), max_len)) {
    const CylinderEvent b(AlphabetTag::target, 1, w);
    const double base = forward(code, model_x, b).value;
    for (std::size_t j = 1; j <= max_shift; ++j) {
      const auto sb = shift_event(b, static_cast<Coord>(j));
      rep.close(render(b, &code.target()) + " vs " + render(sb, &code.target()),
                detail::case_inputs(code, model_x, render(sb)), base, forward(code, model_x, sb).value, tol.exact);
    }
  }
  rep.wall_seconds = sw.seconds();
  return rep;
}

/// The same comparison on the plain pushforward, including the shift to the
/// origin. Expected to fail: this is the negative control.
inline SuiteReport plain_stationarity_suite(const FinitaryCode& code, const ProcessModel& model_x, std::size_t max_len,
                                            std::size_t max_shift, const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"plain_stationarity", tol, {}, true, 0};
  const auto push = ProcessModel::pushforward(code, model_x);
  CylinderEngine engine(push);
  std::vector<Coord> shifts{-1};
  for (std::size_t j = 1; j <= max_shift; ++j) shifts.push_back(static_cast<Coord>(j));
  for (const auto& w : detail::all_words(code.target().ids(), max_len)) {
    const CylinderEvent b(AlphabetTag::target, 1, w);
    const double base = engine.prob(b);
    for (auto j : shifts) {
      const auto sb = shift_event(b, j);
      rep.close(render(b, &code.target()) + " vs " + render(sb, &code.target()), detail::case_inputs(code, push, render(sb)),
                base, engine.prob(sb), tol.exact);
    }
  }
  rep.wall_seconds = sw.seconds();
  return rep;
}

/// Plain-transport stationarity plus the origin witnesses of the pushforward.
/// Fails by design: the shifted comparisons cannot all hold.
inline SuiteReport negative_control_suite(const FinitaryCode& code, const ProcessModel& model_x, std::size_t max_len = 2,
                                          std::size_t max_shift = 3, const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"negative_control", tol, {}, true, 0};
  if (code.has_exact_quasi_period() && code.suffix_len() == 0) {
    const auto push = ProcessModel::pushforward(code, model_x);
    const auto c = *code.separator();
    const CylinderEvent at0(AlphabetTag::target, 0, {c}), at1(AlphabetTag::target, 1, {c});
    rep.close("pushforward " + render(at0, &code.target()), detail::case_inputs(code, push, render(at0)), 1.0,
              cylinder_prob(push, at0), 0.0);
    const auto codewords = code.codewords();
    if (std::none_of(codewords.begin(), codewords.end(), [](const Word& w) { return w.size() == 1; }))
      rep.close("pushforward " + render(at1, &code.target()), detail::case_inputs(code, push, render(at1)), 0.0,
                cylinder_prob(push, at1), 0.0);
  }
  for (auto& c : plain_stationarity_suite(code, model_x, max_len, max_shift, tol).cases) rep.add(std::move(c));
  rep.wall_seconds = sw.seconds();
  return rep;
}

/// inverse(forward(P_X)) against P_X on every source cylinder up to max_len.
inline SuiteReport roundtrip_suite(const FinitaryCode& code, const ProcessModel& model_x, std::size_t depth,
                                   std::size_t max_len = 3, bool require_exact = true, const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"roundtrip", tol, {}, true, 0};
  const auto y = transported(code, model_x);
  CylinderEngine px(model_x);
  double widest = 0;
  for (const auto& w : detail::all_words(detail::positive_support(model_x), max_len)) {
    const CylinderEvent a(AlphabetTag::source, 1, w);
    const auto br = inverse(code, y, a, depth);
    const double expected = px.prob(a);
    const double miss = std::max({0.0, br.lo - expected, expected - br.hi});
    widest = std::max(widest, br.width());
    rep.add({render(a, &code.source()), digest_hex(detail::case_inputs(code, model_x, render(a))), detail::fmt(expected),
             "[" + detail::fmt(br.lo) + ", " + detail::fmt(br.hi) + "]", miss, tol.bracket, miss <= tol.bracket});
  }
  if (require_exact)
    rep.at_most("bracket width at depth " + std::to_string(depth), detail::case_inputs(code, model_x, "width"), widest,
                tol.bracket);
  rep.wall_seconds = sw.seconds();
  return rep;
}

/// Cesaro means of the pushforward approach the forward transport.
inline SuiteReport theorem2_suite(const FinitaryCode& code, const ProcessModel& model_x, const std::vector<std::size_t>& ns,
                                  const std::vector<CylinderEvent>& cylinders, const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"theorem2", tol, {}, true, 0};
  const auto push = ProcessModel::pushforward(code, model_x);
  for (const auto& c : cylinders) {
    const double target = forward(code, model_x, canonicalize(c)).value;
    const auto means = cesaro_means(push, c, ns);
    const auto name = render(c, &code.target());
    const auto inputs = detail::case_inputs(code, model_x, render(c));
    double prev = INFINITY;
    bool decreasing = true;
    std::string gaps;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double gap = std::abs(means[i] - target);
      decreasing = decreasing && (gap < prev || (gap <= tol.exact && prev <= tol.exact));
      prev = gap;
      gaps += (i ? " " : "") + detail::fmt(gap);
    }
    rep.flag(name + " gaps decreasing over n", inputs, "decreasing", decreasing ? "decreasing" : "not decreasing: " + gaps);
    rep.at_most(name + " gap at n=" + std::to_string(ns.back()), inputs, prev, tol.cesaro_final);
  }
  rep.wall_seconds = sw.seconds();
  return rep;
}

struct RecurrenceSuiteParams {
  std::vector<std::uint64_t> seeds{1, 2};
  std::size_t gaps = 100'000;
  std::int64_t r_max = 10;
  std::size_t j_max = 3;
  std::size_t depth = 4;
  double cap = 10;
};

inline SuiteReport recurrence_suite(const ProcessModel& model, const EventSet& c, const RecurrenceSuiteParams& p = {},
                                    const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"recurrence", tol, {}, true, 0};
  const auto inputs = model.describe() + "|" + c.describe();
  const double pc = event_prob(model, c);
  const double kac = kac_expected_return(model, c);
  rep.close("Kac E[R|C] P(C)", inputs, 1.0, kac * pc, tol.bracket);
  const auto law = gap_law(model, c);
  double total = 0;
  for (double x : law.p) total += x;
  rep.close("gap law mass plus tail", inputs, 1.0, total + law.tail, tol.bracket);
  rep.at_most("gap law tail", inputs, law.tail, tol.exact);
  const auto bridge = unary_bridge(model, c, p.r_max, p.j_max, p.depth);
  rep.at_most("unary bridge vs joint law (" + std::to_string(bridge.rows.size()) + " tuples)", inputs, bridge.max_residual,
              tol.bracket);
  rep.flag("unary bridge brackets exact", inputs, "exact", bridge.exact_brackets ? "exact" : "inexact");
  rep.at_most("gap law shift invariance", inputs, gap_shift_residual(model, c, p.r_max), tol.bracket);
  const auto erg = ergodicity_diagnostic(model, c, p.seeds, p.gaps, p.cap);
  for (const auto& run : erg.runs) {
    const auto seed = "seed " + std::to_string(run.seed);
    rep.at_most(seed + " TV to exact gap law", inputs + "|" + seed, run.tv_to_exact, tol.tv);
    const auto tr = simulate_trace(model, c, p.gaps, run.seed);
    rep.at_most(seed + " TV between offsets 0 and 1", inputs + "|" + seed, gap_stationarity_report(tr, 1).tv, tol.tv);
  }
  rep.at_most("Monte Carlo Kac |mean gap - E[R|C]| / sigma", inputs, erg.max_kac_z, tol.sigmas);
  rep.at_most("seed agreement of capped averages / sigma", inputs, erg.max_pair_z, tol.sigmas);
  rep.wall_seconds = sw.seconds();
  return rep;
}

struct CodeExpectation {
  std::string name;
  FinitaryCode code;
  std::optional<bool> self_avoiding;
  std::optional<bool> uniquely_decodable;
  std::optional<Word> ud_witness;
};

inline SuiteReport code_suite(const std::vector<CodeExpectation>& codes, std::size_t depth, const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"codes", tol, {}, true, 0};
  for (const auto& e : codes) {
    const auto inputs = e.code.describe();
    if (e.self_avoiding) {
      const auto v = check_self_avoiding(e.code, depth);
      std::string got = v.pass ? "Pass(" + std::to_string(v.depth) + ")" : "Violation";
      if (v.violation) {
        const auto& w = *v.violation;
        got += " left=[" + render_word(w.left, &e.code.source()) + "] x1=" + e.code.source().render(w.x1) + " right=[" +
               render_word(w.right, &e.code.source()) + "] j=" + std::to_string(w.shift);
        got += replay_violation(e.code, w) ? " replayed" : " replay-failed";
      }
      const std::string want = *e.self_avoiding ? "Pass(" + std::to_string(depth) + ")" : "Violation";
      rep.add({e.name + " self-avoidance", digest_hex(inputs), want, got, std::nullopt, std::nullopt,
               got.rfind(want, 0) == 0 && got.find("replay-failed") == std::string::npos});
    }
    if (e.uniquely_decodable) {
      const auto ud = check_unique_decodability(e.code);
      std::string got = ud.uniquely_decodable ? "UD" : "witness " + render_word(ud.witness, &e.code.target());
      std::string want = *e.uniquely_decodable ? "UD" : "witness";
      if (!*e.uniquely_decodable && e.ud_witness) want += " " + render_word(*e.ud_witness, &e.code.target());
      const bool ok = *e.uniquely_decodable ? ud.uniquely_decodable : (!ud.uniquely_decodable && (!e.ud_witness || ud.witness == *e.ud_witness));
      rep.add({e.name + " unique decodability", digest_hex(inputs), want, got, std::nullopt, std::nullopt, ok});
    }
  }
  rep.wall_seconds = sw.seconds();
  return rep;
}

/// Codes the library ships expectations for.
inline std::vector<CodeExpectation> default_code_expectations() {
  const auto bits = Alphabet(AlphabetTag::target, {{0, "0"}, {1, "1"}});
  const auto ab = Alphabet(AlphabetTag::source, {{0, "a"}, {1, "b"}});
  const auto xy = Alphabet(AlphabetTag::source, {{0, "x"}, {1, "y"}});
  const auto xyz = Alphabet(AlphabetTag::source, {{0, "x"}, {1, "y"}, {2, "z"}});
  std::vector<CodeExpectation> out;
  out.push_back({"comma {a:1, b:01}", make_comma_separated(ab, bits, {{0, {}}, {1, {0}}}, 1), true, true, std::nullopt});
  out.push_back({"comma-embedded {a:10, b:010}", make_comma_embedded(ab, bits, {{0, {}}, {1, {0}}}, 1, {{0, {0}}, {1, {0}}}, 1),
                 true, true, std::nullopt});
  out.push_back({"unary {0..7}", make_unary({0, 1, 2, 3, 4, 5, 6, 7}), true, true, std::nullopt});
  out.push_back({"{x:01, y:10}", make_generic(xy, bits, {{0, {0, 1}}, {1, {1, 0}}}), false, std::nullopt, std::nullopt});
  out.push_back({"{0, 01, 10}", make_generic(xyz, bits, {{0, {0}}, {1, {0, 1}}, {2, {1, 0}}}), std::nullopt, false, Word{0, 1, 0}});
  out.push_back({"{0, 10, 110}", make_generic(xyz, bits, {{0, {0}}, {1, {1, 0}}, {2, {1, 1, 0}}}), std::nullopt, true, std::nullopt});
  return out;
}

/// Mixture transport equals the per-component sum and differs from the pooled ratio.
inline SuiteReport decomposition_suite(const FinitaryCode& code, const ProcessModel& mixture_x, const CylinderEvent& b,
                                       const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"decomposition", tol, {}, true, 0};
  const auto d = decomposition_check(code, mixture_x, b);
  const auto inputs = detail::case_inputs(code, mixture_x, render(b));
  rep.close("mixture transport vs weighted component sum", inputs, d.component_sum, d.mixture_value, tol.exact);
  rep.close("mixture transport vs transported chain", inputs, d.chain_value, d.mixture_value, tol.exact);
  rep.at_least("|mixture transport - pooled ratio|", inputs, std::abs(d.difference), tol.decomposition_gap);
  rep.wall_seconds = sw.seconds();
  return rep;
}

struct NormalizationParams {
  std::size_t depth = 8;
  std::size_t mc_steps = 1'000'000;  ///< source symbols in the Monte Carlo path; 0 disables it
  std::uint64_t seed = 1;
  std::vector<CylinderEvent> birkhoff;  ///< target cylinders checked along the encoded path
};

/// E[L] P_Y(g(Omega_X)) = 1, plus Monte Carlo checks of E[L], of the boundary
/// frequency, and of forward values along an encoded sample path.
inline SuiteReport normalization_suite(const FinitaryCode& code, const ProcessModel& model_x, const NormalizationParams& p = {},
                                       const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"normalization", tol, {}, true, 0};
  const auto inputs = detail::case_inputs(code, model_x, "normalization");
  rep.at_most("|E[L] P(boundary) - 1|", inputs, normalization_residual(code, model_x, p.depth), tol.bracket);
  const auto y = transported(code, model_x);
  const auto br = boundary_prob(code, y, p.depth);
  rep.flag("boundary bracket exact", inputs, "exact", br.exact ? "exact" : "inexact");
  if (p.mc_steps > 0) {
    double el = 0;
    for (auto [w, comp] : model_x.ergodic_components()) el += w * expected_quasi_period(code, *comp);
    const auto xs = sample(model_x, 1, p.mc_steps, p.seed);
    std::vector<double> lens;
    lens.reserve(p.mc_steps);
    for (auto x : xs.window.word) lens.push_back(static_cast<double>(code.codeword(x).size()));
    double mean = 0;
    for (double l : lens) mean += l / static_cast<double>(lens.size());
    const bool ergodic = model_x.is_ergodic();
    if (ergodic)
      rep.at_most("Monte Carlo E[L] / sigma", inputs + "|mc", std::abs(mean - el) / detail::batch_sigma(lens), tol.sigmas);
    const auto coded = encode(code, xs.window).ywindow;
    auto freq_case = [&](const std::string& key, const CylinderEvent& c, double exact) {
      const auto off = static_cast<std::size_t>(c.start - coded.start);
      const std::size_t n = coded.size() - off - c.word.size() + 1;
      std::vector<double> hits(n);
      for (std::size_t i = 0; i < n; ++i)
        hits[i] = std::equal(c.word.begin(), c.word.end(), coded.word.begin() + static_cast<std::ptrdiff_t>(off + i)) ? 1.0 : 0.0;
      double f = 0;
      for (double h : hits) f += h / static_cast<double>(n);
      const double s = detail::batch_sigma(hits);
      rep.at_most(key + " / sigma", inputs + "|" + render(c), s > 0 ? std::abs(f - exact) / s : std::abs(f - exact) / tol.exact,
                  tol.sigmas);
    };
    if (ergodic && code.suffix_len() == 0)
      freq_case("Monte Carlo boundary frequency", CylinderEvent(AlphabetTag::target, 1, {*code.separator()}), br.hi);
    if (ergodic)
      for (const auto& c : p.birkhoff)
        freq_case("Birkhoff frequency " + render(c, &code.target()), c, forward(code, model_x, c).value);
  }
  rep.wall_seconds = sw.seconds();
  return rep;
}

struct ParsingParams {
  std::size_t windows = 1000;
  std::size_t min_len = 8;
  std::size_t max_len = 40;
  std::uint64_t seed = 1;
};

/// Recurrence parsing against concatenation on randomized coded windows.
inline SuiteReport parsing_suite(const FinitaryCode& code, const ProcessModel& model_x, const ParsingParams& p = {},
                                 const Tolerances& tol = {}) {
  detail::Stopwatch sw;
  SuiteReport rep{"parsing", tol, {}, true, 0};
  const auto b = code.boundary_event();
  const EventSet event = EventSet::of_cylinder(b);
  Rng pick(p.seed, 1);
  std::size_t parse_concat = 0, concat_parse = 0, lr = 0, done = 0, skipped = 0;
  for (std::uint64_t k = 0; done < p.windows; ++k) {
    const auto len = p.min_len + static_cast<std::size_t>(pick.next() % (p.max_len - p.min_len + 1));
    // x_0 .. x_len with f(x_0) ending at coordinate 0.
    const auto xs = sample(model_x, 0, len + 1, p.seed * 1'000'003 + k);
    const auto& head = code.codeword(xs.window.word.front());
    Window y{1 - static_cast<Coord>(head.size()), head};
    std::vector<Word> words;
    for (std::size_t i = 1; i < xs.window.word.size(); ++i) {
      words.push_back(code.codeword(xs.window.word[i]));
      y.word.insert(y.word.end(), words.back().begin(), words.back().end());
    }
    // parse o concatenate: the concatenated word sequence parses back to itself.
    const auto parsed = recurrence_parse(y, b);
    if (parsed.words != words || parsed.first_index != 1) ++parse_concat;
    // |w_1| = R_1 at the anchored boundary.
    const auto trace = recurrence_times(y, event, 1);
    if (!trace.anchor_in_c || static_cast<Coord>(parsed.words.front().size()) != trace.at(1)) ++lr;
    // concatenate o parse on a random sub-window.
    const auto a = y.start + static_cast<Coord>(pick.next() % (y.size() / 3 + 1));
    const auto e = y.end() - static_cast<Coord>(pick.next() % (y.size() / 3 + 1));
    Window cut{a, Word(y.word.begin() + (a - y.start), y.word.begin() + (e - y.start) + 1)};
    try {
      const auto pc = recurrence_parse(cut, b);
      const auto back = concatenate(pc);
      Window expect{pc.boundaries.front() + 1,
                    Word(y.word.begin() + (pc.boundaries.front() + 1 - y.start), y.word.begin() + (pc.boundaries.back() - y.start) + 1)};
      if (!(back == expect)) ++concat_parse;
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::insufficient_visits) throw;
      ++skipped;
      continue;
    }
    ++done;
  }
  const auto inputs = detail::case_inputs(code, model_x, "parsing seed " + std::to_string(p.seed));
  const auto n = std::to_string(p.windows);
  rep.close("parse after concatenate, mismatches in " + n + " windows", inputs, 0, static_cast<double>(parse_concat), 0);
  rep.close("concatenate after parse, mismatches in " + n + " windows", inputs, 0, static_cast<double>(concat_parse), 0);
  rep.close("|w_1| = R_1, mismatches in " + n + " windows", inputs, 0, static_cast<double>(lr), 0);
  rep.at_most("sub-windows redrawn for too few visits", inputs, static_cast<double>(skipped), static_cast<double>(p.windows));
  rep.wall_seconds = sw.seconds();
  return rep;
}

}  // namespace normtrans

#endif  // NORMTRANS_VERIFY_HPP
