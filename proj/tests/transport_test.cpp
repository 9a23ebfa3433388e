#include <gtest/gtest.h>

#include "normtrans/transport.hpp"
#include "oracles.hpp"

using namespace normtrans;

namespace {

Matrix rows_to_matrix(const oracle::Rows& r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[i][j];
  return m;
}

const oracle::Rows kMarkov3{{0.5, 0.3, 0.2}, {0.2, 0.6, 0.2}, {0.3, 0.3, 0.4}};
const oracle::Rows kAB{{0.3, 0.7}, {0.6, 0.4}};
const Alphabet kBits(AlphabetTag::target, {{0, "0"}, {1, "1"}});
const Alphabet kSrcAB(AlphabetTag::source, {{0, "a"}, {1, "b"}});

ProcessModel iid12() { return ProcessModel::iid(Alphabet::of_labels(AlphabetTag::source, {"1", "2"}), {0.5, 0.5}); }
ProcessModel markov3() { return ProcessModel::markov(Alphabet::of_labels(AlphabetTag::source, {"1", "2", "3"}), rows_to_matrix(kMarkov3)); }
ProcessModel markov_ab() { return ProcessModel::markov(kSrcAB, rows_to_matrix(kAB)); }

FinitaryCode comma_ab() { return make_comma_separated(kSrcAB, kBits, {{0, {}}, {1, {0}}}, 1); }
FinitaryCode embedded_ab() { return make_comma_embedded(kSrcAB, kBits, {{0, {}}, {1, {0}}}, 1, {{0, {0}}, {1, {0}}}, 1); }

oracle::Table table_of(const FinitaryCode& c) {
  oracle::Table t;
  for (auto id : c.source().ids()) t.emplace_back(c.codeword(id).begin(), c.codeword(id).end());
  return t;
}

std::vector<Word> words_up_to(std::size_t len, const std::vector<SymbolId>& ids) {
  std::vector<Word> out{{}}, all;
  for (std::size_t l = 1; l <= len; ++l) {
    std::vector<Word> next;
    for (const auto& w : out)
      for (auto s : ids) {
        auto v = w;
        v.push_back(s);
        next.push_back(v);
      }
    out = next;
    all.insert(all.end(), out.begin(), out.end());
  }
  return all;
}

struct Pair {
  FinitaryCode code;
  ProcessModel model;
  oracle::Law law;
};

std::vector<Pair> pairs() {
  return {{make_unary({1, 2}), iid12(), oracle::iid({0.5, 0.5})},
          {make_unary({1, 2, 3}), markov3(), oracle::markov(kMarkov3)},
          {comma_ab(), markov_ab(), oracle::markov(kAB)},
          {embedded_ab(), markov_ab(), oracle::markov(kAB)}};
}

}  // namespace

TEST(Forward, UnaryUniformWorkedValues) {
  const auto u = make_unary({1, 2});
  EXPECT_DOUBLE_EQ(expected_quasi_period(u, iid12()), 2.5);
  const auto r = forward(u, iid12(), CylinderEvent(AlphabetTag::target, 1, {1}));
  EXPECT_NEAR(r.value, 0.4, 1e-15);
  EXPECT_NEAR(r.numerator, 1.0, 1e-15);
  EXPECT_NEAR(r.denominator, 2.5, 1e-15);
}

TEST(Forward, MatchesLiteralSpreadEnumeration) {
  for (const auto& p : pairs()) {
    const auto table = table_of(p.code);
    EXPECT_NEAR(expected_quasi_period(p.code, p.model), oracle::mean_length(table, p.law), 1e-12);
    for (const auto& w : words_up_to(4, {0, 1}))
      for (Coord s : {1, 2, 4}) {
        const CylinderEvent b(AlphabetTag::target, s, w);
        ASSERT_NEAR(forward(p.code, p.model, b).value, oracle::forward(table, p.law, s, oracle::Str(w.begin(), w.end())), 1e-13)
            << p.code.describe() << " " << render(b);
      }
  }
}

TEST(Forward, ErrorsAndBudget) {
  const auto u = make_unary({1, 2});
  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::invalid_argument;
  };
  EXPECT_EQ(kind_of([&] { forward(u, iid12(), CylinderEvent(AlphabetTag::target, 0, {1})); }), ErrorKind::non_canonical_cylinder);
  EXPECT_EQ(kind_of([&] { forward(u, iid12(), CylinderEvent(AlphabetTag::target, 1, {5})); }), ErrorKind::unknown_symbol);
  EXPECT_EQ(kind_of([&] { forward(u, iid12(), CylinderEvent(AlphabetTag::target, 1, {0, 1, 0, 0, 1, 0, 1}), 5); }),
            ErrorKind::enumeration_budget_exceeded);
  const auto generic = make_generic(kSrcAB, kBits, {{0, {0, 1}}, {1, {1, 0}}});
  EXPECT_EQ(kind_of([&] { forward(generic, markov_ab(), CylinderEvent(AlphabetTag::target, 1, {1})); }), ErrorKind::unsupported_kind);
}

TEST(Forward, CanonicalizeShiftsToOne) {
  const auto b = canonicalize(CylinderEvent(AlphabetTag::target, -3, {1, 0}));
  EXPECT_EQ(b.start, 1);
  EXPECT_EQ(b.word, (Word{1, 0}));
}

TEST(Transported, ShiftInvariantAndEqualToForward) {
  for (const auto& p : pairs()) {
    const auto y = transported(p.code, p.model);
    EXPECT_TRUE(y.is_stationary());
    CylinderEngine engine(y);
    for (const auto& w : words_up_to(4, {0, 1})) {
      const double f = forward(p.code, p.model, CylinderEvent(AlphabetTag::target, 1, w)).value;
      for (Coord s : {-7, -1, 0, 1, 2, 3, 9})
        ASSERT_NEAR(engine.prob(CylinderEvent(AlphabetTag::target, s, w)), f, 1e-12) << p.code.describe() << " s=" << s;
    }
  }
}

TEST(Boundary, NormalizationIdentity) {
  for (const auto& p : pairs()) {
    const auto y = transported(p.code, p.model);
    const auto br = boundary_prob(p.code, y, 6);
    EXPECT_TRUE(br.exact);
    EXPECT_NEAR(br.hi * expected_quasi_period(p.code, p.model), 1.0, 1e-12) << p.code.describe();
    EXPECT_NEAR(normalization_residual(p.code, p.model), 0.0, 1e-12);
    EXPECT_LE(br.hi, separator_prob(p.code, y) + 1e-15);
  }
  const auto br = boundary_prob(make_unary({1, 2}), transported(make_unary({1, 2}), iid12()), 4);
  EXPECT_NEAR(br.lo, 0.4, 1e-15);
}

TEST(Inverse, RoundTripRecoversSourceCylinders) {
  for (const auto& p : pairs()) {
    const auto y = transported(p.code, p.model);
    for (const auto& a : words_up_to(3, p.code.source().ids())) {
      const auto ids = p.code.source().ids();
      std::vector<std::size_t> idx;
      for (auto s : a) idx.push_back(static_cast<std::size_t>(std::find(ids.begin(), ids.end(), s) - ids.begin()));
      const double ref = oracle::path_prob(p.law, idx);
      for (std::size_t depth : {1u, 4u, 12u}) {
        const auto br = inverse(p.code, y, CylinderEvent(AlphabetTag::source, 1, a), depth);
        ASSERT_TRUE(br.exact);
        ASSERT_LT(br.width(), 1e-9);
        ASSERT_NEAR(br.estimate, ref, 1e-12) << p.code.describe() << " depth " << depth;
      }
    }
  }
}

TEST(Inverse, UnaryUniformHalf) {
  const auto u = make_unary({1, 2});
  const auto br = inverse(u, transported(u, iid12()), CylinderEvent(AlphabetTag::source, 1, {1}), 8);
  EXPECT_NEAR(br.lo, 0.5, 1e-15);
  EXPECT_NEAR(br.hi, 0.5, 1e-15);
}

TEST(Inverse, IncompleteImageGivesWideBracket) {
  // Fair bits put mass on 001, which {1, 01} cannot parse.
  const auto u = comma_ab();
  const auto bits = ProcessModel::iid(kBits, {0.5, 0.5});
  const auto br = inverse(u, bits, CylinderEvent(AlphabetTag::source, 1, {1}), 6);
  EXPECT_FALSE(br.exact);
  EXPECT_EQ(br.lo, 0.0);
  EXPECT_EQ(br.hi, 1.0);
  EXPECT_GT(br.estimate, 0.0);
  EXPECT_LT(br.estimate, 1.0);
  // The boundary upper bound decreases with depth.
  double prev = 2;
  for (std::size_t d = 1; d <= 6; ++d) {
    const auto b = boundary_prob(u, bits, d);
    EXPECT_LE(b.hi, prev);
    prev = b.hi;
  }
}

TEST(Inverse, ZeroBoundaryAndNonCanonical) {
  const auto u = make_unary({1, 2});
  const auto zeros = ProcessModel::iid(kBits, {1.0, 0.0});
  try {
    inverse(u, zeros, CylinderEvent(AlphabetTag::source, 1, {1}), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::zero_boundary);
  }
  try {
    inverse(u, transported(u, iid12()), CylinderEvent(AlphabetTag::source, 0, {1}), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_canonical_cylinder);
  }
  EXPECT_THROW(inverse(u, ProcessModel::pushforward(u, iid12()), CylinderEvent(AlphabetTag::source, 1, {1}), 4), Error);
}

TEST(Cesaro, MatchesDirectAverageOfPushforward) {
  const auto u = make_unary({1, 2});
  const auto push = ProcessModel::pushforward(u, iid12());
  const auto table = table_of(u);
  const auto law = oracle::iid({0.5, 0.5});
  const CylinderEvent c(AlphabetTag::target, 1, {0, 1});
  const auto means = cesaro_means(push, c, {5, 12});
  double sum = 0;
  std::vector<double> direct;
  for (int i = 0; i < 12; ++i) {
    sum += oracle::pushforward(table, law, 1 + i, {0, 1});
    if (i + 1 == 5 || i + 1 == 12) direct.push_back(sum / (i + 1));
  }
  EXPECT_NEAR(means[0], direct[0], 1e-13);
  EXPECT_NEAR(means[1], direct[1], 1e-13);
  EXPECT_NEAR(cesaro_mean(push, c, 12), direct[1], 1e-13);
}

TEST(Cesaro, ConvergesToForward) {
  const auto u = make_unary({1, 2, 3});
  const auto push = ProcessModel::pushforward(u, markov3());
  for (const auto& w : std::vector<Word>{{1}, {0, 1}, {0, 0, 1}}) {
    const CylinderEvent c(AlphabetTag::target, 1, w);
    const double f = forward(u, markov3(), c).value;
    const auto m = cesaro_means(push, c, {256, 1024, 4096, 10000});
    double prev = INFINITY;
    for (double v : m) {
      EXPECT_LT(std::abs(v - f), prev);
      prev = std::abs(v - f);
    }
    EXPECT_LT(prev, 1e-2);
  }
  EXPECT_THROW(cesaro_means(transported(u, markov3()), CylinderEvent(AlphabetTag::target, 1, {1}), {4}), Error);
  EXPECT_THROW(cesaro_means(push, CylinderEvent(AlphabetTag::target, 1, {1}), {8, 4}), Error);
}

TEST(Decomposition, PointMassMixture) {
  const auto a = Alphabet::of_labels(AlphabetTag::source, {"1", "2"});
  const auto mix = ProcessModel::mixture({0.3, 0.7}, {ProcessModel::iid(a, {1, 0}), ProcessModel::iid(a, {0, 1})});
  const auto u = make_unary({1, 2});
  const auto r = decomposition_check(u, mix, CylinderEvent(AlphabetTag::target, 1, {1}));
  // 0.3 * 1/2 + 0.7 * 1/3 against (0.3 + 0.7) / (0.3 * 2 + 0.7 * 3).
  EXPECT_NEAR(r.mixture_value, 0.3 / 2 + 0.7 / 3, 1e-15);
  EXPECT_NEAR(r.component_sum, r.mixture_value, 1e-15);
  EXPECT_NEAR(r.chain_value, r.mixture_value, 1e-12);
  EXPECT_NEAR(r.pooled_ratio, 1.0 / 2.7, 1e-15);
  EXPECT_GE(std::abs(r.difference), 0.01);
  EXPECT_THROW(decomposition_check(u, iid12(), CylinderEvent(AlphabetTag::target, 1, {1})), Error);
}

TEST(Decomposition, MixtureInverseUsesComponentRatios) {
  const auto a = Alphabet::of_labels(AlphabetTag::source, {"1", "2"});
  const auto c1 = ProcessModel::iid(a, {0.2, 0.8});
  const auto c2 = ProcessModel::markov(a, rows_to_matrix({{0.9, 0.1}, {0.5, 0.5}}));
  const auto mix = ProcessModel::mixture({0.4, 0.6}, {c1, c2});
  const auto u = make_unary({1, 2});
  const auto y = transported(u, mix);
  for (const auto& w : words_up_to(3, {1, 2})) {
    const CylinderEvent A(AlphabetTag::source, 1, w);
    const auto br = inverse(u, y, A, 6);
    EXPECT_NEAR(br.estimate, cylinder_prob(mix, A), 1e-12);
  }
}
