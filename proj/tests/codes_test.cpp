#include <gtest/gtest.h>

#include <random>

#include "normtrans/codes.hpp"
#include "oracles.hpp"

using namespace normtrans;

namespace {

const Alphabet kBits(AlphabetTag::target, {{0, "0"}, {1, "1"}});
const Alphabet kAB(AlphabetTag::source, {{0, "a"}, {1, "b"}});
const Alphabet kXYZ(AlphabetTag::source, {{0, "x"}, {1, "y"}, {2, "z"}});

FinitaryCode comma_ab() { return make_comma_separated(kAB, kBits, {{0, {}}, {1, {0}}}, 1); }
FinitaryCode embedded_ab() { return make_comma_embedded(kAB, kBits, {{0, {}}, {1, {0}}}, 1, {{0, {0}}, {1, {0}}}, 1); }

std::vector<oracle::Str> words_of(const FinitaryCode& c) {
  std::vector<oracle::Str> out;
  for (const auto& w : c.codewords()) out.emplace_back(w.begin(), w.end());
  return out;
}

Window random_source(std::mt19937_64& g, const std::vector<SymbolId>& ids, std::size_t n) {
  Window x{1, {}};
  for (std::size_t i = 0; i < n; ++i) x.word.push_back(ids[g() % ids.size()]);
  return x;
}

}  // namespace

TEST(Construct, CommaSeparatedAppendsSeparator) {
  const auto c = comma_ab();
  EXPECT_EQ(c.codeword(0), (Word{1}));
  EXPECT_EQ(c.codeword(1), (Word{0, 1}));
  EXPECT_EQ(c.boundary_event().start, 0);
}

TEST(Construct, EmbeddedSuffixFollowsSeparator) {
  const auto c = embedded_ab();
  EXPECT_EQ(c.codeword(0), (Word{1, 0}));
  EXPECT_EQ(c.codeword(1), (Word{0, 1, 0}));
  // Boundary event: separator suffix_len places before the end of a codeword.
  EXPECT_EQ(c.boundary_event().start, -1);
}

TEST(Construct, Errors) {
  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::invalid_argument;
  };
  EXPECT_EQ(kind_of([] { make_comma_separated(kAB, kBits, {{0, {1}}, {1, {0}}}, 1); }), ErrorKind::separator_in_word);
  EXPECT_EQ(kind_of([] { make_comma_embedded(kAB, kBits, {{0, {}}, {1, {0}}}, 1, {{0, {0, 0}}, {1, {0}}}, 1); }),
            ErrorKind::bad_suffix_length);
  EXPECT_EQ(kind_of([] { make_comma_embedded(kAB, kBits, {{0, {}}, {1, {0}}}, 1, {{0, {1}}, {1, {0}}}, 1); }),
            ErrorKind::separator_in_word);
  EXPECT_EQ(kind_of([] { make_generic(kAB, kBits, {{0, {0}}, {1, {0}}}); }), ErrorKind::duplicate_codeword);
  EXPECT_EQ(kind_of([] { make_generic(kAB, kBits, {{0, {}}, {1, {0}}}); }), ErrorKind::empty_codeword);
  EXPECT_EQ(kind_of([] { make_unary({1, 2}).codeword(-1); }), ErrorKind::unknown_symbol);
}

TEST(Unary, StructuralCodewordsBeyondSupport) {
  const auto u = make_unary({1, 2});
  EXPECT_EQ(u.codeword(4), (Word{0, 0, 0, 0, 1}));
  EXPECT_EQ(u.decode_word(Word{0, 0, 0, 1}), std::optional<SymbolId>(3));
  EXPECT_FALSE(u.decode_word(Word{0, 1, 1}));
}

TEST(Encode, DecodeByBoundariesInverts) {
  std::mt19937_64 g(3);
  for (const auto& code : {comma_ab(), embedded_ab(), make_unary({1, 2, 3, 4})}) {
    for (int t = 0; t < 200; ++t) {
      const auto x = random_source(g, code.source().ids(), 1 + g() % 12);
      const auto cw = encode(code, x);
      ASSERT_EQ(cw.boundaries.size(), x.size() + 1);
      ASSERT_EQ(cw.boundaries.back(), cw.ywindow.end());
      ASSERT_EQ(decode_by_boundaries(code, cw), x);
    }
  }
}

TEST(QuasiPeriod, ExactEqualsFirstCodewordLength) {
  const auto u = make_unary({1, 2, 3});
  EXPECT_EQ(quasi_period(u, 1), 2u);
  EXPECT_EQ(quasi_period(u, 3), 4u);
  EXPECT_EQ(quasi_period(embedded_ab(), 1), 3u);
  EXPECT_THROW(quasi_period(make_generic(kAB, kBits, {{0, {0, 1}}, {1, {1, 0}}}), 0), Error);
}

TEST(QuasiPeriod, BoundedNeverExceedsExact) {
  std::mt19937_64 g(5);
  const auto u = make_unary({1, 2, 3});
  for (int t = 0; t < 200; ++t) {
    const auto x = random_source(g, u.source().ids(), 12);
    const auto b = quasi_period_bounded(u, x, 6);
    ASSERT_LE(b, quasi_period(u, x.word.front()));
    ASSERT_GE(b, 1u);
  }
  // A periodic source fools the bounded search: 0 1 0 1 ... shifted by 2 equals itself.
  const auto periodic = make_generic(kAB, kBits, {{0, {0, 1, 0, 1}}, {1, {1, 1}}});
  EXPECT_EQ(quasi_period_bounded(periodic, Window{1, {0, 0, 0, 0}}, 4), 2u);
  EXPECT_THROW(quasi_period_bounded(u, Window{1, {1}}, 10), Error);
}

TEST(Spread, CountsShiftsInsideOnePeriod) {
  const auto u = make_unary({1, 2});
  // x = 2 1 ...: y = 0 0 1 0 1 ...
  const Window x{1, {2, 1, 1}};
  EXPECT_EQ(spread(u, x, CylinderEvent(AlphabetTag::target, 1, {0})), 2u);
  EXPECT_EQ(spread(u, x, CylinderEvent(AlphabetTag::target, 1, {1})), 1u);
  EXPECT_EQ(spread(u, x, CylinderEvent(AlphabetTag::target, 2, {1, 0})), 1u);
  try {
    spread(u, x, CylinderEvent(AlphabetTag::target, 0, {1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::negative_coordinate);
  }
  EXPECT_THROW(spread(u, Window{1, {2}}, CylinderEvent(AlphabetTag::target, 1, {1, 0})), Error);
}

TEST(UniqueDecodability, MatchesBruteForce) {
  const std::vector<FinitaryCode> codes{
      make_generic(kXYZ, kBits, {{0, {0}}, {1, {0, 1}}, {2, {1, 0}}}),
      make_generic(kXYZ, kBits, {{0, {0}}, {1, {1, 0}}, {2, {1, 1, 0}}}),
      make_generic(kAB, kBits, {{0, {0, 1}}, {1, {1, 0}}}),
      make_generic(kXYZ, kBits, {{0, {1}}, {1, {0, 1, 1}}, {2, {0, 1}}}),
      make_generic(kXYZ, kBits, {{0, {0, 1}}, {1, {0, 1, 1}}, {2, {1, 1}}}),
      comma_ab(),
      embedded_ab(),
  };
  for (const auto& c : codes) {
    const auto r = check_unique_decodability(c);
    const auto brute = oracle::ambiguous_string(words_of(c), 12);
    EXPECT_EQ(r.uniquely_decodable, !brute.has_value()) << c.describe();
    if (!r.uniquely_decodable) {
      ASSERT_TRUE(brute);
      EXPECT_EQ(r.witness.size(), brute->size()) << c.describe();
      const auto again = oracle::ambiguous_string(words_of(c), r.witness.size());
      EXPECT_TRUE(again);
      // Both reported parses concatenate to the witness.
      Word a, b;
      for (auto x : r.parse_a) a.insert(a.end(), c.codeword(x).begin(), c.codeword(x).end());
      for (auto x : r.parse_b) b.insert(b.end(), c.codeword(x).begin(), c.codeword(x).end());
      EXPECT_EQ(a, r.witness);
      EXPECT_EQ(b, r.witness);
      EXPECT_NE(r.parse_a, r.parse_b);
    }
  }
}

TEST(UniqueDecodability, FlagsZeroZeroOneTenWithWitness010) {
  const auto r = check_unique_decodability(make_generic(kXYZ, kBits, {{0, {0}}, {1, {0, 1}}, {2, {1, 0}}}));
  EXPECT_FALSE(r.uniquely_decodable);
  EXPECT_EQ(r.witness, (Word{0, 1, 0}));
  EXPECT_TRUE(check_unique_decodability(make_generic(kXYZ, kBits, {{0, {0}}, {1, {1, 0}}, {2, {1, 1, 0}}})).uniquely_decodable);
}

TEST(SelfAvoidance, SeparatorClassesPass) {
  for (const auto& c : {comma_ab(), embedded_ab(), make_unary({0, 1, 2, 3, 4, 5, 6, 7})}) {
    const auto v = check_self_avoiding(c, 8);
    EXPECT_TRUE(v.pass) << c.describe();
    EXPECT_EQ(v.depth, 8u);
    EXPECT_FALSE(v.violation);
  }
}

TEST(SelfAvoidance, CounterexampleWitnessIsGenuine) {
  const auto c = make_generic(kAB, kBits, {{0, {0, 1}}, {1, {1, 0}}});
  for (std::size_t depth = 2; depth <= 4; ++depth) {
    const auto v = check_self_avoiding(c, depth);
    ASSERT_FALSE(v.pass) << depth;
    ASSERT_TRUE(v.violation);
    const auto& w = *v.violation;
    EXPECT_LE(w.left.size() + 1 + w.right.size(), depth);
    EXPECT_GT(w.shift, 0u);
    EXPECT_LT(w.shift, c.codeword(w.x1).size());
    EXPECT_TRUE(replay_violation(c, w));
    // Independent check: a codeword boundary fits strictly inside f(x1).
    oracle::Str y;
    for (auto x : w.left) y.insert(y.end(), c.codeword(x).begin(), c.codeword(x).end());
    const auto cut = y.size() + w.shift;
    y.insert(y.end(), c.codeword(w.x1).begin(), c.codeword(w.x1).end());
    for (auto x : w.right) y.insert(y.end(), c.codeword(x).begin(), c.codeword(x).end());
    EXPECT_TRUE(oracle::boundary_possible(words_of(c), y, cut));
  }
}

TEST(SelfAvoidance, PassingCodesHaveNoBruteForceReentry) {
  // For each pass verdict, no window of depth d admits an interior boundary.
  std::mt19937_64 g(17);
  for (const auto& c : {comma_ab(), embedded_ab(), make_unary({1, 2, 3})}) {
    const auto ws = words_of(c);
    for (int t = 0; t < 300; ++t) {
      const auto left = random_source(g, c.source().ids(), 3);
      const auto x1 = c.source().ids()[g() % c.source().size()];
      const auto right = random_source(g, c.source().ids(), 4);
      oracle::Str y;
      for (auto x : left.word) y.insert(y.end(), c.codeword(x).begin(), c.codeword(x).end());
      const auto base = y.size();
      y.insert(y.end(), c.codeword(x1).begin(), c.codeword(x1).end());
      for (auto x : right.word) y.insert(y.end(), c.codeword(x).begin(), c.codeword(x).end());
      for (std::size_t s = 1; s < c.codeword(x1).size(); ++s)
        ASSERT_FALSE(oracle::boundary_possible(ws, y, base + s)) << c.describe();
    }
  }
}

TEST(SelfAvoidance, DeeperSearchNeverUndoesAViolation) {
  const auto c = make_generic(kXYZ, kBits, {{0, {0}}, {1, {1, 0}}, {2, {1, 1, 0}}});
  bool seen = false;
  for (std::size_t d = 2; d <= 6; ++d) {
    const auto v = check_self_avoiding(c, d);
    if (seen) {
      EXPECT_FALSE(v.pass) << d;
    }
    seen = seen || !v.pass;
  }
}

TEST(Factorization, CommutesForSeparatorClasses) {
  std::mt19937_64 g(23);
  for (const auto& c : {comma_ab(), embedded_ab(), make_unary({1, 2, 3})}) {
    for (int t = 0; t < 100; ++t) {
      const auto x = random_source(g, c.source().ids(), 10);
      ASSERT_TRUE(factorization_commutes(c, x, 5)) << c.describe();
    }
  }
}
