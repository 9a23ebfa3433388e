#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "normtrans/cli.hpp"

using namespace normtrans;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(NT_FIXTURES) / "configs";

cli::RunOptions opts(const char* name) {
  cli::RunOptions o;
  o.config = kConfigs / name;
  return o;
}

}  // namespace

TEST(CheckCode, UnaryPassesAtDepthEight) {
  const auto r = cli::cmd_check_code(opts("check_code_unary.json"));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["self_avoidance"]["status"], "Pass(8)");
  EXPECT_EQ(r.report["unique_decodability"]["status"], "UD");
}

TEST(CheckCode, CounterexamplePrintsWitness) {
  const auto r = cli::cmd_check_code(opts("check_code_counter.json"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.report["self_avoidance"]["status"], "Violation");
  EXPECT_TRUE(r.report["self_avoidance"]["witness"]["replayed"].get<bool>());
}

TEST(CheckCode, MalformedFileIsInputError) {
  try {
    cli::cmd_check_code(opts("check_code_malformed.json"));
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(Transport, ForwardAndInverseFromFiles) {
  const auto f = cli::cmd_transport(opts("transport_forward.json"));
  EXPECT_EQ(f.exit_code, 0);
  EXPECT_NEAR(f.report["results"][0]["result"]["value"].get<double>(), 0.4, 1e-15);
  EXPECT_NEAR(f.report["normalization"][0]["expected_quasi_period"].get<double>(), 2.5, 1e-15);
  const auto i = cli::cmd_transport(opts("transport_inverse.json"));
  EXPECT_NEAR(i.report["results"][0]["bracket"]["lo"].get<double>(), 0.5, 1e-15);
  EXPECT_EQ(i.report["results"][1]["canonical"], "[1|1 2]");
  const auto rt = cli::cmd_transport(opts("transport_roundtrip_markov.json"));
  EXPECT_EQ(rt.exit_code, 0);
  EXPECT_EQ(rt.report["verdict"], "pass");
}

TEST(Recurrence, TwoStateReport) {
  const auto r = cli::cmd_recurrence(opts("recurrence_two_state.json"));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NEAR(r.report["expected_return"].get<double>(), 6.0, 1e-12);
  EXPECT_NEAR(r.report["gap_law_head"][0]["prob"].get<double>(), 0.5, 1e-15);
  EXPECT_NEAR(r.report["gap_law_head"][1]["prob"].get<double>(), 0.05, 1e-15);
}

TEST(Suite, NegativeControlExitsOne) {
  std::ostringstream log;
  EXPECT_EQ(cli::cmd_suite(opts("suite_negative_control.json"), log).exit_code, 1);
}

TEST(Suite, UnknownNameIsInputError) {
  auto o = opts("suite_all.json");
  o.suite = "no_such_suite";
  std::ostringstream log;
  EXPECT_THROW(cli::cmd_suite(o, log), InputError);
}

TEST(Suite, SingleSuiteFilter) {
  auto o = opts("suite_all.json");
  o.suite = "codes";
  std::ostringstream log;
  const auto r = cli::cmd_suite(o, log);
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.report["suites"].size(), 1u);
  EXPECT_EQ(r.report["suites"][0]["suite"], "codes");
}

TEST(Reports, DeterministicAndSeedSensitive) {
  const auto a = cli::cmd_recurrence(opts("recurrence_coin.json"));
  const auto b = cli::cmd_recurrence(opts("recurrence_coin.json"));
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.report["master_seed"], 7);
  auto o = opts("recurrence_coin.json");
  o.seed = 8;
  const auto c = cli::cmd_recurrence(o);
  EXPECT_EQ(c.report["master_seed"], 8);
  EXPECT_NE(c.report["config_digest"], a.report["config_digest"]);
  EXPECT_NE(c.report.dump(), a.report.dump());
}

TEST(Reports, DigestCoversReferencedFiles) {
  // Same top-level config, different referenced code: digests differ.
  const auto a = cli::cmd_check_code(opts("check_code_unary.json"));
  const auto b = cli::cmd_check_code(opts("check_code_counter.json"));
  EXPECT_NE(a.report["config_digest"], b.report["config_digest"]);
  auto o = opts("check_code_unary.json");
  o.depth = 4;
  EXPECT_EQ(cli::cmd_check_code(o).report["self_avoidance"]["status"], "Pass(4)");
}
