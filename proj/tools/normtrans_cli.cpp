// normtrans: command-line front end over the normtrans headers.
//
//   normtrans check-code --config code_check.json
//   normtrans transport  --config transport.json --depth 12
//   normtrans recurrence --config recurrence.json --seed 7
//   normtrans suite      --config suite_all.json --suite roundtrip
//
// Exit status: 0 pass, 1 property failure, 2 usage or input error.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>

#include "normtrans/cli.hpp"

namespace {

using namespace normtrans;

int emit(const cli::CommandResult& r, const std::string& out) {
  const auto text = r.report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write " << out << "\n";
      return 2;
    }
    f << text;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized transport of stationary processes through self-avoiding codes"};
  app.require_subcommand(1);

  cli::RunOptions opt;
  std::string out;
  std::uint64_t seed = 0, budget = 0;
  std::size_t depth = 0;
  std::string suite;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the file)");
    sub->add_option("--out", out, "write the report here instead of stdout");
    sub->add_option("--depth", depth, "parse depth (overrides the file)");
    sub->add_option("--budget", budget, "enumeration budget (overrides the file)");
  };
  auto* check = app.add_subcommand("check-code", "classify a code: unique decodability and self-avoidance");
  auto* transport = app.add_subcommand("transport", "forward, inverse or round-trip transport of cylinders");
  auto* recurrence = app.add_subcommand("recurrence", "exact return laws, bridge and simulation diagnostics");
  auto* suites = app.add_subcommand("suite", "run named verification suites");
  for (auto* s : {check, transport, recurrence, suites}) common(s);
  suites->add_option("--suite", suite, "run only this suite (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto given = [](CLI::App* s, const char* name) { return s->count(name) > 0; };
  CLI::App* sub = app.get_subcommands().front();
  if (given(sub, "--seed")) opt.seed = seed;
  if (given(sub, "--depth")) opt.depth = depth;
  if (given(sub, "--budget")) opt.budget = budget;
  if (sub == suites && given(sub, "--suite")) opt.suite = suite;

  try {
    cli::CommandResult r;
    if (sub == check) r = cli::cmd_check_code(opt);
    else if (sub == transport) r = cli::cmd_transport(opt);
    else if (sub == recurrence) r = cli::cmd_recurrence(opt);
    else r = cli::cmd_suite(opt);
    return emit(r, out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
