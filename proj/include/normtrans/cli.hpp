#ifndef NORMTRANS_CLI_HPP
#define NORMTRANS_CLI_HPP

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "normtrans/io.hpp"

namespace normtrans::cli {

inline constexpr std::uint64_t kDefaultSeed = 1;
inline constexpr std::size_t kDefaultDepth = 8;

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> depth;
  std::optional<std::uint64_t> budget;
  std::optional<std::string> suite;
};

struct CommandResult {
  int exit_code = 0;
  Json report;
};

/// Loaded configuration with overrides applied; every referenced file is
/// embedded in `resolved`, whose digest tags the report.
class Context {
 public:
  Context(const RunOptions& opt, const std::string& command, const std::set<std::string>& allowed)
      : command_(command), base_(opt.config.parent_path()) {
    config_ = read_json_file(opt.config);
    check_version(config_, opt.config.string());
    auto keys = allowed;
    keys.insert({"format_version", "seed"});
    check_keys(config_, keys, {}, opt.config.string());
    if (opt.seed) config_["seed"] = *opt.seed;
    if (opt.depth) config_["depth"] = *opt.depth;
    if (opt.budget) config_["budget"] = *opt.budget;
    if (opt.suite) config_["suite"] = *opt.suite;
    master_seed_ = get_or<std::uint64_t>(config_, "seed", kDefaultSeed, "config");
    resolved_ = Json{{"command", command}, {"config", config_}, {"files", Json::object()}};
  }

  const Json& config() const noexcept { return config_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }

  std::size_t depth() const { return get_or<std::size_t>(config_, "depth", kDefaultDepth, "config"); }
  std::uint64_t budget() const { return get_or<std::uint64_t>(config_, "budget", kDefaultBudget, "config"); }

  FinitaryCode code(const Json& ref) {
    const auto [path, j] = file(ref);
    try {
      return code_from_json(j, path);
    } catch (const Error& e) {
      throw InputError(path + ": " + e.what());
    }
  }

  ProcessModel model(const Json& ref, const Alphabet* alphabet, const FinitaryCode* code) {
    const auto [path, j] = file(ref);
    try {
      return model_from_json(j, alphabet, code, path);
    } catch (const Error& e) {
      throw InputError(path + ": " + e.what());
    }
  }

  /// Report skeleton: version, command, digest of the resolved inputs, seed.
  Json header() const {
    return Json{{"format_version", kFormatVersion},
                {"command", command_},
                {"config_digest", digest_hex(resolved_.dump())},
                {"master_seed", master_seed_},
                {"rng", Rng::algorithm}};
  }

 private:
  std::pair<std::string, Json> file(const Json& ref) {
    if (!ref.is_string()) throw InputError("config: file references must be path strings");
    const auto rel = ref.get<std::string>();
    auto j = read_json_file(base_ / rel);
    resolved_["files"][rel] = j;
    return {(base_ / rel).string(), j};
  }

  std::string command_;
  std::filesystem::path base_;
  Json config_;
  Json resolved_;
  std::uint64_t master_seed_ = kDefaultSeed;
};

inline Json self_avoid_json(const FinitaryCode& code, const SelfAvoidVerdict& v) {
  Json out{{"status", v.pass ? "Pass(" + std::to_string(v.depth) + ")" : "Violation"}, {"depth", v.depth}};
  if (v.violation) {
    const auto& w = *v.violation;
    Json left = Json::array(), right = Json::array();
    for (auto x : w.left) left.push_back(code.source().render(x));
    for (auto x : w.right) right.push_back(code.source().render(x));
    out["witness"] = Json{{"left", left}, {"x1", code.source().render(w.x1)}, {"right", right}, {"shift", w.shift},
                          {"replayed", replay_violation(code, w)}};
  }
  return out;
}

inline CommandResult cmd_check_code(const RunOptions& opt) {
  Context ctx(opt, "check-code", {"code", "depth"});
  if (!ctx.config().contains("code")) throw InputError("config: missing key 'code'");
  const auto code = ctx.code(ctx.config()["code"]);
  const auto depth = ctx.depth();
  Json report = ctx.header();
  Json words = Json::object();
  for (const auto& [x, w] : code.table()) words[code.source().render(x)] = render_word(w, &code.target());
  report["code"] = Json{{"kind", to_string(code.kind())}, {"codewords", words}};
  if (code.separator()) {
    report["code"]["separator"] = code.target().render(*code.separator());
    report["code"]["suffix_len"] = code.suffix_len();
    Json qp = Json::object();
    for (const auto& [x, _] : code.table()) qp[code.source().render(x)] = quasi_period(code, x);
    report["quasi_period"] = qp;
  }
  const auto ud = check_unique_decodability(code);
  report["unique_decodability"] = ud.uniquely_decodable
                                      ? Json{{"status", "UD"}}
                                      : Json{{"status", "not UD"}, {"witness", render_word(ud.witness, &code.target())}};
  const auto sa = check_self_avoiding(code, depth);
  report["self_avoidance"] = self_avoid_json(code, sa);
  report["verdict"] = sa.pass ? "pass" : "fail";
  return {sa.pass ? 0 : 1, report};
}

inline CommandResult cmd_transport(const RunOptions& opt) {
  Context ctx(opt, "transport", {"code", "model", "model_y", "direction", "cylinders", "depth", "budget"});
  const auto& cfg = ctx.config();
  for (const char* k : {"code", "direction", "cylinders"})
    if (!cfg.contains(k)) throw InputError(std::string("config: missing key '") + k + "'");
  const auto code = ctx.code(cfg["code"]);
  const auto direction = get_as<std::string>(cfg, "direction", "config");
  if (direction != "forward" && direction != "inverse" && direction != "roundtrip")
    throw InputError("config: direction must be forward, inverse or roundtrip");
  if (!cfg["cylinders"].is_array() || cfg["cylinders"].empty()) throw InputError("config: cylinders must be a nonempty list");
  const auto depth = ctx.depth();
  const auto budget = ctx.budget();
  Json report = ctx.header();
  report["direction"] = direction;
  report["depth"] = depth;
  report["tolerances"] = to_json(Tolerances{});

  std::optional<ProcessModel> model_x;
  if (cfg.contains("model")) model_x = ctx.model(cfg["model"], &code.source(), &code);
  if (direction != "inverse" && !model_x) throw InputError("config: missing key 'model'");

  auto load_y = [&]() -> ProcessModel {
    if (cfg.contains("model_y")) return ctx.model(cfg["model_y"], &code.target(), &code);
    if (!model_x) throw InputError("config: inverse transport needs 'model' or 'model_y'");
    return transported(code, *model_x);
  };

  bool ok = true;
  Json rows = Json::array();
  if (model_x && model_x->is_stationary()) {
    Json norm = Json::array();
    for (auto [w, comp] : model_x->ergodic_components()) {
      const double el = expected_quasi_period(code, *comp);
      const auto br = boundary_prob(code, transported(code, *comp), depth);
      norm.push_back(Json{{"weight", w}, {"expected_quasi_period", el}, {"boundary", to_json(br)},
                          {"residual", std::abs(el * br.hi - 1)}});
    }
    report["normalization"] = norm;
  }
  std::size_t i = 0;
  for (const auto& cj : cfg["cylinders"]) {
    const auto where = "config.cylinders[" + std::to_string(i++) + "]";
    if (direction == "forward") {
      auto b = cylinder_of(cj, code.target(), AlphabetTag::target, where);
      const auto canon = b.start < 1 ? canonicalize(b) : b;
      Json row{{"cylinder", render(b, &code.target())}};
      if (!(canon == b)) row["canonical"] = render(canon, &code.target());
      row["result"] = to_json(forward(code, *model_x, canon, budget));
      rows.push_back(row);
    } else if (direction == "inverse") {
      const auto a = cylinder_of(cj, code.source(), AlphabetTag::source, where);
      Json row{{"cylinder", render(a, &code.source())}};
      if (a.start != 1) row["canonical"] = render(canonicalize(a), &code.source());
      row["bracket"] = to_json(inverse(code, load_y(), canonicalize(a), depth));
      rows.push_back(row);
    } else {
      const auto a = cylinder_of(cj, code.source(), AlphabetTag::source, where);
      const auto br = inverse(code, transported(code, *model_x), canonicalize(a), depth);
      const double expected = cylinder_prob(*model_x, a, budget);
      const double miss = std::max({0.0, br.lo - expected, expected - br.hi});
      const bool pass = miss <= Tolerances{}.bracket;
      ok = ok && pass;
      rows.push_back(Json{{"cylinder", render(a, &code.source())}, {"expected", expected}, {"bracket", to_json(br)},
                          {"miss", miss}, {"verdict", pass ? "pass" : "fail"}});
    }
  }
  report["results"] = rows;
  report["verdict"] = ok ? "pass" : "fail";
  return {ok ? 0 : 1, report};
}

inline std::vector<std::uint64_t> seeds_from(const Json& cfg, std::uint64_t master, std::uint64_t stream) {
  if (cfg.contains("seeds")) return get_as<std::vector<std::uint64_t>>(cfg, "seeds", "config");
  return {derive_seed(master, 2 * stream), derive_seed(master, 2 * stream + 1)};
}

inline RecurrenceSuiteParams recurrence_params(const Json& cfg, std::uint64_t master, std::uint64_t stream, const std::string& where) {
  RecurrenceSuiteParams p;
  p.seeds = seeds_from(cfg, master, stream);
  p.gaps = get_or<std::size_t>(cfg, "gaps", p.gaps, where);
  p.r_max = get_or<std::int64_t>(cfg, "r_max", p.r_max, where);
  p.j_max = get_or<std::size_t>(cfg, "j_max", p.j_max, where);
  p.depth = get_or<std::size_t>(cfg, "depth", p.depth, where);
  p.cap = get_or<double>(cfg, "cap", p.cap, where);
  if (p.seeds.size() < 2) throw InputError(where + ": need at least two seeds");
  return p;
}

inline CommandResult cmd_recurrence(const RunOptions& opt, const std::filesystem::path& trace_dir = ".") {
  Context ctx(opt, "recurrence", {"model", "event", "seeds", "gaps", "r_max", "j_max", "depth", "cap", "trace_out"});
  const auto& cfg = ctx.config();
  for (const char* k : {"model", "event"})
    if (!cfg.contains(k)) throw InputError(std::string("config: missing key '") + k + "'");
  const auto model = ctx.model(cfg["model"], nullptr, nullptr);
  if (model.variant() != ProcessModel::Variant::iid && model.variant() != ProcessModel::Variant::markov)
    throw InputError("config: recurrence laws need an IID or Markov model");
  const auto event = event_from_json(cfg["event"], model.alphabet(), "config.event");
  const auto p = recurrence_params(cfg, ctx.master_seed(), 0, "config");

  Json report = ctx.header();
  report["event"] = event.describe(&model.alphabet());
  const double pc = event_prob(model, event);
  const double kac = kac_expected_return(model, event);
  report["event_prob"] = pc;
  report["expected_return"] = kac;
  report["kac_product"] = kac * pc;
  const auto law = gap_law(model, event);
  Json head = Json::array();
  for (std::int64_t r = 1; r <= p.r_max; ++r) head.push_back(Json{{"r", r}, {"prob", law.at(r)}});
  report["gap_law_head"] = head;
  report["gap_law_truncation"] = Json{{"r_max", law.r_max()}, {"tail", law.tail}, {"contraction", law.contraction}};
  const auto suite = recurrence_suite(model, event, p);
  report["checks"] = to_json(suite);
  if (cfg.contains("trace_out")) {
    const auto path = trace_dir / get_as<std::string>(cfg, "trace_out", "config");
    std::ofstream out(path);
    if (!out) throw InputError(path.string() + ": cannot write trace");
    write_trace(out, simulate_trace(model, event, p.gaps, p.seeds.front()), model.digest(), event.describe(&model.alphabet()),
                p.seeds.front());
    report["trace"] = Json{{"file", get_as<std::string>(cfg, "trace_out", "config")}, {"seed", p.seeds.front()}, {"gaps", p.gaps}};
  }
  report["verdict"] = suite.pass ? "pass" : "fail";
  return {suite.pass ? 0 : 1, report};
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"stationarity", "plain_stationarity", "negative_control", "roundtrip", "theorem2",
                                              "recurrence", "codes", "decomposition", "normalization", "parsing"};
  return names;
}

inline std::vector<CylinderEvent> cylinders_of(const Json& run, const char* key, const Alphabet& a, const std::string& where) {
  std::vector<CylinderEvent> out;
  if (!run.contains(key)) return out;
  if (!run[key].is_array()) throw InputError(where + ": '" + key + "' must be a list");
  std::size_t i = 0;
  for (const auto& c : run[key]) out.push_back(cylinder_of(c, a, AlphabetTag::target, where + "." + key + "[" + std::to_string(i++) + "]"));
  return out;
}

inline SuiteReport run_suite(Context& ctx, const Json& run, std::size_t index) {
  const auto where = "config.runs[" + std::to_string(index) + "]";
  const auto name = get_as<std::string>(run, "suite", where);
  const auto master = ctx.master_seed();
  const auto seed = derive_seed(master, 1000 + index);
  auto need_code_model = [&](std::set<std::string> extra) {
    extra.insert({"suite", "code", "model"});
    check_keys(run, extra, {"code", "model"}, where);
  };
  if (name == "stationarity" || name == "plain_stationarity" || name == "negative_control") {
    need_code_model({"max_len", "max_shift"});
    const auto code = ctx.code(run["code"]);
    const auto m = ctx.model(run["model"], &code.source(), &code);
    const auto len = get_or<std::size_t>(run, "max_len", name == "stationarity" ? 4 : 2, where);
    const auto shift = get_or<std::size_t>(run, "max_shift", 3, where);
    if (name == "stationarity") return stationarity_suite(code, m, len, shift);
    if (name == "plain_stationarity") return plain_stationarity_suite(code, m, len, shift);
    return negative_control_suite(code, m, len, shift);
  }
  if (name == "roundtrip") {
    need_code_model({"depth", "max_len", "require_exact"});
    const auto code = ctx.code(run["code"]);
    const auto m = ctx.model(run["model"], &code.source(), &code);
    return roundtrip_suite(code, m, get_or<std::size_t>(run, "depth", ctx.depth(), where), get_or<std::size_t>(run, "max_len", 3, where),
                           get_or<bool>(run, "require_exact", true, where));
  }
  if (name == "theorem2") {
    need_code_model({"ns", "cylinders"});
    const auto code = ctx.code(run["code"]);
    const auto m = ctx.model(run["model"], &code.source(), &code);
    auto cyl = cylinders_of(run, "cylinders", code.target(), where);
    if (cyl.empty()) throw InputError(where + ": theorem2 needs cylinders");
    return theorem2_suite(code, m, get_or<std::vector<std::size_t>>(run, "ns", {256, 1024, 4096, 10000}, where), cyl);
  }
  if (name == "recurrence") {
    check_keys(run, {"suite", "model", "event", "gaps", "r_max", "j_max", "depth", "cap"}, {"model", "event"}, where);
    const auto m = ctx.model(run["model"], nullptr, nullptr);
    const auto event = event_from_json(run["event"], m.alphabet(), where + ".event");
    return recurrence_suite(m, event, recurrence_params(run, master, 1000 + index, where));
  }
  if (name == "codes") {
    check_keys(run, {"suite", "depth", "codes"}, {}, where);
    const auto depth = get_or<std::size_t>(run, "depth", ctx.depth(), where);
    if (!run.contains("codes")) return code_suite(default_code_expectations(), depth);
    std::vector<CodeExpectation> list;
    std::size_t i = 0;
    for (const auto& e : run["codes"]) {
      const auto w = where + ".codes[" + std::to_string(i++) + "]";
      check_keys(e, {"name", "code", "self_avoiding", "uniquely_decodable", "witness"}, {"code"}, w);
      auto code = ctx.code(e["code"]);
      std::optional<Word> witness;
      if (e.contains("witness")) witness = word_of(e["witness"], code.target(), w);
      std::optional<bool> sa, ud;
      if (e.contains("self_avoiding")) sa = get_as<bool>(e, "self_avoiding", w);
      if (e.contains("uniquely_decodable")) ud = get_as<bool>(e, "uniquely_decodable", w);
      list.push_back({get_or<std::string>(e, "name", e["code"].get<std::string>(), w), std::move(code), sa, ud, witness});
    }
    return code_suite(list, depth);
  }
  if (name == "decomposition") {
    need_code_model({"cylinder"});
    const auto code = ctx.code(run["code"]);
    const auto m = ctx.model(run["model"], &code.source(), &code);
    if (!run.contains("cylinder")) throw InputError(where + ": missing key 'cylinder'");
    return decomposition_suite(code, m, cylinder_of(run["cylinder"], code.target(), AlphabetTag::target, where + ".cylinder"));
  }
  if (name == "normalization") {
    need_code_model({"depth", "mc_steps", "birkhoff"});
    const auto code = ctx.code(run["code"]);
    const auto m = ctx.model(run["model"], &code.source(), &code);
    NormalizationParams p;
    p.depth = get_or<std::size_t>(run, "depth", ctx.depth(), where);
    p.mc_steps = get_or<std::size_t>(run, "mc_steps", p.mc_steps, where);
    p.seed = seed;
    p.birkhoff = cylinders_of(run, "birkhoff", code.target(), where);
    return normalization_suite(code, m, p);
  }
  if (name == "parsing") {
    need_code_model({"windows"});
    const auto code = ctx.code(run["code"]);
    const auto m = ctx.model(run["model"], &code.source(), &code);
    ParsingParams p;
    p.windows = get_or<std::size_t>(run, "windows", p.windows, where);
    p.seed = seed;
    return parsing_suite(code, m, p);
  }
  throw InputError(where + ": unknown suite '" + name + "'");
}

inline CommandResult cmd_suite(const RunOptions& opt, std::ostream& log = std::cerr) {
  Context ctx(opt, "suite", {"suite", "runs", "depth", "budget"});
  const auto& cfg = ctx.config();
  const auto selected = get_or<std::string>(cfg, "suite", "all", "config");
  const auto& names = suite_names();
  if (selected != "all" && std::find(names.begin(), names.end(), selected) == names.end())
    throw InputError("unknown suite '" + selected + "'");
  if (!cfg.contains("runs") || !cfg["runs"].is_array()) throw InputError("config: 'runs' must be a list");
  Json report = ctx.header();
  report["selected"] = selected;
  report["tolerances"] = to_json(Tolerances{});
  Json suites = Json::array();
  bool ok = true;
  std::size_t ran = 0;
  for (std::size_t i = 0; i < cfg["runs"].size(); ++i) {
    const auto& run = cfg["runs"][i];
    const auto name = get_as<std::string>(run, "suite", "config.runs[" + std::to_string(i) + "]");
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw InputError("config.runs[" + std::to_string(i) + "]: unknown suite '" + name + "'");
    if (selected != "all" && name != selected) continue;
    const auto rep = run_suite(ctx, run, i);
    log << "suite " << rep.name << " [run " << i << "]: " << (rep.pass ? "pass" : "fail") << " (" << rep.wall_seconds << " s)\n";
    suites.push_back(to_json(rep));
    ok = ok && rep.pass;
    ++ran;
  }
  if (ran == 0) throw InputError("no configured run for suite '" + selected + "'");
  report["config_digest"] = ctx.header()["config_digest"];
  report["suites"] = suites;
  report["verdict"] = ok ? "pass" : "fail";
  return {ok ? 0 : 1, report};
}

}  // namespace normtrans::cli

#endif  // NORMTRANS_CLI_HPP
