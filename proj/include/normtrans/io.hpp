#ifndef NORMTRANS_IO_HPP
#define NORMTRANS_IO_HPP

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "normtrans/codes.hpp"
#include "normtrans/measures.hpp"
#include "normtrans/recurrence.hpp"
#include "normtrans/transport.hpp"
#include "normtrans/verify.hpp"

namespace normtrans {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Malformed or schema-violating input; the CLI maps it to exit status 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline Json parse_json(const std::string& text, const std::string& name) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte);
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw InputError(name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

/// Rejects keys outside `allowed` and enforces required ones.
inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::set<std::string>& required,
                       const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [k, _] : j.items())
    if (!allowed.count(k)) throw InputError(where + ": unknown key '" + k + "'");
  for (const auto& k : required)
    if (!j.contains(k)) throw InputError(where + ": missing key '" + k + "'");
}

inline void check_version(const Json& j, const std::string& where) {
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() || j["format_version"].get<int>() != kFormatVersion)
    throw InputError(where + ": format_version must be " + std::to_string(kFormatVersion));
}

template <class T>
T get_as(const Json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(where + ": key '" + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const Json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? get_as<T>(j, key, where) : fallback;
}

inline std::string label_of(const Json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_unsigned() || v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw InputError(where + ": symbol labels must be strings or integers");
}

inline std::vector<std::string> labels_of(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw InputError(where + ": expected a nonempty label list");
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(label_of(x, where));
  return out;
}

/// A word is a label array, or a string of single-character labels.
inline Word word_of(const Json& v, const Alphabet& a, const std::string& where) {
  Word w;
  if (v.is_string()) {
    if (!a.all_labels_single_char() && !v.get<std::string>().empty())
      throw InputError(where + ": string words need single-character labels; use a label array");
    for (char ch : v.get<std::string>()) w.push_back(a.id_of(std::string(1, ch)));
    return w;
  }
  if (!v.is_array()) throw InputError(where + ": a word is a string or a label array");
  for (const auto& x : v) w.push_back(a.id_of(label_of(x, where)));
  return w;
}

inline CylinderEvent cylinder_of(const Json& j, const Alphabet& a, AlphabetTag tag, const std::string& where) {
  check_keys(j, {"start", "word"}, {"start", "word"}, where);
  auto w = word_of(j["word"], a, where);
  if (w.empty()) throw InputError(where + ": cylinder word must be nonempty");
  return CylinderEvent(tag, get_as<Coord>(j, "start", where), std::move(w));
}

inline Json cylinder_to_json(const CylinderEvent& c, const Alphabet& a) {
  Json w = Json::array();
  for (auto s : c.word) w.push_back(a.render(s));
  return Json{{"start", c.start}, {"word", w}};
}

inline std::map<SymbolId, Word> word_map_of(const Json& j, const Alphabet& src, const Alphabet& tgt, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object from source labels to words");
  std::map<SymbolId, Word> out;
  for (const auto& [k, v] : j.items()) out[src.id_of(k)] = word_of(v, tgt, where + "." + k);
  return out;
}

inline FinitaryCode code_from_json(const Json& j, const std::string& where = "code") {
  check_version(j, where);
  const auto kind = get_as<std::string>(j, "kind", where);
  if (kind == "unary") {
    check_keys(j, {"format_version", "kind", "support"}, {"support"}, where);
    std::vector<SymbolId> support;
    for (const auto& l : labels_of(j["support"], where)) {
      if (l.empty() || !std::all_of(l.begin(), l.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw InputError(where + ": unary support must be nonnegative integers");
      support.push_back(std::stoll(l));
    }
    return make_unary(support);
  }
  auto src_of = [&] { return Alphabet::of_labels(AlphabetTag::source, labels_of(j["source"], where + ".source")); };
  auto tgt_of = [&] { return Alphabet::of_labels(AlphabetTag::target, labels_of(j["target"], where + ".target")); };
  if (kind == "comma_separated") {
    check_keys(j, {"format_version", "kind", "source", "target", "separator", "words"},
               {"source", "target", "separator", "words"}, where);
    const auto src = src_of(), tgt = tgt_of();
    return make_comma_separated(src, tgt, word_map_of(j["words"], src, tgt, where + ".words"),
                                tgt.id_of(label_of(j["separator"], where)));
  }
  if (kind == "comma_embedded") {
    check_keys(j, {"format_version", "kind", "source", "target", "separator", "suffix_len", "words", "suffixes"},
               {"source", "target", "separator", "suffix_len", "words", "suffixes"}, where);
    const auto src = src_of(), tgt = tgt_of();
    return make_comma_embedded(src, tgt, word_map_of(j["words"], src, tgt, where + ".words"),
                               tgt.id_of(label_of(j["separator"], where)),
                               word_map_of(j["suffixes"], src, tgt, where + ".suffixes"),
                               get_as<std::size_t>(j, "suffix_len", where));
  }
  if (kind == "generic") {
    check_keys(j, {"format_version", "kind", "source", "target", "table"}, {"source", "target", "table"}, where);
    const auto src = src_of(), tgt = tgt_of();
    return make_generic(src, tgt, word_map_of(j["table"], src, tgt, where + ".table"));
  }
  throw InputError(where + ": unknown code kind '" + kind + "'");
}

/// Support labels resolve against `source` when given (the code's source
/// alphabet), otherwise they define the alphabet themselves.
inline Alphabet support_alphabet(const Json& v, const Alphabet* source, const std::string& where) {
  const auto labels = labels_of(v, where);
  if (!source) return Alphabet::of_labels(AlphabetTag::source, labels);
  std::vector<Symbol> s;
  for (const auto& l : labels) s.push_back({source->id_of(l), l});
  return Alphabet(source->tag(), std::move(s));
}

inline ProcessModel model_from_json(const Json& j, const Alphabet* source, const FinitaryCode* code, const std::string& where,
                                    bool top = true) {
  if (top) check_version(j, where);
  const auto variant = get_as<std::string>(j, "variant", where);
  const std::set<std::string> common = top ? std::set<std::string>{"format_version", "variant"} : std::set<std::string>{"variant"};
  auto keys = [&](std::set<std::string> extra, std::set<std::string> required) {
    extra.insert(common.begin(), common.end());
    check_keys(j, extra, required, where);
  };
  if (variant == "iid") {
    keys({"support", "p"}, {"support", "p"});
    return ProcessModel::iid(support_alphabet(j["support"], source, where), get_as<std::vector<double>>(j, "p", where));
  }
  if (variant == "markov") {
    keys({"support", "K", "init"}, {"support", "K"});
    const auto rows = get_as<std::vector<std::vector<double>>>(j, "K", where);
    Matrix k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.size()) throw InputError(where + ": K must be square");
      for (std::size_t c = 0; c < rows.size(); ++c) k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    std::optional<Vector> init;
    if (j.contains("init")) {
      const auto v = get_as<std::vector<double>>(j, "init", where);
      init = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    return ProcessModel::markov(support_alphabet(j["support"], source, where), k, init);
  }
  if (variant == "mixture") {
    keys({"weights", "components"}, {"weights", "components"});
    std::vector<ProcessModel> comps;
    std::size_t i = 0;
    for (const auto& c : j["components"]) comps.push_back(model_from_json(c, source, code, where + ".components[" + std::to_string(i++) + "]", false));
    return ProcessModel::mixture(get_as<std::vector<double>>(j, "weights", where), std::move(comps));
  }
  if (variant == "pushforward") {
    keys({"base"}, {"base"});
    if (!code) throw InputError(where + ": a pushforward model needs a code in the same configuration");
    return ProcessModel::pushforward(*code, model_from_json(j["base"], &code->source(), code, where + ".base", false));
  }
  throw InputError(where + ": unknown model variant '" + variant + "'");
}

inline EventSet event_from_json(const Json& j, const Alphabet& a, const std::string& where) {
  check_keys(j, {"states", "cylinder"}, {}, where);
  if (j.contains("states") == j.contains("cylinder")) throw InputError(where + ": give exactly one of 'states' or 'cylinder'");
  if (j.contains("states")) {
    std::vector<SymbolId> s;
    for (const auto& l : labels_of(j["states"], where)) s.push_back(a.id_of(l));
    return EventSet::of_states(s);
  }
  return EventSet::of_cylinder(cylinder_of(j["cylinder"], a, AlphabetTag::source, where + ".cylinder"));
}

// ---------------------------------------------------------------------------
// Reports

inline Json number_or_null(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const Tolerances& t) {
  return Json{{"exact", t.exact}, {"bracket", t.bracket}, {"monte_carlo_sigmas", t.sigmas},
              {"cesaro_final", t.cesaro_final}, {"tv", t.tv}, {"decomposition_gap", t.decomposition_gap}};
}

inline Json to_json(const SuiteReport& r) {
  Json cases = Json::array();
  for (const auto& c : r.cases)
    cases.push_back(Json{{"key", c.key}, {"inputs", c.inputs}, {"expected", c.expected}, {"got", c.got},
                         {"residual", number_or_null(c.residual)}, {"tolerance", number_or_null(c.tolerance)},
                         {"verdict", c.pass ? "pass" : "fail"}});
  return Json{{"suite", r.name}, {"tolerances", to_json(r.tolerances)}, {"cases", cases},
              {"failures", r.failures()}, {"verdict", r.pass ? "pass" : "fail"}};
}

inline Json to_json(const Bracket& b) {
  return Json{{"lo", b.lo}, {"hi", b.hi}, {"estimate", b.estimate}, {"width", b.width()}, {"depth", b.depth}, {"exact", b.exact}};
}

inline Json to_json(const TransportResult& t) {
  Json comps = Json::array();
  for (const auto& c : t.components)
    comps.push_back(Json{{"weight", c.weight}, {"value", c.value}, {"numerator", c.numerator}, {"denominator", c.denominator}});
  return Json{{"value", t.value}, {"numerator", t.numerator}, {"denominator", t.denominator}, {"components", comps}};
}

}  // namespace normtrans

#endif  // NORMTRANS_IO_HPP
