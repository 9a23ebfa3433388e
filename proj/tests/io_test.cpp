#include <gtest/gtest.h>

#include <filesystem>

#include "normtrans/io.hpp"

using namespace normtrans;

namespace {

const std::filesystem::path kFixtures = NT_FIXTURES;

std::string input_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Json, SyntaxErrorsCarryLineAndColumn) {
  const auto msg = input_error([] { parse_json("{\n  \"a\": 1,\n  \"b\": ]\n}", "cfg"); });
  EXPECT_NE(msg.find("cfg:3:"), std::string::npos) << msg;
  const auto missing = input_error([] { read_json_file("/nonexistent/x.json"); });
  EXPECT_NE(missing.find("cannot open"), std::string::npos);
}

TEST(Json, VersionAndKeyChecks) {
  EXPECT_NE(input_error([] { check_version(Json::parse(R"({"format_version": 2})"), "f"); }), "");
  EXPECT_NE(input_error([] { check_version(Json::parse(R"({})"), "f"); }), "");
  EXPECT_EQ(input_error([] { check_version(Json::parse(R"({"format_version": 1})"), "f"); }), "");
  const auto unknown = input_error([] { check_keys(Json::parse(R"({"a": 1, "zz": 2})"), {"a"}, {}, "f"); });
  EXPECT_NE(unknown.find("unknown key 'zz'"), std::string::npos);
  const auto missing = input_error([] { check_keys(Json::parse(R"({"a": 1})"), {"a", "b"}, {"b"}, "f"); });
  EXPECT_NE(missing.find("missing key 'b'"), std::string::npos);
}

TEST(Codes, AllBundledFixturesLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(kFixtures / "codes")) {
    const auto code = code_from_json(read_json_file(entry.path()), entry.path().string());
    EXPECT_FALSE(code.table().empty()) << entry.path();
  }
  const auto emb = code_from_json(read_json_file(kFixtures / "codes/comma_embedded.json"));
  EXPECT_EQ(emb.kind(), CodeKind::comma_embedded);
  EXPECT_EQ(emb.codeword(emb.source().id_of("b")), (Word{0, 1, 0}));
  const auto u = code_from_json(read_json_file(kFixtures / "codes/unary_12.json"));
  EXPECT_EQ(u.codeword(2), (Word{0, 0, 1}));
}

TEST(Codes, SchemaErrors) {
  auto load = [](const char* text) { return [text] { code_from_json(Json::parse(text)); }; };
  EXPECT_NE(input_error(load(R"({"format_version": 1, "kind": "huffman"})")), "");
  EXPECT_NE(input_error(load(R"({"format_version": 1, "kind": "unary", "support": ["a"]})")), "");
  EXPECT_NE(input_error(load(R"({"format_version": 1, "kind": "unary", "support": [1], "extra": 0})")), "");
  EXPECT_NE(input_error(load(R"({"format_version": 1, "kind": "generic", "source": ["x"], "target": ["0","1"]})")), "");
  // Library validation surfaces as a typed error.
  EXPECT_THROW(code_from_json(Json::parse(R"({"format_version": 1, "kind": "comma_separated", "source": ["a","b"],
      "target": ["0","1"], "separator": "1", "words": {"a": "1", "b": "0"}})")),
               Error);
}

TEST(Models, BundledFixturesLoad) {
  const auto u = code_from_json(read_json_file(kFixtures / "codes/unary_12.json"));
  const auto m = model_from_json(read_json_file(kFixtures / "models/iid_uniform_12.json"), &u.source(), &u, "m");
  EXPECT_EQ(m.variant(), ProcessModel::Variant::iid);
  EXPECT_EQ(m.alphabet().id_of("2"), 2);
  const auto mix = model_from_json(read_json_file(kFixtures / "models/mixture_points.json"), &u.source(), &u, "m");
  EXPECT_EQ(mix.components().size(), 2u);
  const auto push = model_from_json(read_json_file(kFixtures / "models/pushforward_unary_12.json"), &u.source(), &u, "m");
  EXPECT_FALSE(push.is_stationary());
  const auto two = model_from_json(read_json_file(kFixtures / "models/two_state.json"), nullptr, nullptr, "m");
  EXPECT_NEAR(two.law().pi(1), 1.0 / 6, 1e-15);
  const auto coin = model_from_json(read_json_file(kFixtures / "models/coin.json"), nullptr, nullptr, "m");
  EXPECT_EQ(coin.alphabet().id_of("T"), 1);
}

TEST(Models, SchemaErrors) {
  auto load = [](const char* text) { return [text] { model_from_json(Json::parse(text), nullptr, nullptr, "m"); }; };
  EXPECT_NE(input_error(load(R"({"format_version": 1, "variant": "iid", "support": [1,2]})")), "");
  EXPECT_NE(input_error(load(R"({"format_version": 1, "variant": "markov", "support": [1,2], "K": [[1,0,0],[0,1,0]]})")), "");
  EXPECT_NE(input_error(load(R"({"format_version": 1, "variant": "pushforward", "base": {}})")), "");
  EXPECT_NE(input_error(load(R"({"format_version": 1, "variant": "levy"})")), "");
  EXPECT_NE(input_error(load(R"({"format_version": 1, "variant": "iid", "support": [1,2], "p": "x"})")), "");
  EXPECT_THROW(model_from_json(Json::parse(R"({"format_version": 1, "variant": "iid", "support": [1,2], "p": [0.5, 0.6]})"),
                               nullptr, nullptr, "m"),
               Error);
  // Support labels must exist in the code's source alphabet.
  const auto u = code_from_json(read_json_file(kFixtures / "codes/unary_12.json"));
  EXPECT_THROW(model_from_json(Json::parse(R"({"format_version": 1, "variant": "iid", "support": [1,5], "p": [0.5,0.5]})"),
                               &u.source(), &u, "m"),
               Error);
}

TEST(Cylinders, WordsFromStringsOrArrays) {
  const auto a = Alphabet::of_labels(AlphabetTag::source, {"10", "20"});
  const auto c = cylinder_of(Json::parse(R"({"start": -1, "word": ["10", 20]})"), a, AlphabetTag::source, "c");
  EXPECT_EQ(c.start, -1);
  EXPECT_EQ(c.word, (Word{10, 20}));
  EXPECT_NE(input_error([&] { cylinder_of(Json::parse(R"({"start": 1, "word": "12"})"), a, AlphabetTag::source, "c"); }), "");
  EXPECT_NE(input_error([&] { cylinder_of(Json::parse(R"({"start": 1, "word": []})"), a, AlphabetTag::source, "c"); }), "");
  const auto bits = Alphabet::of_labels(AlphabetTag::target, {"0", "1"});
  const auto b = cylinder_of(Json::parse(R"({"start": 2, "word": "011"})"), bits, AlphabetTag::target, "c");
  EXPECT_EQ(b.word, (Word{0, 1, 1}));
  EXPECT_EQ(cylinder_to_json(b, bits).dump(), R"({"start":2,"word":["0","1","1"]})");
}

TEST(Events, ExactlyOneForm) {
  const auto a = Alphabet::of_labels(AlphabetTag::source, {"H", "T"});
  EXPECT_EQ(event_from_json(Json::parse(R"({"states": ["H"]})"), a, "e").states, (std::vector<SymbolId>{0}));
  EXPECT_TRUE(event_from_json(Json::parse(R"({"cylinder": {"start": 0, "word": "HT"}})"), a, "e").cylinder);
  EXPECT_NE(input_error([&] { event_from_json(Json::parse(R"({})"), a, "e"); }), "");
  EXPECT_NE(input_error([&] {
              event_from_json(Json::parse(R"({"states": ["H"], "cylinder": {"start": 0, "word": "H"}})"), a, "e");
            }),
            "");
}

TEST(Reports, SerializationOmitsWallTime) {
  SuiteReport r{"x", {}, {}, true, 12.5};
  r.close("k", "in", 1, 1, 0);
  const auto j = to_json(r);
  EXPECT_EQ(j.dump().find("wall"), std::string::npos);
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["cases"][0]["verdict"], "pass");
  const auto b = to_json(Bracket{0.25, 0.5, 3, false, 0.4});
  EXPECT_EQ(b["width"], 0.25);
}
