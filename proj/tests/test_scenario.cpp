#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "bierstar/scenario.hpp"

using namespace bierstar;

namespace {

std::string read_file(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> errors_of(const std::string& text, const std::vector<std::string>& sets = {}) {
  try {
    load_scenario_text(text, sets);
  } catch (const ValidationError& e) {
    return e.errors();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errs, const std::string& needle) {
  return std::any_of(errs.begin(), errs.end(), [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

const std::string kTiny = read_file(SCENARIO_DIR "/tiny.toml");

}  // namespace

TEST(Toml, ScalarsTablesAndArrays) {
  const auto t = toml::parse(R"(# comment
a = 1_000
b = -2.5e1
c = "x\ty\n\"q\""
d = true
e = [1, 2.5,
     3]   # trailing comment
"quoted key" = 'lit'
[sec.sub]
k = "v"
[[arr]]
x = 1
[[arr]]
x = 2
)");
  EXPECT_EQ(t.at("a").as_int(), 1000);
  EXPECT_DOUBLE_EQ(t.at("b").as_number(), -25.0);
  EXPECT_EQ(t.at("c").as_string(), "x\ty\n\"q\"");
  EXPECT_TRUE(t.at("d").as_bool());
  ASSERT_EQ(t.at("e").as_array().size(), 3u);
  EXPECT_DOUBLE_EQ(t.at("e").as_array()[1].as_number(), 2.5);
  EXPECT_EQ(t.at("quoted key").as_string(), "lit");
  EXPECT_EQ(t.at("sec").as_table().at("sub").as_table().at("k").as_string(), "v");
  ASSERT_EQ(t.at("arr").as_array().size(), 2u);
  EXPECT_EQ(t.at("arr").as_array()[1].as_table().at("x").as_int(), 2);
}

TEST(Toml, ErrorsCarryLineNumbers) {
  try {
    toml::parse("a = 1\nb = \n", "f.toml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("f.toml:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(toml::parse("a = 1\na = 2\n"), Error);
  EXPECT_THROW(toml::parse("a = \"open\n"), Error);
  EXPECT_THROW(toml::parse("a = [[1], [2]]\n"), Error);
  EXPECT_THROW(toml::parse("[t\n"), Error);
}

TEST(Toml, OverrideValuesAndPaths) {
  EXPECT_EQ(toml::parse_override_value("7").as_int(), 7);
  EXPECT_DOUBLE_EQ(toml::parse_override_value("0.25").as_number(), 0.25);
  EXPECT_TRUE(toml::parse_override_value("true").as_bool());
  EXPECT_EQ(toml::parse_override_value("hello").as_string(), "hello");
  EXPECT_EQ(toml::parse_override_value("[1, 2]").as_array().size(), 2u);
  auto t = toml::parse("[[shells]]\nplanes = 4\n");
  toml::set_path(t, "shells.0.planes", toml::parse_override_value("6"));
  toml::set_path(t, "x.y", toml::parse_override_value("1"));
  EXPECT_EQ(t.at("shells").as_array()[0].as_table().at("planes").as_int(), 6);
  EXPECT_EQ(t.at("x").as_table().at("y").as_int(), 1);
  EXPECT_THROW(toml::set_path(t, "shells.3.planes", toml::parse_override_value("1")), Error);
}

TEST(Scenario, TinyLoads) {
  const ScenarioSpec s = load_scenario(SCENARIO_DIR "/tiny.toml");
  EXPECT_EQ(s.name, "tiny");
  EXPECT_EQ(s.seed_value(), 7u);
  EXPECT_EQ(s.epoch_count(), 3);
  ASSERT_EQ(s.shells.size(), 1u);
  EXPECT_EQ(s.shells[0].planes, 4);
  EXPECT_EQ(s.shells[0].pattern, WalkerPattern::Delta);
  EXPECT_EQ(s.methods.size(), 8u);
  EXPECT_TRUE(s.has(Method::GeoR1));
  ASSERT_EQ(s.groups.size(), 1u);
  EXPECT_EQ(s.groups[0].source, "sat");
  EXPECT_EQ(s.groups[0].source_sat, (SatId{0, 0, 0}));
  EXPECT_EQ(s.experiments.reach_seeds, 4);
  EXPECT_EQ(s.refresh_interval_s, 30);
  EXPECT_EQ(s.timeout_s, 90);
}

TEST(Scenario, BundledScenariosValidate) {
  for (const char* f : {"tiny.toml", "starlink_like.toml", "oneweb_like.toml"}) {
    const ScenarioSpec s = load_scenario(std::string(SCENARIO_DIR "/") + f);
    EXPECT_TRUE(validate(s).empty()) << f;
  }
  const ScenarioSpec st = load_scenario(SCENARIO_DIR "/starlink_like.toml");
  EXPECT_EQ(st.shells[0].planes * st.shells[0].sats_per_plane, 72 * 22);
  const ScenarioSpec ow = load_scenario(SCENARIO_DIR "/oneweb_like.toml");
  EXPECT_EQ(ow.shells[0].pattern, WalkerPattern::Star);
}

TEST(Scenario, OverridesApply) {
  const ScenarioSpec s = load_scenario_text(kTiny, {"seed=99", "shells.0.planes=6", "resolution=1", "failures.model=random",
                                                    "failures.link_rate=0.1", "methods=[\"BierStar\"]"});
  EXPECT_EQ(s.seed_value(), 99u);
  EXPECT_EQ(s.shells[0].planes, 6);
  EXPECT_EQ(s.resolution, 1);
  EXPECT_EQ(s.failures.model, "random");
  EXPECT_DOUBLE_EQ(s.failures.link_rate, 0.1);
  EXPECT_EQ(s.methods, std::vector<Method>{Method::BierStar});
  EXPECT_THROW(load_scenario_text(kTiny, {"noequals"}), Error);
}

TEST(Scenario, ErrorsAreAggregated) {
  const auto errs = errors_of(kTiny, {"resolution=9", "ttl=0", "terminals.count=0"});
  EXPECT_GE(errs.size(), 3u);
  EXPECT_TRUE(mentions(errs, "resolution out of range 0..5"));
  EXPECT_TRUE(mentions(errs, "ttl"));
  EXPECT_TRUE(mentions(errs, "terminals.count"));
}

TEST(Scenario, EmptyConstellationRejected) {
  std::string text = kTiny;
  const auto a = text.find("[[shells]]"), b = text.find("[terminals]");
  text.erase(a, b - a);
  const auto errs = errors_of(text);
  EXPECT_TRUE(mentions(errs, "constellation is empty"));
  // the unknown source satellite is reported alongside
  EXPECT_TRUE(mentions(errs, "source_sat"));
}

TEST(Scenario, UnknownKeysAndBadTypes) {
  EXPECT_TRUE(mentions(errors_of(kTiny, {"colour=1"}), "colour"));
  EXPECT_TRUE(mentions(errors_of(kTiny, {"epoch_s=fast"}), "epoch_s"));
  EXPECT_TRUE(mentions(errors_of(kTiny, {"methods=[\"Flooding\"]"}), "Flooding"));
  EXPECT_TRUE(mentions(errors_of(kTiny, {"duration_s=50"}), "multiple of epoch_s"));
  EXPECT_TRUE(mentions(errors_of(kTiny, {"groups.0.members=some"}), "members"));
  EXPECT_TRUE(mentions(errors_of(kTiny, {"groups.0.source_sat=0-9-0"}), "source_sat"));
  EXPECT_TRUE(mentions(errors_of(kTiny, {"failures.link_rate=1.5"}), "link_rate"));
  EXPECT_TRUE(mentions(errors_of(kTiny, {"terminals.generator=grid"}), "generator"));
}

TEST(Scenario, SeedIsRequired) {
  std::string text = kTiny;
  text.erase(text.find("seed = 7"), 8);
  EXPECT_TRUE(mentions(errors_of(text), "seed is required"));
}

TEST(Scenario, ParseErrorsSurfaceAsValidation) {
  try {
    load_scenario_text("name = \n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
  }
  try {
    load_scenario("/nonexistent/x.toml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(Scenario, MethodNamesRoundTrip) {
  for (const auto& [m, name] : method_names()) {
    EXPECT_EQ(to_string(m), name);
    EXPECT_EQ(method_from_string(name), m);
  }
  EXPECT_FALSE(method_from_string("bierstar").has_value());
  EXPECT_TRUE(is_bitstring_method(Method::GeoR0));
  EXPECT_FALSE(is_bitstring_method(Method::PureGreedy));
  EXPECT_EQ(greedy_kind(Method::GreedyPerimeter), GreedyKind::GreedyPerimeter);
  EXPECT_FALSE(greedy_kind(Method::BierStar).has_value());
}
