#include <string>
#include <variant>

#include "coordfeas/errors.hpp"
#include "coordfeas/scenario_io.hpp"
#include "doctest.h"

using namespace coordfeas;

namespace {

const char* kFullDoc = R"({
  "vehicles": [
    {"kind": "unicycle", "initial": [0, 0, 0]},
    {"kind": "constant_speed", "params": {"speed": 1.5}, "initial": [-2, 0.5, 0.1]},
    {"kind": "car", "params": {"wheelbase": 0.5}, "initial": [3, -1, 0.2, -0.1]}
  ],
  "references": {
    "fwd": {"type": "sinusoid", "amplitude": 2.0, "rate": 1.0, "phase": 0.5},
    "turn": {"type": "constant", "value": 0.25},
    "ramp": {"type": "piecewise", "points": [[0.0, 1.0], [0.5, 1.0], [0.6, -1.0]]}
  },
  "constraints": [
    {"type": "speed_track", "i": 0, "refs": ["fwd", "turn"]},
    {"type": "distance_band", "i": 0, "j": 1, "params": {"d_minus": 1.0, "d_plus": 3.0}},
    {"type": "visibility", "i": 0, "j": 2, "params": {"cone": 0.4}},
    {"type": "heading_eq", "i": 1, "j": 2, "params": {"delta": -0.1}},
    {"type": "heading_band", "i": 0, "j": 1, "params": {"delta_minus": -0.5, "delta_plus": 0.5}},
    {"type": "distance_eq", "i": 0, "j": 2, "params": {"d": 2.0}}
  ],
  "mode": {"type": "tree", "parent": [-1, 0, 0]},
  "sim": {
    "duration": 2.0, "step": 0.001, "integrator": "euler",
    "projection": false, "projection_tol": 1e-10,
    "eps_act": 1e-5, "margin": 0.01, "bound": 5.0,
    "cruise": [0.1, 0, 0, 0.2, 0],
    "seed": 42
  },
  "outputs": {"csv": "traj.csv", "report": "report.json"}
})";

std::string parse_error_path(const std::string& text) {
  try {
    parse_scenario_text(text, "doc");
  } catch (const ParseError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_SUITE("scenario_io") {

TEST_CASE("fnv1a64 matches the reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("abc") == 0xe71fa2190541574bULL);
  CHECK(fnv1a64("coordfeas") == 0x518715e6cedd0e33ULL);
  CHECK(digest_string("abc") == "fnv1a64:e71fa2190541574b");
}

TEST_CASE("a full document parses field by field") {
  const ScenarioFile file = parse_scenario_text(kFullDoc, "full.json");
  const Scenario& s = file.scenario;

  REQUIRE(s.kinds.size() == 3);
  CHECK(std::holds_alternative<Unicycle>(s.kinds[0]));
  REQUIRE(std::holds_alternative<ConstantSpeed>(s.kinds[1]));
  CHECK(std::get<ConstantSpeed>(s.kinds[1]).speed == 1.5);
  REQUIRE(std::holds_alternative<CarLike>(s.kinds[2]));
  CHECK(std::get<CarLike>(s.kinds[2]).wheelbase == 0.5);
  REQUIRE(s.initial.size() == 3);
  CHECK(s.initial[1](0) == -2.0);
  CHECK(s.initial[2].size() == 4);
  CHECK(s.initial[2](3) == -0.1);

  REQUIRE(s.constraints.size() == 6);
  {
    REQUIRE(std::holds_alternative<SpeedTrack>(s.constraints[0]));
    const auto& st = std::get<SpeedTrack>(s.constraints[0]);
    CHECK(st.i == 0);
    REQUIRE(st.refs.size() == 2);
    REQUIRE(std::holds_alternative<Sinusoid>(st.refs[0]));
    CHECK(std::get<Sinusoid>(st.refs[0]).amplitude == 2.0);
    CHECK(std::get<Sinusoid>(st.refs[0]).phase == 0.5);
    REQUIRE(std::holds_alternative<ConstantRef>(st.refs[1]));
    CHECK(std::get<ConstantRef>(st.refs[1]).value == 0.25);
  }
  {
    REQUIRE(std::holds_alternative<DistanceBand>(s.constraints[1]));
    const auto& band = std::get<DistanceBand>(s.constraints[1]);
    CHECK(band.i == 0);
    CHECK(band.j == 1);
    CHECK(band.d_minus == 1.0);
    CHECK(band.d_plus == 3.0);
  }
  CHECK(std::get<Visibility>(s.constraints[2]).cone == 0.4);
  CHECK(std::get<HeadingEq>(s.constraints[3]).delta == -0.1);
  CHECK(std::get<HeadingBand>(s.constraints[4]).delta_plus == 0.5);
  CHECK(std::get<DistanceEq>(s.constraints[5]).d == 2.0);

  REQUIRE(s.tree.has_value());
  CHECK(s.tree->parent == std::vector<int>{-1, 0, 0});

  CHECK(s.duration == 2.0);
  CHECK(s.step == 0.001);
  CHECK(s.integrator == Integrator::Euler);
  CHECK_FALSE(s.projection);
  CHECK(s.projection_tol == 1e-10);
  CHECK(s.eps_act == 1e-5);
  CHECK(s.margin == 0.01);
  CHECK(s.bound == 5.0);
  REQUIRE(s.cruise.size() == 5);
  CHECK(s.cruise(3) == 0.2);
  CHECK(s.seed == 42);

  CHECK(file.csv_path == "traj.csv");
  CHECK(file.report_path == "report.json");
  CHECK(file.digest.substr(0, 8) == "fnv1a64:");
  CHECK(file.digest.size() == 8 + 16);
  CHECK(file.digest == digest_string(kFullDoc));
}

TEST_CASE("omitted sections fall back to defaults") {
  const ScenarioFile file =
      parse_scenario_text(R"({"vehicles": [{"kind": "unicycle", "initial": [1, 2, 3]}]})");
  const Scenario& s = file.scenario;
  CHECK(s.kinds.size() == 1);
  CHECK(s.constraints.empty());
  CHECK_FALSE(s.tree.has_value());
  CHECK(s.duration == 0.0);
  CHECK(s.step == 1e-3);
  CHECK(s.integrator == Integrator::RK4);
  CHECK(s.projection);
  CHECK(s.projection_tol == 1e-12);
  CHECK(s.eps_act == kDefaultActivationEps);
  CHECK(s.margin == 0.0);
  CHECK(s.bound == 10.0);
  CHECK(s.cruise.size() == 0);
  CHECK(s.seed == 0);
  CHECK(file.csv_path.empty());
  CHECK(file.report_path.empty());
}

TEST_CASE("parse errors carry the offending field path") {
  CHECK(parse_error_path("not json at all") == "doc");
  CHECK(parse_error_path("[1, 2]") == "doc");
  CHECK(parse_error_path(R"({"vehicles": []})") == "vehicles");
  CHECK(parse_error_path(R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,0]}], "bogus": 1})") ==
        "bogus");
  CHECK(parse_error_path(R"({"vehicles": [{"initial": [0,0,0]}]})") == "vehicles[0].kind");
  CHECK(parse_error_path(R"({"vehicles": [{"kind": "hovercraft", "initial": [0,0,0]}]})") ==
        "vehicles[0].kind");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,0], "speed": 1}]})") ==
        "vehicles[0].speed");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "constant_speed", "initial": [0,0,0]}]})") ==
        "vehicles[0].params");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,"x"]}]})") ==
        "vehicles[0].initial[2]");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,0]}], "sim": {"integrator": "leapfrog"}})") ==
        "sim.integrator");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,0]}], "sim": {"duration": "long"}})") ==
        "sim.duration");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,0]}], "mode": {"type": "ring"}})") ==
        "mode.type");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,0]}],
                "constraints": [{"type": "speed_track", "i": 0, "refs": ["missing", "also"]}]})") ==
        "constraints[0].refs[0]");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,0]}, {"kind": "unicycle", "initial": [1,0,0]}],
                "constraints": [{"type": "visibility", "i": 0, "j": 1, "params": {}}]})") ==
        "constraints[0].params.cone");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,0]}],
                "references": {"r": {"type": "warble"}}})") ==
        "references.r.type");
  CHECK(parse_error_path(
            R"({"vehicles": [{"kind": "unicycle", "initial": [0,0,0]}],
                "references": {"r": {"type": "piecewise", "points": [[0, 1], [2]]}}})") ==
        "references.r.points[1]");
}

TEST_CASE("serialization round-trips and is canonical") {
  const ScenarioFile first = parse_scenario_text(kFullDoc, "full.json");
  const std::string text = serialize_scenario(first.scenario, first.csv_path, first.report_path);
  const ScenarioFile second = parse_scenario_text(text, "round.json");
  CHECK(scenario_equal(first.scenario, second.scenario));
  CHECK(second.csv_path == first.csv_path);
  CHECK(second.report_path == first.report_path);
  // A second pass reproduces the canonical text exactly.
  CHECK(serialize_scenario(second.scenario, second.csv_path, second.report_path) == text);
}

TEST_CASE("scenario_equal notices drift in any field") {
  const Scenario base = parse_scenario_text(kFullDoc).scenario;
  CHECK(scenario_equal(base, base));

  Scenario other = base;
  other.duration = 3.0;
  CHECK_FALSE(scenario_equal(base, other));

  other = base;
  other.kinds[1] = ConstantSpeed{2.0};
  CHECK_FALSE(scenario_equal(base, other));

  other = base;
  std::get<DistanceEq>(other.constraints[5]).d = 2.5;
  CHECK_FALSE(scenario_equal(base, other));

  other = base;
  std::get<SpeedTrack>(other.constraints[0]).refs[1] = ConstantRef{0.3};
  CHECK_FALSE(scenario_equal(base, other));

  other = base;
  other.tree.reset();
  CHECK_FALSE(scenario_equal(base, other));

  other = base;
  other.cruise(0) = 0.2;
  CHECK_FALSE(scenario_equal(base, other));
}

}  // TEST_SUITE
