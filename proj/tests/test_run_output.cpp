#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "coordfeas/run_output.hpp"
#include "coordfeas/version.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace coordfeas;

namespace {

Vec state3(double x, double y, double th) {
  Vec s(3);
  s << x, y, th;
  return s;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::string line;
  std::istringstream is(text);
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

Scenario towing() {
  Scenario s;
  s.kinds = {Unicycle{}, Unicycle{}};
  s.initial = {state3(0, 0, 0), state3(-1.8, 0, 0)};
  s.constraints.push_back(SpeedTrack{0, {ConstantRef{1.0}, ConstantRef{0.0}}});
  s.constraints.push_back(DistanceBand{0, 1, 1.0, 2.0});
  s.duration = 0.3;
  s.step = 1e-3;
  s.cruise = Vec::Zero(4);
  return s;
}

}  // namespace

TEST_SUITE("run_output") {

TEST_CASE("csv columns cover states, controls, residual sides, and weights") {
  Scenario s;
  s.kinds = {Unicycle{}, CarLike{0.5}};
  s.initial = {state3(0, 0, 0), Vec::Zero(4)};
  s.constraints.push_back(DistanceBand{0, 1, 1.0, 2.0});
  s.constraints.push_back(SpeedTrack{1, {ConstantRef{0.0}, ConstantRef{0.0}}});

  const std::vector<std::string> expected = {
      "t",       "x_0",       "y_0",       "theta_0", "x_1",     "y_1",
      "theta_1", "phi_1",     "u_0_1",     "u_0_2",   "u_1_1",   "u_1_2",
      "g_0_upper", "g_0_lower", "g_1_ch1", "g_1_ch2",
      "a_0_upper", "a_0_lower", "a_1_ch1", "a_1_ch2",
      "w_1",     "w_2",       "w_3",       "w_4"};
  CHECK(csv_columns(s) == expected);
}

TEST_CASE("a zero-duration run emits a header and one exact row") {
  Scenario s;
  s.kinds = {Unicycle{}};
  s.initial = {state3(1, 2, 0.5)};
  s.duration = 0.0;
  const TrajectoryLog log = run(s);
  REQUIRE(log.completed);

  std::ostringstream os;
  write_csv(os, s, log);
  const auto lines = split_lines(os.str());
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "t,x_0,y_0,theta_0,u_0_1,u_0_2,w_1,w_2");
  CHECK(lines[1] == "0,1,2,0.5,0,0,0,0");
  CHECK(os.str().find('\r') == std::string::npos);
}

TEST_CASE("cells use shortest-faithful %.17g and blank out NaN") {
  Scenario s;
  s.kinds = {Unicycle{}};
  s.initial = {state3(0.1, 0, 0)};

  TrajectoryLog log;
  Sample smp;
  smp.t = 0.25;
  smp.p = state3(0.1, 0, 0);
  Vec u(2);
  u << 0.5, 0.0;
  smp.controls = {u};
  Vec w(2);
  w << std::numeric_limits<double>::quiet_NaN(), 3.0;
  smp.weights = w;
  log.samples.push_back(smp);

  std::ostringstream os;
  write_csv(os, s, log);
  const auto lines = split_lines(os.str());
  REQUIRE(lines.size() == 2);
  CHECK(lines[1] == "0.25,0.10000000000000001,0,0,0.5,0,,3");
}

TEST_CASE("report summarizes a completed run") {
  const Scenario s = towing();
  const TrajectoryLog log = run(s);
  REQUIRE(log.completed);

  const std::string text = report_json(s, log, 1.25, "fnv1a64:00000000deadbeef");
  const nlohmann::json doc = nlohmann::json::parse(text);
  CHECK(doc.at("version") == kVersion);
  CHECK(doc.at("digest") == "fnv1a64:00000000deadbeef");
  CHECK(doc.at("status") == "completed");
  CHECK(doc.at("feasibility") == "feasible");
  CHECK(doc.at("message") == "");
  CHECK(doc.at("samples") == 301);
  CHECK(doc.at("wall_seconds") == 1.25);

  const auto& ev = doc.at("events");
  CHECK(ev.at("total").get<int>() ==
        ev.at("activate").get<int>() + ev.at("deactivate").get<int>() +
            ev.at("reselect").get<int>());
  CHECK(ev.at("total").get<size_t>() == log.events.size());
  CHECK(ev.at("activate").get<int>() >= 1);

  const auto& res = doc.at("residuals");
  REQUIRE(res.contains("g_1_upper"));
  CHECK(res.at("g_1_upper").at("min").get<double>() <=
        res.at("g_1_upper").at("max").get<double>());
  // The upper band side is reached but never meaningfully crossed.
  CHECK(res.at("g_1_upper").at("max").get<double>() <= 1e-3);
  CHECK(res.at("g_1_upper").at("max").get<double>() >= -1e-2);
  REQUIRE(res.contains("g_0_ch1"));
  CHECK(res.at("g_0_ch1").at("max") == 0.0);
}

TEST_CASE("report marks aborted runs with the failure status") {
  Scenario s = towing();
  s.initial[1] = state3(-1.99, 0, 0);
  s.bound = 0.3;
  const TrajectoryLog log = run(s);
  REQUIRE_FALSE(log.completed);

  const nlohmann::json doc = nlohmann::json::parse(report_json(s, log, 0.1, "d"));
  CHECK(doc.at("status") == "aborted");
  CHECK(doc.at("feasibility") == "no_feasible_direction");
  CHECK(doc.at("message").get<std::string>().find("no_feasible_direction") !=
        std::string::npos);
  CHECK(doc.at("samples").get<int>() >= 1);
}

}  // TEST_SUITE
