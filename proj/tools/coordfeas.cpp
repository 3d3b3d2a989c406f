#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "coordfeas/analytic.hpp"
#include "coordfeas/errors.hpp"
#include "coordfeas/log.hpp"
#include "coordfeas/run_output.hpp"
#include "coordfeas/scenario_io.hpp"
#include "coordfeas/sim.hpp"
#include "coordfeas/version.hpp"
#include "json.hpp"

namespace {

using coordfeas::Vec;
using nlohmann::json;

// Exit codes: 0 ok, 1 parse/validation trouble, 2 equality-inconsistent,
// 3 no feasible direction, 4 aborted run, 5 benchmark mismatch.
int status_code(coordfeas::FeasibilityStatus st) {
  switch (st) {
    case coordfeas::FeasibilityStatus::Feasible: return 0;
    case coordfeas::FeasibilityStatus::EqualityInconsistent: return 2;
    case coordfeas::FeasibilityStatus::NoFeasibleDirection: return 3;
  }
  return 1;
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (int k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

json report_body(const coordfeas::FeasibilityReport& rep) {
  json out;
  out["status"] = coordfeas::status_name(rep.status);
  out["kappa"] = rep.diag.kappa;
  out["stack"] = {{"rows", rep.diag.stack_rows},
                  {"rank", rep.diag.stack_rank},
                  {"kinematic_rows", rep.diag.kinematic_rows},
                  {"equality_rows", rep.diag.equality_rows}};
  out["singular_geometry"] = rep.diag.singular_geometry;
  out["note"] = rep.diag.note;
  json active = json::array();
  for (const coordfeas::ActiveRow& row : rep.diag.active.rows) {
    active.push_back({{"constraint", row.edge},
                      {"side", coordfeas::side_name(row.side)},
                      {"g", row.residual}});
  }
  out["active"] = std::move(active);
  if (rep.selection) {
    json sel;
    sel["strategy"] = coordfeas::strategy_name(rep.selection->strategy);
    sel["weights"] = vec_json(rep.selection->weights);
    sel["pdot"] = vec_json(rep.selection->pdot);
    if (rep.selection->strategy == coordfeas::SelectionStrategy::SingleVector) {
      sel["vector_index"] = rep.selection->vector_index;
    }
    out["selection"] = std::move(sel);
  }
  return out;
}

int report_violations(const std::vector<std::string>& violations) {
  std::cerr << "scenario validation failed:\n";
  for (const std::string& v : violations) std::cerr << "  - " << v << "\n";
  return 1;
}

int do_check(const std::string& file, double at) {
  const coordfeas::ScenarioFile sf = coordfeas::load_scenario(file);
  const std::vector<std::string> violations = coordfeas::validate(sf.scenario);
  if (!violations.empty()) return report_violations(violations);

  const coordfeas::Scenario& s = sf.scenario;
  const coordfeas::VehicleGroup group = s.group();
  const Vec p0 = s.initial_composite();

  coordfeas::CheckOptions opts;
  opts.eps_act = s.eps_act;
  opts.margin = s.margin;
  opts.bound = s.bound;
  if (s.cruise.size() > 0) opts.cruise = s.cruise;

  json out;
  out["version"] = coordfeas::kVersion;
  out["digest"] = sf.digest;
  out["time"] = at;

  coordfeas::FeasibilityStatus status;
  if (!s.tree) {
    const coordfeas::FeasibilityReport rep =
        coordfeas::check_state(group, s.constraints, p0, at, opts);
    out["mode"] = "graph";
    out.update(report_body(rep));
    status = rep.status;
  } else {
    coordfeas::TreeOptions topts;
    topts.base = opts;
    const coordfeas::TreeReport rep =
        coordfeas::check_leader_follower(group, *s.tree, s.constraints, p0, at, topts);
    out["mode"] = "tree";
    out["status"] = coordfeas::status_name(rep.status);
    out["first_failed"] = rep.first_failed;
    json vehicles = json::array();
    for (const coordfeas::FeasibilityReport& vr : rep.vehicles) {
      vehicles.push_back(report_body(vr));
    }
    out["vehicles"] = std::move(vehicles);
    status = rep.status;
  }
  std::cout << out.dump(2) << "\n";
  return status_code(status);
}

int write_text(const std::string& path, const std::string& text, const char* what) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    std::cerr << "cannot open " << what << " file '" << path << "'\n";
    return 1;
  }
  os << text;
  return 0;
}

int do_run(const std::string& file, const std::string& csv_override,
           const std::string& report_override) {
  const coordfeas::ScenarioFile sf = coordfeas::load_scenario(file);
  const std::vector<std::string> violations = coordfeas::validate(sf.scenario);
  if (!violations.empty()) return report_violations(violations);

  const auto start = std::chrono::steady_clock::now();
  const coordfeas::TrajectoryLog log = coordfeas::run(sf.scenario);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string csv_path = csv_override.empty() ? sf.csv_path : csv_override;
  {
    std::ostringstream csv;
    coordfeas::write_csv(csv, sf.scenario, log);
    if (const int rc = write_text(csv_path, csv.str(), "csv"); rc != 0) return rc;
  }
  const std::string report_path = report_override.empty() ? sf.report_path : report_override;
  const std::string report = coordfeas::report_json(sf.scenario, log, wall, sf.digest);
  if (const int rc = write_text(report_path, report, "report"); rc != 0) return rc;

  if (!log.completed) {
    std::cerr << "run aborted: " << log.message << "\n";
    return 4;
  }
  coordfeas::log_info("run completed: " + std::to_string(log.samples.size()) +
                      " samples, " + std::to_string(log.events.size()) + " events");
  return 0;
}

Vec random_state(const coordfeas::AnalyticCase& c, std::mt19937_64& rng) {
  const coordfeas::VehicleGroup group = group_for(c);
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  std::uniform_real_distribution<double> steer(-1.3, 1.3);
  while (true) {
    Vec p(group.total_dim());
    for (int v = 0; v < group.count(); ++v) {
      const int o = group.offset(v);
      p(o) = pos(rng);
      p(o + 1) = pos(rng);
      p(o + 2) = ang(rng);
      if (group.dim(v) == 4) p(o + 3) = steer(rng);
    }
    const double dx = p(0) - p(group.offset(1));
    const double dy = p(1) - p(group.offset(1) + 1);
    if (std::hypot(dx, dy) < 0.2) continue;
    if (std::holds_alternative<coordfeas::ConstantSpeedUnicycle>(c)) {
      const double th1 = p(group.offset(1) + 2);
      if (std::abs(std::cos(th1) * dx + std::sin(th1) * dy) < 1e-3) continue;
    }
    return p;
  }
}

int do_bench(std::uint64_t seed, bool inject_fault) {
  const std::vector<coordfeas::AnalyticCase> cases = {
      coordfeas::TwoUnicycles{}, coordfeas::ConstantSpeedUnicycle{1.0},
      coordfeas::UnicycleCar{1.0}};
  constexpr int kStates = 100;

  std::printf("%-28s %8s %14s %6s\n", "case", "states", "max_residual", "span");
  bool all_ok = true;
  for (const coordfeas::AnalyticCase& c : cases) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    bool ok = true;
    for (int k = 0; k < kStates; ++k) {
      const Vec p = random_state(c, rng);
      coordfeas::AnalyticBasis vectors = coordfeas::basis_at(c, p);
      if (inject_fault && !vectors.basis.empty()) vectors.basis[0](0) += 1e-3;
      const coordfeas::VerifyReport rep = coordfeas::verify_vectors(c, p, vectors);
      worst = std::max(worst, rep.max_residual);
      ok = ok && rep.ok();
    }
    std::printf("%-28s %8d %14.3e %6s\n", coordfeas::case_name(c), kStates, worst,
                ok ? "ok" : "FAIL");
    all_ok = all_ok && ok;
  }
  if (!all_ok) {
    std::cerr << "closed-form cross-check failed\n";
    return 5;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint-motion feasibility checks and constrained trajectory simulation"};
  app.set_version_flag("--version", std::string(coordfeas::kVersion));
  app.require_subcommand(1);

  std::string check_file;
  double check_at = 0.0;
  CLI::App* check = app.add_subcommand("check", "Decide feasibility at the initial state");
  check->add_option("file", check_file, "scenario JSON file")->required();
  check->add_option("--at", check_at, "reference evaluation time (default 0)");

  std::string run_file, run_csv, run_report;
  CLI::App* run = app.add_subcommand("run", "Integrate the scenario and write outputs");
  run->add_option("file", run_file, "scenario JSON file")->required();
  run->add_option("--csv", run_csv, "trajectory CSV path (overrides outputs.csv)");
  run->add_option("--report", run_report, "report JSON path (overrides outputs.report)");

  std::uint64_t bench_seed = 0;
  bool inject_fault = false;
  CLI::App* bench =
      app.add_subcommand("bench", "Cross-check the engine against closed-form families");
  bench->add_option("--seed", bench_seed, "state sampling seed");
  bench->add_flag("--inject-fault", inject_fault)->group("");  // harness hook

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (check->parsed()) return do_check(check_file, check_at);
    if (run->parsed()) return do_run(run_file, run_csv, run_report);
    return do_bench(bench_seed, inject_fault);
  } catch (const coordfeas::ParseError& e) {
    std::cerr << e.path() << ": " << e.what() << "\n";
    return 1;
  } catch (const coordfeas::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
