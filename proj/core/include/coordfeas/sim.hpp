#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coordfeas/constraints.hpp"
#include "coordfeas/feasibility.hpp"
#include "coordfeas/matlite.hpp"
#include "coordfeas/vehicles.hpp"

namespace coordfeas {

enum class Integrator { Euler, RK4 };
const char* integrator_name(Integrator i);

// A full simulation setup: fleet, constraints, coordination mode, and the
// stepping / selection parameters shared by every solve along the run.
struct Scenario {
  std::vector<VehicleKind> kinds;
  std::vector<Vec> initial;  // one state vector per vehicle
  std::vector<EdgeConstraint> constraints;
  std::optional<LeaderFollowerTree> tree;  // graph mode when absent

  double duration = 0.0;  // 0 means "record the initial state only"
  double step = 1e-3;
  Integrator integrator = Integrator::RK4;

  double eps_act = kDefaultActivationEps;
  double margin = 0.0;
  double bound = 10.0;
  Vec cruise;  // empty, or one weight per control channel (truncated to kappa)

  bool projection = true;
  double projection_tol = 1e-12;
  std::uint64_t seed = 0;

  VehicleGroup group() const;
  Vec initial_composite() const;
  int weight_columns() const;  // total control channels across the fleet
};

// Empty when runnable; otherwise one message per violation.
std::vector<std::string> validate(const Scenario& s);

enum class EventKind { Activate, Deactivate, Reselect };
const char* event_name(EventKind k);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Activate;
  int constraint = -1;
  Side side = Side::Single;
  int channel = 0;
};

// One recorded instant. Residuals/active flags are flattened over every
// constraint's residual_slots() in declaration order.
struct Sample {
  double t = 0.0;
  Vec p;
  std::vector<Vec> controls;  // per vehicle, recovered from the committed velocity
  std::vector<double> residuals;
  std::vector<std::uint8_t> active;
  Vec weights;  // weight_columns() entries, NaN beyond the live weights
  std::vector<SelectionStrategy> strategies;  // one entry (graph) or per vehicle (tree)
};

struct TrajectoryLog {
  std::vector<Sample> samples;
  std::vector<Event> events;
  bool completed = false;
  std::string message;  // failure description when !completed
  FeasibilityStatus last_status = FeasibilityStatus::Feasible;
};

// Flattened "<constraint index>_<label>" names matching Sample::residuals.
std::vector<std::string> residual_layout(const Scenario& s);

// Newton restoration onto the position/heading equality manifold (distance
// and heading equalities only; velocity-level rows are untouched). Throws
// ProjectionDiverged when the residual cannot be reduced below tol.
Vec project_equalities(const VehicleGroup& g, const std::vector<EdgeConstraint>& cs,
                       const Vec& p, double tol = 1e-12, int max_iters = 20);

// Integrate the scenario. Validation failures and mid-run aborts return a
// truncated log with completed == false.
TrajectoryLog run(const Scenario& s);

}  // namespace coordfeas
