#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coordfeas/constraints.hpp"
#include "coordfeas/matlite.hpp"
#include "coordfeas/vehicles.hpp"

namespace coordfeas {

// Affine family of feasible composite velocities:
//   pdot = kbar + sum_l weights[l] * basis[l].
struct MotionFamily {
  Vec kbar;
  std::vector<Vec> basis;  // orthonormal
  int kappa() const { return static_cast<int>(basis.size()); }
  Vec combine(const Vec& weights) const;
};

// Wraps solve_particular + null_basis over a stacked velocity system.
// nullopt when the stack is inconsistent.
std::optional<MotionFamily> motion_family(const Mat& omega_stack, const Vec& t_stack,
                                          double tol = kDefaultRankTol);

enum class SelectionStrategy { Unconstrained, SingleVector, ComboProgram };
const char* strategy_name(SelectionStrategy s);

struct MotionSelection {
  Vec weights;
  Vec pdot;
  SelectionStrategy strategy = SelectionStrategy::Unconstrained;
  int vector_index = -1;  // basis index when strategy == SingleVector
};

// Velocity-level half-space row . pdot <= rhs; the selector additionally
// subtracts its margin from rhs.
struct DirectionalBound {
  Vec row;
  double rhs = 0.0;
};

struct SelectionOptions {
  std::optional<Vec> cruise;  // weights used when nothing binds; padded/truncated to kappa
  double margin = 0.0;
  double bound = 10.0;
};

std::vector<DirectionalBound> to_bounds(const ActiveSet& active);

// Layered selection: cruise weights when no rows bind, then a per-basis-vector
// scalar scan (first index, then smallest |w|), then an exact minimum-norm
// mixture program over all basis vectors. nullopt when no certified direction
// exists within the weight box.
std::optional<MotionSelection> select_weights(const MotionFamily& family,
                                              const std::vector<DirectionalBound>& rows,
                                              const SelectionOptions& opts);

enum class FeasibilityStatus { Feasible, EqualityInconsistent, NoFeasibleDirection };
const char* status_name(FeasibilityStatus s);

struct FeasibilityDiagnostics {
  int stack_rows = 0;
  int stack_rank = 0;
  int kinematic_rows = 0;
  int equality_rows = 0;
  int kappa = 0;
  ActiveSet active;  // composite rows (block-local in tree mode)
  bool singular_geometry = false;  // equality rows rank-deficient against kinematics
  std::string note;
};

struct FeasibilityReport {
  FeasibilityStatus status = FeasibilityStatus::Feasible;
  std::optional<MotionFamily> family;
  std::optional<MotionSelection> selection;
  FeasibilityDiagnostics diag;
};

struct CheckOptions {
  double eps_act = kDefaultActivationEps;
  double margin = 0.0;
  double bound = 10.0;
  double tol = kDefaultRankTol;
  std::optional<Vec> cruise;
  // Pull-back gain (1/s) on binding rows that sit outside the boundary:
  // a row with residual g > 0 is bounded by row.pdot <= -stabilization*g
  // instead of 0, steering the state back toward g = 0. The simulator sets
  // this to 1/h; one-shot checks leave it at 0.
  double stabilization = 0.0;
};

// One binding inequality side, identified by constraint index.
using BindingSide = std::pair<int, Side>;

// Activation rule: every inequality side with |g| <= eps_act.
std::vector<BindingSide> binding_by_activation(const std::vector<EdgeConstraint>& cs,
                                               const VehicleGroup& g, const Vec& p,
                                               double t, double eps_act);

// Assembled velocity-level system for one solve: stacked equality part plus
// half-space rows for the binding inequality sides.
struct VelocitySystem {
  Mat stack;
  Vec rhs;
  std::vector<DirectionalBound> bounds;
  std::vector<ActiveRow> binding_rows;
  int kinematic_rows = 0;
  int equality_rows = 0;
  std::string note;
};

VelocitySystem build_graph_system(const VehicleGroup& g,
                                  const std::vector<EdgeConstraint>& cs, const Vec& p,
                                  double t, const std::vector<BindingSide>& binding);

// Block-local system for one vehicle with the parent's velocity folded into
// the right-hand sides. parent < 0 marks the root; parent_pdot may be null
// when the parent failed upstream (edge rows are then skipped).
VelocitySystem build_block_system(const VehicleGroup& g, int v, int parent,
                                  const std::vector<EdgeConstraint>& cs, const Vec& p,
                                  double t, const std::vector<BindingSide>& binding,
                                  const Vec* parent_pdot);

// Full-group solve with an explicit binding set (the simulator drives this
// directly with its membership set).
FeasibilityReport solve_graph(const VehicleGroup& g, const std::vector<EdgeConstraint>& cs,
                              const Vec& p, double t,
                              const std::vector<BindingSide>& binding,
                              const CheckOptions& opts);

// Activation-rule front end over solve_graph.
FeasibilityReport check_state(const VehicleGroup& g, const std::vector<EdgeConstraint>& cs,
                              const Vec& p, double t, const CheckOptions& opts = {});

// ---- Leader-follower (tree) mode ----

struct LeaderFollowerTree {
  std::vector<int> parent;  // parent[v] == -1 exactly once (the root)
};

// Empty when valid; otherwise one message per violation.
std::vector<std::string> validate_tree(const LeaderFollowerTree& tree, int n_vehicles);

// Parents before children; throws Error when the tree is invalid.
std::vector<int> topological_order(const LeaderFollowerTree& tree);

struct TreeOptions {
  CheckOptions base;
  std::optional<Vec> root_pdot;         // prescribed root block velocity
  std::vector<Vec> cruise_per_vehicle;  // empty, or one entry per vehicle
};

struct TreeReport {
  std::vector<FeasibilityReport> vehicles;  // indexed by vehicle; block-local dims
  FeasibilityStatus status = FeasibilityStatus::Feasible;  // first failure in topo order
  int first_failed = -1;
};

TreeReport solve_tree(const VehicleGroup& g, const LeaderFollowerTree& tree,
                      const std::vector<EdgeConstraint>& cs, const Vec& p, double t,
                      const std::vector<BindingSide>& binding, const TreeOptions& opts);

TreeReport check_leader_follower(const VehicleGroup& g, const LeaderFollowerTree& tree,
                                 const std::vector<EdgeConstraint>& cs, const Vec& p,
                                 double t, const TreeOptions& opts = {});

}  // namespace coordfeas
