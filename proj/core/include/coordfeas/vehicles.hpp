#pragma once

#include <variant>
#include <vector>

#include "coordfeas/matlite.hpp"

namespace coordfeas {

// State [x, y, theta], controls [forward speed, turn rate].
struct Unicycle {};

// State [x, y, theta], control [turn rate]; the forward speed is fixed and
// nonzero.
struct ConstantSpeed {
  double speed = 1.0;
};

// State [x, y, theta, phi], controls [drive speed, steering rate]; wheelbase
// must be positive. phi is the steering angle.
struct CarLike {
  double wheelbase = 1.0;
};

using VehicleKind = std::variant<Unicycle, ConstantSpeed, CarLike>;

// Steering angles with |phi| >= pi/2 - kSteeringGuard are rejected.
inline constexpr double kSteeringGuard = 1e-6;

int state_dim(const VehicleKind& kind);
int control_dim(const VehicleKind& kind);

// Drift and control vector fields at a state: pdot = drift + sum controls[j] * u_j.
struct VectorFields {
  Vec drift;
  std::vector<Vec> controls;
};
VectorFields fields(const VehicleKind& kind, const Vec& state);

// Affine annihilator of the admissible velocities: omega * pdot = t for every
// velocity the vehicle can realize at this state.
struct KinematicBlock {
  Mat omega;
  Vec t;
};
KinematicBlock kinematic_block(const VehicleKind& kind, const Vec& state);

// Rows extracting the scalar velocity channels a reference tracker may pin:
// [forward speed; turn rate] for unicycle-family kinds and
// [drive speed; steering rate] for car-like kinds. For a constant-speed
// vehicle the first channel is not a free control, so pinning it to anything
// other than the built-in speed is infeasible by construction.
Mat velocity_channel_rows(const VehicleKind& kind, const Vec& state);
int velocity_channel_count(const VehicleKind& kind);

// Least-squares recovery of the controls realizing pdot at this state.
// Throws NotInDistribution when the residual exceeds tol.
Vec controls_from_velocity(const VehicleKind& kind, const Vec& state,
                           const Vec& pdot, double tol = 1e-8);

// Fixed ordering of per-vehicle state blocks inside one composite vector.
class VehicleGroup {
 public:
  VehicleGroup() = default;
  explicit VehicleGroup(std::vector<VehicleKind> kinds);

  int count() const { return static_cast<int>(kinds_.size()); }
  int total_dim() const { return total_dim_; }
  int offset(int i) const { return offsets_[i]; }
  int dim(int i) const;
  const VehicleKind& kind(int i) const { return kinds_[i]; }
  const std::vector<VehicleKind>& kinds() const { return kinds_; }

  Vec slice(const Vec& p, int i) const;
  Vec assemble(const std::vector<Vec>& states) const;

 private:
  std::vector<VehicleKind> kinds_;
  std::vector<int> offsets_;
  int total_dim_ = 0;
};

// Block-diagonal annihilator stack over all vehicles in the group.
KinematicBlock stack_kinematics(const VehicleGroup& group, const Vec& p);

}  // namespace coordfeas
