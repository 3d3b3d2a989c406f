#include "coordfeas/vehicles.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

#include "coordfeas/errors.hpp"

namespace coordfeas {

namespace {

constexpr double kPi = std::numbers::pi;

void require_state_size(const VehicleKind& kind, const Vec& state) {
  if (state.size() != state_dim(kind)) {
    throw Error("vehicle state has size " + std::to_string(state.size()) +
                ", expected " + std::to_string(state_dim(kind)));
  }
}

double checked_steering(const CarLike&, const Vec& state) {
  const double phi = state(3);
  if (std::abs(phi) >= kPi / 2.0 - kSteeringGuard) {
    throw SingularSteering("steering angle " + std::to_string(phi) +
                           " at or beyond the singular magnitude pi/2");
  }
  return phi;
}

}  // namespace

int state_dim(const VehicleKind& kind) {
  return std::holds_alternative<CarLike>(kind) ? 4 : 3;
}

int control_dim(const VehicleKind& kind) {
  return std::holds_alternative<ConstantSpeed>(kind) ? 1 : 2;
}

VectorFields fields(const VehicleKind& kind, const Vec& state) {
  require_state_size(kind, state);
  const double th = state(2);
  const double c = std::cos(th);
  const double s = std::sin(th);
  VectorFields vf;
  if (const auto* uni = std::get_if<Unicycle>(&kind); uni != nullptr) {
    vf.drift = Vec::Zero(3);
    Vec f1(3), f2(3);
    f1 << c, s, 0;
    f2 << 0, 0, 1;
    vf.controls = {f1, f2};
  } else if (const auto* cs = std::get_if<ConstantSpeed>(&kind); cs != nullptr) {
    Vec f0(3), f1(3);
    f0 << cs->speed * c, cs->speed * s, 0;
    f1 << 0, 0, 1;
    vf.drift = f0;
    vf.controls = {f1};
  } else {
    const auto& car = std::get<CarLike>(kind);
    const double phi = checked_steering(car, state);
    vf.drift = Vec::Zero(4);
    Vec f1(4), f2(4);
    f1 << c, s, std::tan(phi) / car.wheelbase, 0;
    f2 << 0, 0, 0, 1;
    vf.controls = {f1, f2};
  }
  return vf;
}

KinematicBlock kinematic_block(const VehicleKind& kind, const Vec& state) {
  require_state_size(kind, state);
  const double th = state(2);
  const double c = std::cos(th);
  const double s = std::sin(th);
  KinematicBlock blk;
  if (std::holds_alternative<Unicycle>(kind)) {
    blk.omega = Mat(1, 3);
    blk.omega << s, -c, 0;
    blk.t = Vec::Zero(1);
  } else if (const auto* cs = std::get_if<ConstantSpeed>(&kind); cs != nullptr) {
    blk.omega = Mat(2, 3);
    blk.omega << s, -c, 0,
                 c, s, 0;
    blk.t = Vec(2);
    blk.t << 0, cs->speed;
  } else {
    const auto& car = std::get<CarLike>(kind);
    const double phi = checked_steering(car, state);
    blk.omega = Mat(2, 4);
    blk.omega << std::sin(th + phi), -std::cos(th + phi), -car.wheelbase * std::cos(phi), 0,
                 s, -c, 0, 0;
    blk.t = Vec::Zero(2);
  }
  return blk;
}

int velocity_channel_count(const VehicleKind&) { return 2; }

Mat velocity_channel_rows(const VehicleKind& kind, const Vec& state) {
  require_state_size(kind, state);
  const double th = state(2);
  const double c = std::cos(th);
  const double s = std::sin(th);
  const int n = state_dim(kind);
  Mat rows = Mat::Zero(2, n);
  rows(0, 0) = c;
  rows(0, 1) = s;
  if (std::holds_alternative<CarLike>(kind)) {
    rows(1, 3) = 1.0;  // steering rate
  } else {
    rows(1, 2) = 1.0;  // turn rate
  }
  return rows;
}

Vec controls_from_velocity(const VehicleKind& kind, const Vec& state,
                           const Vec& pdot, double tol) {
  require_state_size(kind, state);
  if (pdot.size() != state.size()) {
    throw Error("velocity has size " + std::to_string(pdot.size()) +
                ", expected " + std::to_string(state.size()));
  }
  const auto vf = fields(kind, state);
  const int l = static_cast<int>(vf.controls.size());
  Mat f(state.size(), l);
  for (int j = 0; j < l; ++j) f.col(j) = vf.controls[j];
  const Vec rhs = pdot - vf.drift;
  const Vec u = f.colPivHouseholderQr().solve(rhs);
  const double residual = (f * u - rhs).lpNorm<Eigen::Infinity>();
  if (residual > tol) {
    throw NotInDistribution("velocity leaves the control distribution (residual " +
                            std::to_string(residual) + ")");
  }
  return u;
}

VehicleGroup::VehicleGroup(std::vector<VehicleKind> kinds)
    : kinds_(std::move(kinds)) {
  offsets_.reserve(kinds_.size());
  for (const auto& kind : kinds_) {
    offsets_.push_back(total_dim_);
    total_dim_ += state_dim(kind);
  }
}

int VehicleGroup::dim(int i) const { return state_dim(kinds_[i]); }

Vec VehicleGroup::slice(const Vec& p, int i) const {
  assert(p.size() == total_dim_);
  return p.segment(offsets_[i], dim(i));
}

Vec VehicleGroup::assemble(const std::vector<Vec>& states) const {
  assert(static_cast<int>(states.size()) == count());
  Vec p(total_dim_);
  for (int i = 0; i < count(); ++i) {
    assert(states[i].size() == dim(i));
    p.segment(offsets_[i], dim(i)) = states[i];
  }
  return p;
}

KinematicBlock stack_kinematics(const VehicleGroup& group, const Vec& p) {
  int rows = 0;
  std::vector<KinematicBlock> blocks;
  blocks.reserve(group.count());
  for (int i = 0; i < group.count(); ++i) {
    blocks.push_back(kinematic_block(group.kind(i), group.slice(p, i)));
    rows += static_cast<int>(blocks.back().omega.rows());
  }
  KinematicBlock out;
  out.omega = Mat::Zero(rows, group.total_dim());
  out.t = Vec::Zero(rows);
  int row = 0;
  for (int i = 0; i < group.count(); ++i) {
    const auto& blk = blocks[i];
    const int r = static_cast<int>(blk.omega.rows());
    out.omega.block(row, group.offset(i), r, group.dim(i)) = blk.omega;
    out.t.segment(row, r) = blk.t;
    row += r;
  }
  return out;
}

}  // namespace coordfeas
