#include "coordfeas/analytic.hpp"

#include <cmath>

#include "coordfeas/constraints.hpp"
#include "coordfeas/errors.hpp"

namespace coordfeas {

namespace {

constexpr double kDenomEps = 1e-9;

struct Pair {
  double dx, dy;     // p0 - p1
  double th0, th1;
};

Pair split(const VehicleGroup& g, const Vec& p) {
  const int o1 = g.offset(1);
  return {p(0) - p(o1), p(1) - p(o1 + 1), p(2), p(o1 + 2)};
}

}  // namespace

const char* case_name(const AnalyticCase& c) {
  if (std::holds_alternative<TwoUnicycles>(c)) return "two_unicycles";
  if (std::holds_alternative<ConstantSpeedUnicycle>(c)) return "constant_speed_unicycle";
  return "unicycle_car";
}

VehicleGroup group_for(const AnalyticCase& c) {
  if (std::holds_alternative<TwoUnicycles>(c)) {
    return VehicleGroup({Unicycle{}, Unicycle{}});
  }
  if (const auto* cs = std::get_if<ConstantSpeedUnicycle>(&c)) {
    return VehicleGroup({ConstantSpeed{cs->speed}, Unicycle{}});
  }
  return VehicleGroup({Unicycle{}, CarLike{std::get<UnicycleCar>(c).wheelbase}});
}

int expected_kappa(const AnalyticCase& c) {
  return std::holds_alternative<ConstantSpeedUnicycle>(c) ? 2 : 3;
}

AnalyticBasis basis_at(const AnalyticCase& c, const Vec& p) {
  VehicleGroup g = group_for(c);
  if (p.size() != g.total_dim()) {
    throw Error("analytic case expects a composite state of dimension " +
                std::to_string(g.total_dim()));
  }
  const Pair q = split(g, p);
  AnalyticBasis out;
  out.kbar = Vec::Zero(g.total_dim());

  if (std::holds_alternative<TwoUnicycles>(c)) {
    const double c1 = std::cos(q.th0) * q.dx + std::sin(q.th0) * q.dy;
    const double c2 = std::cos(q.th1) * q.dx + std::sin(q.th1) * q.dy;
    Vec k3 = Vec::Zero(6);
    k3(0) = std::cos(q.th0) * c2;
    k3(1) = std::sin(q.th0) * c2;
    k3(3) = std::cos(q.th1) * c1;
    k3(4) = std::sin(q.th1) * c1;
    out.basis = {Vec::Unit(6, 2), Vec::Unit(6, 5), std::move(k3)};
    return out;
  }

  if (const auto* cs = std::get_if<ConstantSpeedUnicycle>(&c)) {
    const double v = cs->speed;
    const double numer = v * (std::cos(q.th0) * q.dx + std::sin(q.th0) * q.dy);
    const double denom = std::cos(q.th1) * q.dx + std::sin(q.th1) * q.dy;
    if (std::abs(denom) <= kDenomEps) {
      throw SingularDirection(
          "follower line-of-sight rate undefined: heading is broadside to the pair axis");
    }
    out.kbar(0) = v * std::cos(q.th0);
    out.kbar(1) = v * std::sin(q.th0);
    out.kbar(3) = std::cos(q.th1) * numer / denom;
    out.kbar(4) = std::sin(q.th1) * numer / denom;
    out.basis = {Vec::Unit(6, 2), Vec::Unit(6, 5)};
    return out;
  }

  const auto& uc = std::get<UnicycleCar>(c);
  const double phi = p(6);
  if (std::abs(phi) >= std::acos(0.0) - kSteeringGuard) {
    throw SingularSteering("car steering angle at the quarter-turn guard");
  }
  const double c1 = std::cos(q.th0) * q.dx + std::sin(q.th0) * q.dy;
  const double c2 = std::cos(q.th1) * q.dx + std::sin(q.th1) * q.dy;
  Vec k3 = Vec::Zero(7);
  k3(0) = std::cos(q.th0) * c2;
  k3(1) = std::sin(q.th0) * c2;
  k3(3) = std::cos(q.th1) * c1;
  k3(4) = std::sin(q.th1) * c1;
  k3(5) = std::tan(phi) / uc.wheelbase * c1;
  out.basis = {Vec::Unit(7, 2), Vec::Unit(7, 6), std::move(k3)};
  return out;
}

VerifyReport verify_vectors(const AnalyticCase& c, const Vec& p,
                            const AnalyticBasis& vectors, double rank_tol,
                            double residual_tol) {
  VehicleGroup g = group_for(c);
  auto [omega_k, t_k] = stack_kinematics(g, p);
  const double dist = (p.head(2) - p.segment(g.offset(1), 2)).norm();
  EqualityRows eq = equality_rows(DistanceEq{0, 1, dist}, g, p, 0.0);
  Mat stack(omega_k.rows() + 1, omega_k.cols());
  stack.topRows(omega_k.rows()) = omega_k;
  stack.bottomRows(1) = eq.omega;
  Vec rhs(t_k.size() + 1);
  rhs << t_k, 0.0;

  VerifyReport rep;
  rep.analytic_count = static_cast<int>(vectors.basis.size());
  rep.max_residual = (stack * vectors.kbar - rhs).cwiseAbs().maxCoeff();
  for (const Vec& k : vectors.basis) {
    rep.max_residual = std::max(rep.max_residual, (stack * k).cwiseAbs().maxCoeff());
  }
  rep.residuals_ok = rep.max_residual <= residual_tol;

  std::vector<Vec> engine = null_basis(stack);
  rep.engine_kappa = static_cast<int>(engine.size());
  Mat joint(g.total_dim(), rep.engine_kappa + rep.analytic_count);
  int col = 0;
  for (const Vec& k : engine) joint.col(col++) = k;
  for (const Vec& k : vectors.basis) {
    const double n = k.norm();
    joint.col(col++) = (n > 1e-12) ? Vec(k / n) : k;
  }
  rep.span_match = rep.engine_kappa == expected_kappa(c) &&
                   rank_of(joint, rank_tol) == rep.engine_kappa;
  return rep;
}

VerifyReport verify_against_engine(const AnalyticCase& c, const Vec& p, double rank_tol,
                                   double residual_tol) {
  return verify_vectors(c, p, basis_at(c, p), rank_tol, residual_tol);
}

}  // namespace coordfeas
