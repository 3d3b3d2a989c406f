#pragma once

#include <variant>
#include <vector>

#include "coordfeas/matlite.hpp"
#include "coordfeas/vehicles.hpp"

namespace coordfeas {

// Distance-coordination benchmark pairs with closed-form solution families.
struct TwoUnicycles {};
struct ConstantSpeedUnicycle {
  double speed = 1.0;  // vehicle 0 is the constant-speed one, vehicle 1 a unicycle
};
struct UnicycleCar {
  double wheelbase = 1.0;  // vehicle 0 is a unicycle, vehicle 1 the car
};

using AnalyticCase = std::variant<TwoUnicycles, ConstantSpeedUnicycle, UnicycleCar>;

const char* case_name(const AnalyticCase& c);
VehicleGroup group_for(const AnalyticCase& c);
int expected_kappa(const AnalyticCase& c);

struct AnalyticBasis {
  Vec kbar;                // zero for the driftless cases
  std::vector<Vec> basis;  // closed-form vectors, kept unnormalized
};

// Closed-form family at P. Throws SingularDirection when the constant-speed
// case's denominator cos(th1)(x0-x1) + sin(th1)(y0-y1) has magnitude <= 1e-9,
// and SingularSteering when the car's steering angle is out of range.
AnalyticBasis basis_at(const AnalyticCase& c, const Vec& p);

struct VerifyReport {
  bool span_match = false;     // engine basis and analytic basis span the same space
  bool residuals_ok = false;   // every analytic vector solves/annihilates the stack
  double max_residual = 0.0;
  int engine_kappa = 0;
  int analytic_count = 0;
  bool ok() const { return span_match && residuals_ok; }
};

// Verification against the engine's stacked system with explicit vectors so
// harnesses can inject faults.
VerifyReport verify_vectors(const AnalyticCase& c, const Vec& p,
                            const AnalyticBasis& vectors, double rank_tol = 1e-8,
                            double residual_tol = 1e-10);

// basis_at + verify_vectors.
VerifyReport verify_against_engine(const AnalyticCase& c, const Vec& p,
                                   double rank_tol = 1e-8, double residual_tol = 1e-10);

}  // namespace coordfeas
