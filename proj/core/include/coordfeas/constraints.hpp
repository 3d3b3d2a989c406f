#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "coordfeas/time_function.hpp"
#include "coordfeas/vehicles.hpp"

namespace coordfeas {

// Reduce an angle into (-pi, pi].
double wrap_to_pi(double angle);

// Pairwise coordination constraints between vehicles i and j (indices into a
// VehicleGroup), plus per-vehicle velocity-channel tracking. Inequalities are
// kept in g <= 0 form; bands expose an upper and a lower side.

struct DistanceEq {
  int i = 0, j = 1;
  double d = 1.0;  // g = (||p_i - p_j||^2 - d^2) / 2
};

struct DistanceBand {
  int i = 0, j = 1;
  double d_minus = 1.0;  // lower side: g = (d_minus^2 - ||a||^2) / 2
  double d_plus = 2.0;   // upper side: g = (||a||^2 - d_plus^2) / 2
};

struct HeadingEq {
  int i = 0, j = 1;
  double delta = 0.0;  // g = wrap(theta_i - theta_j - delta)
};

struct HeadingBand {
  int i = 0, j = 1;
  double delta_minus = 0.0;  // lower side: g = delta_minus - wrap(theta_i - theta_j)
  double delta_plus = 0.0;   // upper side: g = wrap(theta_i - theta_j) - delta_plus
};

// Keeps vehicle j's heading inside a cone of half-angle `cone` around the
// bearing from j to i: g = cos(cone) * ||a_ij|| - <a_ij, b_j> with
// a_ij = (x_i - x_j, y_i - y_j) and b_j = (cos theta_j, sin theta_j).
struct Visibility {
  int i = 0, j = 1;
  double cone = 0.0;
};

// Pins vehicle i's velocity channels to time references; one reference per
// velocity channel of the vehicle kind (see velocity_channel_rows).
struct SpeedTrack {
  int i = 0;
  std::vector<TimeFunction> refs;
};

using EdgeConstraint =
    std::variant<DistanceEq, DistanceBand, HeadingEq, HeadingBand, Visibility, SpeedTrack>;

bool is_equality(const EdgeConstraint& c);

// Vehicles referenced by the constraint (j == -1 for single-vehicle variants).
std::pair<int, int> edge_of(const EdgeConstraint& c);

enum class Side { Single, Upper, Lower };
const char* side_name(Side side);

inline constexpr double kGeometryEps = 1e-9;
inline constexpr double kDefaultActivationEps = 1e-6;

struct Residual {
  Side side = Side::Single;
  int channel = 0;  // SpeedTrack channel index; 0 otherwise
  double g = 0.0;
};

// Residuals of every side, in emission order (upper before lower for bands,
// one entry per channel for SpeedTrack). SpeedTrack residuals are velocity
// level and reported as 0 by construction; they exist for schema stability.
std::vector<Residual> residuals(const EdgeConstraint& c, const VehicleGroup& g,
                                const Vec& p, double t);

// Side/channel layout of residuals() without evaluating any state; g is 0.
std::vector<Residual> residual_slots(const EdgeConstraint& c);

// CSV-stable label for one residual: "single", "upper", "lower", "ch1", ...
std::string residual_label(const EdgeConstraint& c, const Residual& r);

// Rows of an equality variant over the composite coordinates plus right-hand
// side. Throws WrongVariant for inequality variants.
struct EqualityRows {
  Mat omega;
  Vec rhs;
};
EqualityRows equality_rows(const EdgeConstraint& c, const VehicleGroup& g,
                           const Vec& p, double t);

// Gradient of one inequality side (g <= 0 form) over the composite
// coordinates. Throws WrongVariant for equality variants or absent sides.
Vec inequality_gradient(const EdgeConstraint& c, Side side, const VehicleGroup& g,
                        const Vec& p);

struct ActiveRow {
  int edge = -1;  // index into the constraint list
  Side side = Side::Single;
  Vec row;
  double residual = 0.0;
};

struct ActiveSet {
  double time = 0.0;
  std::vector<ActiveRow> rows;
};

// Rows of the inequality sides with |g| <= eps_act at this state.
std::vector<ActiveRow> active_rows(const EdgeConstraint& c, const VehicleGroup& g,
                                   const Vec& p, double t,
                                   double eps_act = kDefaultActivationEps,
                                   int edge = 0);

// Equality rows stacked in declaration order plus the active inequality rows
// (declaration order, upper side before lower).
struct Collected {
  Mat omega_e;
  Vec t_e;
  ActiveSet active;
};
Collected collect(const std::vector<EdgeConstraint>& cs, const VehicleGroup& g,
                  const Vec& p, double t, double eps_act = kDefaultActivationEps);

// Diagnostic evaluation of the range-limited arctangent bearing form
// delta_minus <= atan((y_i - y_j)/(x_i - x_j)) - theta_j <= delta_plus.
// Returns (upper, lower) residuals in <= 0 form. Kept for comparison against
// the cone form; no codistribution is derived from it.
std::pair<double, double> arctan_visibility_residuals(const VehicleGroup& g,
                                                      const Vec& p, int i, int j,
                                                      double delta_minus,
                                                      double delta_plus);

}  // namespace coordfeas
