#include "coordfeas/constraints.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

#include "coordfeas/errors.hpp"

namespace coordfeas {

namespace {

constexpr double kPi = std::numbers::pi;

struct PairGeometry {
  double ax = 0.0, ay = 0.0;  // p_i - p_j in the plane
  double norm = 0.0;
  int oi = 0, oj = 0;  // block offsets
};

PairGeometry pair_geometry(const VehicleGroup& g, const Vec& p, int i, int j) {
  PairGeometry geo;
  geo.oi = g.offset(i);
  geo.oj = g.offset(j);
  geo.ax = p(geo.oi + 0) - p(geo.oj + 0);
  geo.ay = p(geo.oi + 1) - p(geo.oj + 1);
  geo.norm = std::hypot(geo.ax, geo.ay);
  return geo;
}

double half_square_gap(const PairGeometry& geo, double d) {
  return 0.5 * (geo.ax * geo.ax + geo.ay * geo.ay - d * d);
}

// Gradient of (||a||^2 - const)/2: +a on vehicle i, -a on vehicle j.
Vec distance_gradient(const VehicleGroup& g, const PairGeometry& geo) {
  Vec row = Vec::Zero(g.total_dim());
  row(geo.oi + 0) = geo.ax;
  row(geo.oi + 1) = geo.ay;
  row(geo.oj + 0) = -geo.ax;
  row(geo.oj + 1) = -geo.ay;
  return row;
}

Vec heading_gradient(const VehicleGroup& g, int i, int j) {
  Vec row = Vec::Zero(g.total_dim());
  row(g.offset(i) + 2) = 1.0;
  row(g.offset(j) + 2) = -1.0;
  return row;
}

Vec visibility_gradient(const VehicleGroup& g, const Vec& p, const Visibility& v) {
  const PairGeometry geo = pair_geometry(g, p, v.i, v.j);
  if (geo.norm <= kGeometryEps) {
    throw DegenerateGeometry("visibility gradient undefined at coincident positions");
  }
  const double thj = p(geo.oj + 2);
  const double bx = std::cos(thj), by = std::sin(thj);
  const double cx = -by, cy = bx;
  const double scale = std::cos(v.cone) / geo.norm;
  Vec row = Vec::Zero(g.total_dim());
  row(geo.oi + 0) = scale * geo.ax - bx;
  row(geo.oi + 1) = scale * geo.ay - by;
  row(geo.oj + 0) = -(scale * geo.ax - bx);
  row(geo.oj + 1) = -(scale * geo.ay - by);
  row(geo.oj + 2) = -(geo.ax * cx + geo.ay * cy);
  return row;
}

}  // namespace

double wrap_to_pi(double angle) {
  double w = std::remainder(angle, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

bool is_equality(const EdgeConstraint& c) {
  return std::holds_alternative<DistanceEq>(c) || std::holds_alternative<HeadingEq>(c) ||
         std::holds_alternative<SpeedTrack>(c);
}

std::pair<int, int> edge_of(const EdgeConstraint& c) {
  return std::visit(
      [](const auto& v) -> std::pair<int, int> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SpeedTrack>) {
          return {v.i, -1};
        } else {
          return {v.i, v.j};
        }
      },
      c);
}

const char* side_name(Side side) {
  switch (side) {
    case Side::Single: return "single";
    case Side::Upper: return "upper";
    case Side::Lower: return "lower";
  }
  return "?";
}

std::vector<Residual> residuals(const EdgeConstraint& c, const VehicleGroup& g,
                                const Vec& p, double t) {
  (void)t;
  if (const auto* deq = std::get_if<DistanceEq>(&c); deq != nullptr) {
    const auto geo = pair_geometry(g, p, deq->i, deq->j);
    return {{Side::Single, 0, half_square_gap(geo, deq->d)}};
  }
  if (const auto* band = std::get_if<DistanceBand>(&c); band != nullptr) {
    const auto geo = pair_geometry(g, p, band->i, band->j);
    return {{Side::Upper, 0, half_square_gap(geo, band->d_plus)},
            {Side::Lower, 0, -half_square_gap(geo, band->d_minus)}};
  }
  if (const auto* heq = std::get_if<HeadingEq>(&c); heq != nullptr) {
    const double dth = p(g.offset(heq->i) + 2) - p(g.offset(heq->j) + 2);
    return {{Side::Single, 0, wrap_to_pi(dth - heq->delta)}};
  }
  if (const auto* hband = std::get_if<HeadingBand>(&c); hband != nullptr) {
    const double dth =
        wrap_to_pi(p(g.offset(hband->i) + 2) - p(g.offset(hband->j) + 2));
    return {{Side::Upper, 0, dth - hband->delta_plus},
            {Side::Lower, 0, hband->delta_minus - dth}};
  }
  if (const auto* vis = std::get_if<Visibility>(&c); vis != nullptr) {
    const auto geo = pair_geometry(g, p, vis->i, vis->j);
    if (geo.norm <= kGeometryEps) {
      throw DegenerateGeometry("visibility residual undefined at coincident positions");
    }
    const double thj = p(geo.oj + 2);
    const double inner = geo.ax * std::cos(thj) + geo.ay * std::sin(thj);
    return {{Side::Single, 0, std::cos(vis->cone) * geo.norm - inner}};
  }
  const auto& st = std::get<SpeedTrack>(c);
  std::vector<Residual> out;
  out.reserve(st.refs.size());
  for (int ch = 0; ch < static_cast<int>(st.refs.size()); ++ch) {
    // Velocity-level rows have no state residual; emitted for schema stability.
    out.push_back({Side::Single, ch, 0.0});
  }
  return out;
}

std::vector<Residual> residual_slots(const EdgeConstraint& c) {
  if (std::holds_alternative<DistanceEq>(c) || std::holds_alternative<HeadingEq>(c) ||
      std::holds_alternative<Visibility>(c)) {
    return {{Side::Single, 0, 0.0}};
  }
  if (std::holds_alternative<DistanceBand>(c) || std::holds_alternative<HeadingBand>(c)) {
    return {{Side::Upper, 0, 0.0}, {Side::Lower, 0, 0.0}};
  }
  const auto& st = std::get<SpeedTrack>(c);
  std::vector<Residual> out;
  out.reserve(st.refs.size());
  for (int ch = 0; ch < static_cast<int>(st.refs.size()); ++ch) {
    out.push_back({Side::Single, ch, 0.0});
  }
  return out;
}

std::string residual_label(const EdgeConstraint& c, const Residual& r) {
  if (std::holds_alternative<SpeedTrack>(c)) {
    return "ch" + std::to_string(r.channel + 1);
  }
  return side_name(r.side);
}

EqualityRows equality_rows(const EdgeConstraint& c, const VehicleGroup& g,
                           const Vec& p, double t) {
  if (const auto* deq = std::get_if<DistanceEq>(&c); deq != nullptr) {
    const auto geo = pair_geometry(g, p, deq->i, deq->j);
    EqualityRows out;
    out.omega = Mat(1, g.total_dim());
    out.omega.row(0) = distance_gradient(g, geo).transpose();
    out.rhs = Vec::Zero(1);
    return out;
  }
  if (const auto* heq = std::get_if<HeadingEq>(&c); heq != nullptr) {
    EqualityRows out;
    out.omega = Mat(1, g.total_dim());
    out.omega.row(0) = heading_gradient(g, heq->i, heq->j).transpose();
    out.rhs = Vec::Zero(1);
    return out;
  }
  if (const auto* st = std::get_if<SpeedTrack>(&c); st != nullptr) {
    const Vec state = g.slice(p, st->i);
    const Mat rows = velocity_channel_rows(g.kind(st->i), state);
    const int n_rows = static_cast<int>(st->refs.size());
    if (n_rows != rows.rows()) {
      throw Error("speed tracking needs " + std::to_string(rows.rows()) +
                  " references, got " + std::to_string(n_rows));
    }
    EqualityRows out;
    out.omega = Mat::Zero(n_rows, g.total_dim());
    out.rhs = Vec(n_rows);
    for (int r = 0; r < n_rows; ++r) {
      out.omega.block(r, g.offset(st->i), 1, g.dim(st->i)) = rows.row(r);
      out.rhs(r) = eval(st->refs[r], t);
    }
    return out;
  }
  throw WrongVariant("equality rows requested for an inequality constraint");
}

Vec inequality_gradient(const EdgeConstraint& c, Side side, const VehicleGroup& g,
                        const Vec& p) {
  if (const auto* band = std::get_if<DistanceBand>(&c); band != nullptr) {
    const auto geo = pair_geometry(g, p, band->i, band->j);
    if (side == Side::Upper) return distance_gradient(g, geo);
    if (side == Side::Lower) return Vec(-distance_gradient(g, geo));
    throw WrongVariant("distance band has upper and lower sides only");
  }
  if (const auto* hband = std::get_if<HeadingBand>(&c); hband != nullptr) {
    if (side == Side::Upper) return heading_gradient(g, hband->i, hband->j);
    if (side == Side::Lower) return Vec(-heading_gradient(g, hband->i, hband->j));
    throw WrongVariant("heading band has upper and lower sides only");
  }
  if (const auto* vis = std::get_if<Visibility>(&c); vis != nullptr) {
    if (side != Side::Single) {
      throw WrongVariant("visibility is single-sided");
    }
    return visibility_gradient(g, p, *vis);
  }
  throw WrongVariant("inequality gradient requested for an equality constraint");
}

std::vector<ActiveRow> active_rows(const EdgeConstraint& c, const VehicleGroup& g,
                                   const Vec& p, double t, double eps_act, int edge) {
  if (is_equality(c)) return {};
  std::vector<ActiveRow> out;
  for (const Residual& r : residuals(c, g, p, t)) {
    if (std::abs(r.g) <= eps_act) {
      out.push_back({edge, r.side, inequality_gradient(c, r.side, g, p), r.g});
    }
  }
  return out;
}

Collected collect(const std::vector<EdgeConstraint>& cs, const VehicleGroup& g,
                  const Vec& p, double t, double eps_act) {
  std::vector<EqualityRows> eq;
  int eq_rows = 0;
  Collected out;
  out.active.time = t;
  for (int k = 0; k < static_cast<int>(cs.size()); ++k) {
    if (is_equality(cs[k])) {
      eq.push_back(equality_rows(cs[k], g, p, t));
      eq_rows += static_cast<int>(eq.back().omega.rows());
    } else {
      for (auto& row : active_rows(cs[k], g, p, t, eps_act, k)) {
        out.active.rows.push_back(std::move(row));
      }
    }
  }
  out.omega_e = Mat::Zero(eq_rows, g.total_dim());
  out.t_e = Vec::Zero(eq_rows);
  int row = 0;
  for (const auto& block : eq) {
    const int r = static_cast<int>(block.omega.rows());
    out.omega_e.middleRows(row, r) = block.omega;
    out.t_e.segment(row, r) = block.rhs;
    row += r;
  }
  return out;
}

std::pair<double, double> arctan_visibility_residuals(const VehicleGroup& g,
                                                      const Vec& p, int i, int j,
                                                      double delta_minus,
                                                      double delta_plus) {
  const auto geo = pair_geometry(g, p, i, j);
  const double bearing = std::atan(geo.ay / geo.ax);
  const double offset = bearing - p(geo.oj + 2);
  return {offset - delta_plus, delta_minus - offset};
}

}  // namespace coordfeas
