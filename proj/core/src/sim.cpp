#include "coordfeas/sim.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <utility>
#include <variant>

#include "coordfeas/errors.hpp"
#include "coordfeas/log.hpp"

namespace coordfeas {

namespace {

constexpr int kMaxEventsPerStep = 64;
constexpr int kBisectionIters = 40;
constexpr double kInitialEqualityTol = 1e-9;

std::string fmt_time(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", t);
  return buf;
}

// One flattened residual slot; mirrors residual_slots() across the list.
struct Slot {
  int constraint = -1;
  Side side = Side::Single;
  int channel = 0;
  bool inequality = false;
};

std::vector<Slot> build_slots(const std::vector<EdgeConstraint>& cs) {
  std::vector<Slot> slots;
  for (int k = 0; k < static_cast<int>(cs.size()); ++k) {
    const bool ineq = !is_equality(cs[static_cast<size_t>(k)]);
    for (const Residual& r : residual_slots(cs[static_cast<size_t>(k)])) {
      slots.push_back({k, r.side, r.channel, ineq});
    }
  }
  return slots;
}

Mat pack_basis(const std::vector<Vec>& basis, int n) {
  Mat b(n, static_cast<Eigen::Index>(basis.size()));
  for (size_t i = 0; i < basis.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = basis[i];
  return b;
}

// Closest orthonormal basis of span(fresh) to ref (orthogonal Procrustes,
// reflections allowed). The canonical null basis is only piecewise continuous
// along a trajectory: its pivot signs can flip when a heading crosses +-pi/2,
// which would silently reverse a held weight mid-step. Aligning each re-solved
// basis to a reference transported along committed states removes the jumps.
Mat align_basis(Mat fresh, const Mat& ref) {
  if (fresh.cols() == 0 || ref.rows() != fresh.rows() || ref.cols() != fresh.cols()) {
    return fresh;
  }
  Eigen::JacobiSVD<Mat> svd(fresh.transpose() * ref,
                            Eigen::ComputeFullU | Eigen::ComputeFullV);
  return fresh * (svd.matrixU() * svd.matrixV().transpose());
}

// MotionFamily::combine against an explicit (aligned) basis matrix.
Vec combine_with(const Vec& kbar, const Mat& basis, const Vec& w) {
  Vec out = kbar;
  const Eigen::Index k = std::min<Eigen::Index>(basis.cols(), w.size());
  if (k > 0) out += basis.leftCols(k) * w.head(k);
  return out;
}

class Engine {
 public:
  Engine(const Scenario& s, TrajectoryLog& log)
      : s_(s), log_(log), group_(s.group()), slots_(build_slots(s.constraints)) {
    if (s_.tree) topo_ = topological_order(*s_.tree);
    int off = 0;
    for (int v = 0; v < group_.count(); ++v) {
      control_offsets_.push_back(off);
      off += control_dim(group_.kind(v));
    }
    weight_cols_ = off;
    if (s_.cruise.size() == weight_cols_) {
      for (int v = 0; v < group_.count(); ++v) {
        cruise_slices_.push_back(
            s_.cruise.segment(control_offsets_[static_cast<size_t>(v)],
                              control_dim(group_.kind(v))));
      }
    }
  }

  void execute() {
    p_ = s_.initial_composite();
    on_.assign(slots_.size(), 0);
    wt_.assign(static_cast<size_t>(group_.count()), Vec());
    ref_graph_ = Mat();
    ref_tree_.assign(static_cast<size_t>(group_.count()), Mat());
    strategies_.assign(s_.tree ? static_cast<size_t>(group_.count()) : 1,
                       SelectionStrategy::Unconstrained);
    try {
      const std::vector<double> res0 = residual_values(p_, 0.0);
      for (size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i].inequality && res0[i] >= -s_.eps_act) on_[i] = 1;
      }
      reselect(p_, 0.0);
      record_sample(0.0);
      const long n_steps = std::lround(s_.duration / s_.step);
      for (long k = 0; k < n_steps; ++k) {
        do_step(static_cast<double>(k) * s_.step);
        const double t1 = static_cast<double>(k + 1) * s_.step;
        boundary(t1);
        record_sample(t1);
      }
      log_.completed = true;
    } catch (const Error& e) {
      log_.completed = false;
      log_.message = e.what();
      log_warn(std::string("run aborted: ") + e.what());
    }
  }

 private:
  std::vector<double> residual_values(const Vec& p, double t) const {
    std::vector<double> out;
    out.reserve(slots_.size());
    for (const EdgeConstraint& c : s_.constraints) {
      for (const Residual& r : residuals(c, group_, p, t)) out.push_back(r.g);
    }
    return out;
  }

  std::vector<BindingSide> binding() const {
    std::vector<BindingSide> b;
    for (size_t i = 0; i < slots_.size(); ++i) {
      if (on_[i]) b.emplace_back(slots_[i].constraint, slots_[i].side);
    }
    return b;
  }

  bool any_on() const {
    return std::any_of(on_.begin(), on_.end(), [](std::uint8_t v) { return v != 0; });
  }

  [[noreturn]] void fail(FeasibilityStatus st, const std::string& note, double t) {
    log_.last_status = st;
    std::string msg = std::string(status_name(st)) + " at t=" + fmt_time(t);
    if (!note.empty()) msg += ": " + note;
    throw Error(msg);
  }

  void reselect(const Vec& p, double t) {
    const std::vector<BindingSide> bind = binding();
    CheckOptions base;
    base.eps_act = s_.eps_act;
    base.margin = s_.margin;
    base.bound = s_.bound;
    // Discrete integration lets an active row creep outside the boundary by
    // O(h^2) per step; a 1/h pull-back gain makes each re-selection cancel
    // that creep instead of merely zeroing the outward rate.
    base.stabilization = 1.0 / s_.step;
    if (!s_.tree) {
      if (s_.cruise.size() > 0) base.cruise = s_.cruise;
      const FeasibilityReport rep = solve_graph(group_, s_.constraints, p, t, bind, base);
      if (rep.status != FeasibilityStatus::Feasible || !rep.selection) {
        fail(rep.status, rep.diag.note, t);
      }
      wg_ = rep.selection->weights;
      strategies_[0] = rep.selection->strategy;
      // The selected weights are expressed in this basis; start the next
      // alignment chain from it.
      ref_graph_ = rep.family ? pack_basis(rep.family->basis, group_.total_dim()) : Mat();
      return;
    }
    TreeOptions opts;
    opts.base = base;
    opts.cruise_per_vehicle = cruise_slices_;
    const TreeReport rep =
        solve_tree(group_, *s_.tree, s_.constraints, p, t, bind, opts);
    if (rep.status != FeasibilityStatus::Feasible) {
      const std::string note =
          rep.first_failed >= 0
              ? rep.vehicles[static_cast<size_t>(rep.first_failed)].diag.note
              : std::string();
      fail(rep.status, note, t);
    }
    for (int v = 0; v < group_.count(); ++v) {
      const auto& vrep = rep.vehicles[static_cast<size_t>(v)];
      wt_[static_cast<size_t>(v)] = vrep.selection ? vrep.selection->weights : Vec();
      strategies_[static_cast<size_t>(v)] =
          vrep.selection ? vrep.selection->strategy : SelectionStrategy::Unconstrained;
      ref_tree_[static_cast<size_t>(v)] =
          vrep.family ? pack_basis(vrep.family->basis, group_.dim(v)) : Mat();
    }
  }

  // Composite velocity under the held weights, with the re-solved basis
  // aligned to the selection-time reference; commit advances the reference to
  // the probed state and must only be done at committed states. Throws when an
  // equality stack turns inconsistent.
  Vec velocity(const Vec& p, double t, bool commit = false) {
    if (!s_.tree) {
      const VelocitySystem sys = build_graph_system(group_, s_.constraints, p, t, {});
      const auto fam = motion_family(sys.stack, sys.rhs);
      if (!fam) throw Error("equality stack became inconsistent at t=" + fmt_time(t));
      Mat basis = align_basis(pack_basis(fam->basis, group_.total_dim()), ref_graph_);
      Vec pdot = combine_with(fam->kbar, basis, wg_);
      if (commit) ref_graph_ = std::move(basis);
      return pdot;
    }
    std::vector<Vec> blocks(static_cast<size_t>(group_.count()));
    std::vector<char> have(static_cast<size_t>(group_.count()), 0);
    for (int v : topo_) {
      const int par = s_.tree->parent[static_cast<size_t>(v)];
      const Vec* parent_pdot =
          par >= 0 && have[static_cast<size_t>(par)] ? &blocks[static_cast<size_t>(par)]
                                                     : nullptr;
      const VelocitySystem sys =
          build_block_system(group_, v, par, s_.constraints, p, t, {}, parent_pdot);
      const auto fam = motion_family(sys.stack, sys.rhs);
      if (!fam) {
        throw Error("velocity stack for vehicle " + std::to_string(v) +
                    " became inconsistent at t=" + fmt_time(t));
      }
      Mat basis = align_basis(pack_basis(fam->basis, group_.dim(v)),
                              ref_tree_[static_cast<size_t>(v)]);
      blocks[static_cast<size_t>(v)] =
          combine_with(fam->kbar, basis, wt_[static_cast<size_t>(v)]);
      if (commit) ref_tree_[static_cast<size_t>(v)] = std::move(basis);
      have[static_cast<size_t>(v)] = 1;
    }
    return group_.assemble(blocks);
  }

  Vec advance(const Vec& p, double t, double dt) {
    Vec q;
    if (s_.integrator == Integrator::Euler) {
      q = p + dt * velocity(p, t);
    } else {
      const Vec k1 = velocity(p, t);
      const Vec k2 = velocity(p + 0.5 * dt * k1, t + 0.5 * dt);
      const Vec k3 = velocity(p + 0.5 * dt * k2, t + 0.5 * dt);
      const Vec k4 = velocity(p + dt * k3, t + dt);
      q = p + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (s_.projection) {
      q = project_equalities(group_, s_.constraints, q, s_.projection_tol);
    }
    return q;
  }

  // Largest residual over the inactive inequality slots; the step crosses an
  // activation boundary when this reaches -eps_act.
  double worst_off_residual(const std::vector<double>& res) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i].inequality && !on_[i]) worst = std::max(worst, res[i]);
    }
    return worst;
  }

  void emit(double t, EventKind kind, size_t slot) {
    const Slot& sl = slots_[slot];
    log_.events.push_back({t, kind, sl.constraint, sl.side, sl.channel});
  }

  void do_step(double t0) {
    double consumed = 0.0;
    int guard = 0;
    while (s_.step - consumed > 1e-12 * s_.step) {
      if (++guard > kMaxEventsPerStep) {
        throw Error("event iteration limit exceeded near t=" + fmt_time(t0 + consumed));
      }
      const double t = t0 + consumed;
      const double dt = s_.step - consumed;
      Vec full = advance(p_, t, dt);
      double worst = worst_off_residual(residual_values(full, t + dt));
      if (worst < -s_.eps_act) {
        p_ = std::move(full);
        consumed += dt;
        continue;
      }
      // A crossing lies inside (t, t + dt]; bisect the step fraction until the
      // leading inactive slot lands inside the activation window.
      double hi = dt;
      Vec hi_state = std::move(full);
      if (worst > s_.eps_act) {
        double lo = 0.0;
        for (int iter = 0; iter < kBisectionIters && worst > s_.eps_act; ++iter) {
          const double mid = 0.5 * (lo + hi);
          Vec mid_state = advance(p_, t, mid);
          const double mid_worst = worst_off_residual(residual_values(mid_state, t + mid));
          if (mid_worst >= -s_.eps_act) {
            hi = mid;
            hi_state = std::move(mid_state);
            worst = mid_worst;
          } else {
            lo = mid;
          }
        }
      }
      p_ = std::move(hi_state);
      consumed += hi;
      const double tc = t0 + consumed;
      const std::vector<double> res = residual_values(p_, tc);
      bool activated = false;
      for (size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i].inequality && !on_[i] && res[i] >= -s_.eps_act) {
          on_[i] = 1;
          emit(tc, EventKind::Activate, i);
          activated = true;
        }
      }
      if (activated) reselect(p_, tc);
    }
  }

  // Step-boundary housekeeping: hysteresis release, then a drift check that
  // re-solves when a held direction no longer pushes a binding row inward.
  void boundary(double t1) {
    const std::vector<double> res = residual_values(p_, t1);
    bool changed = false;
    for (size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i].inequality && on_[i] && res[i] < -2.0 * s_.eps_act) {
        on_[i] = 0;
        emit(t1, EventKind::Deactivate, i);
        changed = true;
      }
    }
    bool drift = false;
    if (!changed && any_on()) {
      const Vec pdot = velocity(p_, t1);
      const double thresh = -0.5 * s_.margin + 1e-9;
      for (size_t i = 0; i < slots_.size(); ++i) {
        if (!on_[i]) continue;
        const Vec row = inequality_gradient(
            s_.constraints[static_cast<size_t>(slots_[i].constraint)], slots_[i].side,
            group_, p_);
        if (row.dot(pdot) > thresh) {
          drift = true;
          emit(t1, EventKind::Reselect, i);
          break;
        }
      }
    }
    if (changed || drift) reselect(p_, t1);
  }

  Vec padded_weights() const {
    Vec w = Vec::Constant(weight_cols_, std::numeric_limits<double>::quiet_NaN());
    if (!s_.tree) {
      const int n = std::min<int>(static_cast<int>(wg_.size()), weight_cols_);
      for (int l = 0; l < n; ++l) w(l) = wg_(l);
      return w;
    }
    for (int v = 0; v < group_.count(); ++v) {
      const Vec& wv = wt_[static_cast<size_t>(v)];
      const int n = std::min<int>(static_cast<int>(wv.size()), control_dim(group_.kind(v)));
      for (int l = 0; l < n; ++l) w(control_offsets_[static_cast<size_t>(v)] + l) = wv(l);
    }
    return w;
  }

  void record_sample(double t) {
    Sample smp;
    smp.t = t;
    smp.p = p_;
    // Samples land exactly at committed states, so this is also where the
    // alignment reference gets transported forward.
    const Vec pdot = velocity(p_, t, /*commit=*/true);
    smp.controls.reserve(static_cast<size_t>(group_.count()));
    for (int v = 0; v < group_.count(); ++v) {
      smp.controls.push_back(controls_from_velocity(
          group_.kind(v), group_.slice(p_, v), pdot.segment(group_.offset(v), group_.dim(v))));
    }
    smp.residuals = residual_values(p_, t);
    smp.active.assign(on_.begin(), on_.end());
    smp.weights = padded_weights();
    smp.strategies = strategies_;
    log_.samples.push_back(std::move(smp));
  }

  const Scenario& s_;
  TrajectoryLog& log_;
  VehicleGroup group_;
  std::vector<Slot> slots_;
  std::vector<int> topo_;
  std::vector<int> control_offsets_;
  std::vector<Vec> cruise_slices_;
  int weight_cols_ = 0;

  Vec p_;
  std::vector<std::uint8_t> on_;
  Vec wg_;
  std::vector<Vec> wt_;
  Mat ref_graph_;              // alignment reference for the held-weight basis
  std::vector<Mat> ref_tree_;  // per-vehicle references in tree mode
  std::vector<SelectionStrategy> strategies_;
};

void check_kind_params(const VehicleKind& kind, int v, std::vector<std::string>& out) {
  if (const auto* cs = std::get_if<ConstantSpeed>(&kind); cs != nullptr) {
    if (!std::isfinite(cs->speed) || std::abs(cs->speed) < 1e-12) {
      out.push_back("vehicle " + std::to_string(v) + ": constant speed must be nonzero");
    }
  } else if (const auto* car = std::get_if<CarLike>(&kind); car != nullptr) {
    if (!std::isfinite(car->wheelbase) || car->wheelbase <= 0.0) {
      out.push_back("vehicle " + std::to_string(v) + ": wheelbase must be positive");
    }
  }
}

void check_constraint_shape(const EdgeConstraint& c, int k, const Scenario& s,
                            std::vector<std::string>& out) {
  const auto where = [k](const std::string& what) {
    return "constraint " + std::to_string(k) + ": " + what;
  };
  const int n = static_cast<int>(s.kinds.size());
  const auto [i, j] = edge_of(c);
  if (i < 0 || i >= n || (j != -1 && (j < 0 || j >= n))) {
    out.push_back(where("vehicle index out of range"));
    return;
  }
  if (j != -1 && i == j) {
    out.push_back(where("must reference two distinct vehicles"));
    return;
  }
  if (const auto* deq = std::get_if<DistanceEq>(&c); deq != nullptr) {
    if (!(deq->d > 0.0)) out.push_back(where("distance must be positive"));
  } else if (const auto* band = std::get_if<DistanceBand>(&c); band != nullptr) {
    if (!(band->d_minus > 0.0) || !(band->d_plus > band->d_minus)) {
      out.push_back(where("band needs 0 < d_minus < d_plus"));
    } else {
      const double gap = (band->d_plus * band->d_plus - band->d_minus * band->d_minus) / 4.0;
      if (!(s.eps_act < gap)) {
        out.push_back(where("activation window does not fit inside the band"));
      }
    }
  } else if (const auto* hband = std::get_if<HeadingBand>(&c); hband != nullptr) {
    if (!(hband->delta_plus > hband->delta_minus)) {
      out.push_back(where("band needs delta_minus < delta_plus"));
    } else if (!(s.eps_act < (hband->delta_plus - hband->delta_minus) / 2.0)) {
      out.push_back(where("activation window does not fit inside the band"));
    }
  } else if (const auto* vis = std::get_if<Visibility>(&c); vis != nullptr) {
    if (!(vis->cone > 0.0) || !(vis->cone < std::numbers::pi / 2.0)) {
      out.push_back(where("cone half-angle must lie in (0, pi/2)"));
    }
  } else if (const auto* st = std::get_if<SpeedTrack>(&c); st != nullptr) {
    const int want = velocity_channel_count(s.kinds[static_cast<size_t>(st->i)]);
    if (static_cast<int>(st->refs.size()) != want) {
      out.push_back(where("expected " + std::to_string(want) + " reference(s)"));
    }
    for (const TimeFunction& f : st->refs) {
      if (const auto* pw = std::get_if<PiecewiseLinear>(&f); pw != nullptr) {
        if (pw->points.empty()) {
          out.push_back(where("piecewise reference needs at least one knot"));
        }
        for (size_t q = 1; q < pw->points.size(); ++q) {
          if (!(pw->points[q].first > pw->points[q - 1].first)) {
            out.push_back(where("piecewise knots must have increasing times"));
            break;
          }
        }
      }
    }
  }
}

}  // namespace

const char* integrator_name(Integrator i) {
  return i == Integrator::Euler ? "euler" : "rk4";
}

const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::Activate: return "activate";
    case EventKind::Deactivate: return "deactivate";
    case EventKind::Reselect: return "reselect";
  }
  return "?";
}

VehicleGroup Scenario::group() const { return VehicleGroup(kinds); }

Vec Scenario::initial_composite() const { return group().assemble(initial); }

int Scenario::weight_columns() const {
  int w = 0;
  for (const VehicleKind& k : kinds) w += control_dim(k);
  return w;
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> out;
  const int n = static_cast<int>(s.kinds.size());
  if (n == 0) out.push_back("at least one vehicle is required");
  if (s.initial.size() != s.kinds.size()) {
    out.push_back("expected one initial state per vehicle");
  }
  for (int v = 0; v < n; ++v) {
    check_kind_params(s.kinds[static_cast<size_t>(v)], v, out);
    if (v >= static_cast<int>(s.initial.size())) continue;
    const Vec& st = s.initial[static_cast<size_t>(v)];
    if (st.size() != state_dim(s.kinds[static_cast<size_t>(v)])) {
      out.push_back("vehicle " + std::to_string(v) + ": initial state has wrong dimension");
      continue;
    }
    if (!st.allFinite()) {
      out.push_back("vehicle " + std::to_string(v) + ": initial state must be finite");
      continue;
    }
    if (std::holds_alternative<CarLike>(s.kinds[static_cast<size_t>(v)]) &&
        std::abs(st(3)) >= std::numbers::pi / 2.0 - kSteeringGuard) {
      out.push_back("vehicle " + std::to_string(v) + ": steering angle outside the guard");
    }
  }

  if (!(s.step > 0.0) || !std::isfinite(s.step)) {
    out.push_back("step must be positive and finite");
  }
  if (s.duration < 0.0 || !std::isfinite(s.duration)) {
    out.push_back("duration must be nonnegative and finite");
  } else if (s.duration > 0.0 && s.step > 0.0) {
    const double steps = std::round(s.duration / s.step);
    if (steps < 0.5) {
      out.push_back("nonzero duration must cover at least one step");
    } else if (std::abs(steps * s.step - s.duration) >
               1e-9 * std::max(1.0, s.duration)) {
      out.push_back("duration must be an integer multiple of step");
    }
  }
  if (!(s.eps_act > 0.0) || !std::isfinite(s.eps_act)) {
    out.push_back("eps_act must be positive");
  }
  if (!(s.bound > 0.0) || !std::isfinite(s.bound)) {
    out.push_back("bound must be positive");
  }
  if (s.margin < 0.0 || !std::isfinite(s.margin)) {
    out.push_back("margin must be nonnegative");
  }
  if (!(s.projection_tol > 0.0) || !std::isfinite(s.projection_tol)) {
    out.push_back("projection_tol must be positive");
  }
  if (s.cruise.size() != 0) {
    if (s.cruise.size() != s.weight_columns()) {
      out.push_back("cruise must list one weight per control channel (" +
                    std::to_string(s.weight_columns()) + ")");
    } else if (!s.cruise.allFinite()) {
      out.push_back("cruise weights must be finite");
    }
  }
  if (!out.empty()) return out;

  for (int k = 0; k < static_cast<int>(s.constraints.size()); ++k) {
    check_constraint_shape(s.constraints[static_cast<size_t>(k)], k, s, out);
  }
  if (s.tree) {
    for (std::string& msg : validate_tree(*s.tree, n)) out.push_back(std::move(msg));
    if (out.empty()) {
      for (int k = 0; k < static_cast<int>(s.constraints.size()); ++k) {
        const auto [i, j] = edge_of(s.constraints[static_cast<size_t>(k)]);
        if (j == -1) continue;
        if (s.tree->parent[static_cast<size_t>(i)] != j &&
            s.tree->parent[static_cast<size_t>(j)] != i) {
          out.push_back("constraint " + std::to_string(k) +
                        ": pairwise constraints must join a vehicle to its parent");
        }
      }
    }
  }
  if (!out.empty()) return out;

  const VehicleGroup g = s.group();
  const Vec p0 = s.initial_composite();
  for (int k = 0; k < static_cast<int>(s.constraints.size()); ++k) {
    const EdgeConstraint& c = s.constraints[static_cast<size_t>(k)];
    if (std::holds_alternative<SpeedTrack>(c)) continue;  // velocity level
    try {
      for (const Residual& r : residuals(c, g, p0, 0.0)) {
        if (is_equality(c)) {
          if (std::abs(r.g) > kInitialEqualityTol) {
            out.push_back("constraint " + std::to_string(k) +
                          ": equality not met at t=0 (|g| = " + std::to_string(r.g) + ")");
          }
        } else if (r.g > s.eps_act) {
          out.push_back("constraint " + std::to_string(k) + " (" + residual_label(c, r) +
                        "): violated at t=0 (g = " + std::to_string(r.g) + ")");
        }
      }
    } catch (const DegenerateGeometry&) {
      out.push_back("constraint " + std::to_string(k) +
                    ": vehicles coincide at t=0");
    }
  }
  return out;
}

std::vector<std::string> residual_layout(const Scenario& s) {
  std::vector<std::string> out;
  for (int k = 0; k < static_cast<int>(s.constraints.size()); ++k) {
    const EdgeConstraint& c = s.constraints[static_cast<size_t>(k)];
    for (const Residual& r : residual_slots(c)) {
      out.push_back(std::to_string(k) + "_" + residual_label(c, r));
    }
  }
  return out;
}

Vec project_equalities(const VehicleGroup& g, const std::vector<EdgeConstraint>& cs,
                       const Vec& p, double tol, int max_iters) {
  std::vector<const EdgeConstraint*> eqs;
  for (const EdgeConstraint& c : cs) {
    if (is_equality(c) && !std::holds_alternative<SpeedTrack>(c)) eqs.push_back(&c);
  }
  if (eqs.empty()) return p;

  const int m = static_cast<int>(eqs.size());
  Vec q = p;
  for (int iter = 0; iter <= max_iters; ++iter) {
    Mat jac(m, g.total_dim());
    Vec r(m);
    for (int e = 0; e < m; ++e) {
      r(e) = residuals(*eqs[static_cast<size_t>(e)], g, q, 0.0)[0].g;
      jac.row(e) = equality_rows(*eqs[static_cast<size_t>(e)], g, q, 0.0).omega.row(0);
    }
    if (r.cwiseAbs().maxCoeff() <= tol) return q;
    if (iter == max_iters) break;
    const auto dp = solve_particular(jac, -r);
    if (!dp) {
      throw ProjectionDiverged("equality restoration hit an inconsistent gradient system");
    }
    q += *dp;
  }
  throw ProjectionDiverged("equality restoration did not converge");
}

TrajectoryLog run(const Scenario& s) {
  TrajectoryLog log;
  const std::vector<std::string> violations = validate(s);
  if (!violations.empty()) {
    log.completed = false;
    std::string msg = "invalid scenario:";
    for (const std::string& v : violations) msg += "\n  - " + v;
    log.message = std::move(msg);
    return log;
  }
  Engine engine(s, log);
  engine.execute();
  return log;
}

}  // namespace coordfeas
