#include "coordfeas/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "coordfeas/errors.hpp"
#include "coordfeas/log.hpp"

namespace coordfeas {

namespace {

constexpr double kCertSlack = 1e-10;
constexpr std::uint64_t kComboCap = 100000;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

Vec weights_from_cruise(const std::optional<Vec>& cruise, int kappa, double bound) {
  Vec w = Vec::Zero(kappa);
  if (cruise) {
    const int n = std::min<int>(kappa, static_cast<int>(cruise->size()));
    for (int l = 0; l < n; ++l) w(l) = clamp((*cruise)(l), -bound, bound);
  }
  return w;
}

bool certified(const std::vector<DirectionalBound>& rows, const Vec& pdot, double margin) {
  for (const auto& r : rows) {
    if (r.row.dot(pdot) > r.rhs - margin + kCertSlack) return false;
  }
  return true;
}

// Exact minimum-norm mixture: enumerate tight subsets of the half-space and box
// rows; each subset's minimum-norm tight point is a KKT candidate, and the
// feasibility filter plus the norm comparison recover the global optimum.
std::optional<Vec> combo_minimum_norm(const Mat& a, const Vec& c, double bound) {
  const int m = static_cast<int>(a.rows());
  const int kappa = static_cast<int>(a.cols());
  auto feasible = [&](const Vec& w) {
    for (int l = 0; l < kappa; ++l) {
      if (std::abs(w(l)) > bound + kCertSlack) return false;
    }
    return m == 0 || ((a * w - c).maxCoeff() <= kCertSlack);
  };

  // Generators: the m half-space rows, then w_l <= bound and -w_l <= bound.
  const int gen = m + 2 * kappa;
  auto gen_row = [&](int idx, Vec& row, double& rhs) {
    if (idx < m) {
      row = a.row(idx).transpose();
      rhs = c(idx);
      return;
    }
    const int l = (idx - m) / 2;
    const double sign = ((idx - m) % 2 == 0) ? 1.0 : -1.0;
    row = sign * Vec::Unit(kappa, l);
    rhs = bound;
  };

  std::uint64_t combos = 1;  // the empty subset
  {
    std::uint64_t binom = 1;
    for (int s = 1; s <= kappa && combos <= kComboCap; ++s) {
      binom = binom * static_cast<std::uint64_t>(gen - s + 1) / static_cast<std::uint64_t>(s);
      combos += binom;
    }
  }
  if (combos > kComboCap) {
    // Alternating-projection fallback for oversized instances.
    Vec w = Vec::Zero(kappa);
    Vec row(kappa);
    double rhs = 0.0;
    for (int iter = 0; iter < 2000; ++iter) {
      bool moved = false;
      for (int idx = 0; idx < gen; ++idx) {
        gen_row(idx, row, rhs);
        const double viol = row.dot(w) - rhs;
        if (viol > 1e-12) {
          w -= row * (viol / row.squaredNorm());
          moved = true;
        }
      }
      if (!moved) break;
    }
    if (feasible(w)) return w;
    return std::nullopt;
  }

  std::optional<Vec> best;
  double best_norm2 = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec& w) {
    if (!feasible(w)) return;
    const double n2 = w.squaredNorm();
    if (n2 < best_norm2 - 1e-15) {
      best_norm2 = n2;
      best = w;
    }
  };

  consider(Vec::Zero(kappa));
  std::vector<int> idx;
  for (int size = 1; size <= kappa; ++size) {
    idx.assign(static_cast<size_t>(size), 0);
    for (int s = 0; s < size; ++s) idx[static_cast<size_t>(s)] = s;
    while (true) {
      Mat as(size, kappa);
      Vec cs(size);
      Vec row(kappa);
      double rhs = 0.0;
      for (int s = 0; s < size; ++s) {
        gen_row(idx[static_cast<size_t>(s)], row, rhs);
        as.row(s) = row.transpose();
        cs(s) = rhs;
      }
      if (auto w = solve_particular(as, cs)) consider(*w);
      int pos = size - 1;
      while (pos >= 0 && idx[static_cast<size_t>(pos)] == gen - size + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<size_t>(pos)];
      for (int s = pos + 1; s < size; ++s) {
        idx[static_cast<size_t>(s)] = idx[static_cast<size_t>(s - 1)] + 1;
      }
    }
  }
  return best;
}

// Residual of side `side` of constraint k at (p, t).
double side_residual(const EdgeConstraint& c, const VehicleGroup& g, const Vec& p,
                     double t, Side side) {
  for (const Residual& r : residuals(c, g, p, t)) {
    if (r.side == side) return r.g;
  }
  throw WrongVariant("constraint has no such side");
}

struct SolveCore {
  FeasibilityReport report;
  bool ok = false;  // family exists
};

// Shared tail of every solve: rank diagnostics, family, selection.
SolveCore solve_system(const VelocitySystem& sys, const SelectionOptions& sopts,
                       double tol) {
  SolveCore core;
  FeasibilityReport& rep = core.report;
  rep.diag.kinematic_rows = sys.kinematic_rows;
  rep.diag.equality_rows = sys.equality_rows;
  rep.diag.stack_rows = static_cast<int>(sys.stack.rows());
  rep.diag.stack_rank = rank_of(sys.stack, tol);
  rep.diag.note = sys.note;
  rep.diag.active.rows = sys.binding_rows;
  if (rep.diag.stack_rank < rep.diag.stack_rows) {
    rep.diag.singular_geometry = true;
    if (!rep.diag.note.empty()) rep.diag.note += "; ";
    rep.diag.note += "rank-deficient velocity stack (rank " +
                     std::to_string(rep.diag.stack_rank) + " of " +
                     std::to_string(rep.diag.stack_rows) + " rows)";
  }
  auto fam = motion_family(sys.stack, sys.rhs, tol);
  if (!fam) {
    rep.status = FeasibilityStatus::EqualityInconsistent;
    if (!rep.diag.note.empty()) rep.diag.note += "; ";
    rep.diag.note += "equality rows conflict with the kinematics";
    return core;
  }
  core.ok = true;
  rep.diag.kappa = fam->kappa();
  rep.family = std::move(*fam);
  auto sel = select_weights(*rep.family, sys.bounds, sopts);
  if (!sel) {
    rep.status = FeasibilityStatus::NoFeasibleDirection;
    return core;
  }
  rep.selection = std::move(*sel);
  rep.status = FeasibilityStatus::Feasible;
  return core;
}

}  // namespace

Vec MotionFamily::combine(const Vec& weights) const {
  Vec pdot = kbar;
  const int n = std::min<int>(kappa(), static_cast<int>(weights.size()));
  for (int l = 0; l < n; ++l) pdot += weights(l) * basis[static_cast<size_t>(l)];
  return pdot;
}

std::optional<MotionFamily> motion_family(const Mat& omega_stack, const Vec& t_stack,
                                          double tol) {
  auto kbar = solve_particular(omega_stack, t_stack, tol);
  if (!kbar) return std::nullopt;
  MotionFamily fam;
  fam.kbar = std::move(*kbar);
  fam.basis = null_basis(omega_stack, tol);
  return fam;
}

const char* strategy_name(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::Unconstrained: return "unconstrained";
    case SelectionStrategy::SingleVector: return "single_vector";
    case SelectionStrategy::ComboProgram: return "combo_program";
  }
  return "?";
}

const char* status_name(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::Feasible: return "feasible";
    case FeasibilityStatus::EqualityInconsistent: return "equality_inconsistent";
    case FeasibilityStatus::NoFeasibleDirection: return "no_feasible_direction";
  }
  return "?";
}

std::vector<DirectionalBound> to_bounds(const ActiveSet& active) {
  std::vector<DirectionalBound> rows;
  rows.reserve(active.rows.size());
  for (const ActiveRow& r : active.rows) rows.push_back({r.row, 0.0});
  return rows;
}

std::optional<MotionSelection> select_weights(const MotionFamily& family,
                                              const std::vector<DirectionalBound>& rows,
                                              const SelectionOptions& opts) {
  const int kappa = family.kappa();
  if (rows.empty()) {
    MotionSelection sel;
    sel.weights = weights_from_cruise(opts.cruise, kappa, opts.bound);
    sel.pdot = family.combine(sel.weights);
    sel.strategy = SelectionStrategy::Unconstrained;
    return sel;
  }
  if (kappa == 0) {
    if (!certified(rows, family.kbar, opts.margin)) return std::nullopt;
    MotionSelection sel;
    sel.weights = Vec(0);
    sel.pdot = family.kbar;
    sel.strategy = SelectionStrategy::Unconstrained;
    return sel;
  }

  // Single-vector scan: first admissible basis index, smallest |w| within it.
  for (int l = 0; l < kappa; ++l) {
    double lo = -opts.bound;
    double hi = opts.bound;
    bool impossible = false;
    for (const auto& r : rows) {
      const double alpha = r.row.dot(family.kbar) - r.rhs + opts.margin;
      const double beta = r.row.dot(family.basis[static_cast<size_t>(l)]);
      if (std::abs(beta) <= 1e-14) {
        if (alpha > 0.0) {
          impossible = true;
          break;
        }
        continue;
      }
      const double edge = -alpha / beta;
      if (beta > 0.0) {
        hi = std::min(hi, edge);
      } else {
        lo = std::max(lo, edge);
      }
    }
    if (impossible || lo > hi) continue;
    const double w = (lo > 0.0) ? lo : (hi < 0.0 ? hi : 0.0);
    MotionSelection sel;
    sel.weights = Vec::Zero(kappa);
    sel.weights(l) = w;
    sel.pdot = family.combine(sel.weights);
    if (!certified(rows, sel.pdot, opts.margin)) continue;
    sel.strategy = SelectionStrategy::SingleVector;
    sel.vector_index = l;
    return sel;
  }

  // Mixture program: min ||w||^2 with every row pushed past its margin.
  const int m = static_cast<int>(rows.size());
  Mat a(m, kappa);
  Vec c(m);
  for (int r = 0; r < m; ++r) {
    for (int l = 0; l < kappa; ++l) {
      a(r, l) = rows[static_cast<size_t>(r)].row.dot(family.basis[static_cast<size_t>(l)]);
    }
    c(r) = rows[static_cast<size_t>(r)].rhs - opts.margin -
           rows[static_cast<size_t>(r)].row.dot(family.kbar);
  }
  auto w = combo_minimum_norm(a, c, opts.bound);
  if (!w) return std::nullopt;
  MotionSelection sel;
  sel.weights = std::move(*w);
  sel.pdot = family.combine(sel.weights);
  if (!certified(rows, sel.pdot, opts.margin)) return std::nullopt;
  sel.strategy = SelectionStrategy::ComboProgram;
  return sel;
}

std::vector<BindingSide> binding_by_activation(const std::vector<EdgeConstraint>& cs,
                                               const VehicleGroup& g, const Vec& p,
                                               double t, double eps_act) {
  std::vector<BindingSide> binding;
  for (int k = 0; k < static_cast<int>(cs.size()); ++k) {
    if (is_equality(cs[static_cast<size_t>(k)])) continue;
    for (const Residual& r : residuals(cs[static_cast<size_t>(k)], g, p, t)) {
      if (std::abs(r.g) <= eps_act) binding.push_back({k, r.side});
    }
  }
  return binding;
}

VelocitySystem build_graph_system(const VehicleGroup& g,
                                  const std::vector<EdgeConstraint>& cs, const Vec& p,
                                  double t, const std::vector<BindingSide>& binding) {
  VelocitySystem sys;
  auto [omega_k, t_k] = stack_kinematics(g, p);
  std::vector<EqualityRows> eq;
  int eq_rows = 0;
  for (const EdgeConstraint& c : cs) {
    if (!is_equality(c)) continue;
    eq.push_back(equality_rows(c, g, p, t));
    eq_rows += static_cast<int>(eq.back().omega.rows());
  }
  sys.kinematic_rows = static_cast<int>(omega_k.rows());
  sys.equality_rows = eq_rows;
  sys.stack = Mat::Zero(sys.kinematic_rows + eq_rows, g.total_dim());
  sys.rhs = Vec::Zero(sys.kinematic_rows + eq_rows);
  sys.stack.topRows(sys.kinematic_rows) = omega_k;
  sys.rhs.head(sys.kinematic_rows) = t_k;
  int row = sys.kinematic_rows;
  for (const auto& block : eq) {
    const int r = static_cast<int>(block.omega.rows());
    sys.stack.middleRows(row, r) = block.omega;
    sys.rhs.segment(row, r) = block.rhs;
    row += r;
  }
  for (const auto& [k, side] : binding) {
    const EdgeConstraint& c = cs[static_cast<size_t>(k)];
    if (is_equality(c)) continue;
    ActiveRow ar{k, side, inequality_gradient(c, side, g, p),
                 side_residual(c, g, p, t, side)};
    sys.bounds.push_back({ar.row, 0.0});
    sys.binding_rows.push_back(std::move(ar));
  }
  return sys;
}

VelocitySystem build_block_system(const VehicleGroup& g, int v, int parent,
                                  const std::vector<EdgeConstraint>& cs, const Vec& p,
                                  double t, const std::vector<BindingSide>& binding,
                                  const Vec* parent_pdot) {
  VelocitySystem sys;
  const int dim = g.dim(v);
  const int off = g.offset(v);
  KinematicBlock kb = kinematic_block(g.kind(v), g.slice(p, v));
  std::vector<Mat> eq_blocks;
  std::vector<Vec> eq_rhs;
  int eq_rows = 0;
  auto note = [&](const std::string& msg) {
    if (!sys.note.empty()) sys.note += "; ";
    sys.note += msg;
  };
  auto is_binding = [&](int k, Side side) {
    for (const auto& [bk, bs] : binding) {
      if (bk == k && bs == side) return true;
    }
    return false;
  };
  for (int k = 0; k < static_cast<int>(cs.size()); ++k) {
    const EdgeConstraint& c = cs[static_cast<size_t>(k)];
    const auto [a, b] = edge_of(c);
    if (b < 0) {
      if (a != v) continue;
      EqualityRows rows = equality_rows(c, g, p, t);
      eq_blocks.push_back(rows.omega.middleCols(off, dim));
      eq_rhs.push_back(rows.rhs);
      eq_rows += static_cast<int>(rows.omega.rows());
      continue;
    }
    if (a != v && b != v) continue;
    const int other = (a == v) ? b : a;
    if (other == parent) {
      if (parent_pdot == nullptr) {
        note("parent velocity unavailable; edge " + std::to_string(k) + " skipped");
        continue;
      }
      const int podim = g.dim(other);
      const int pooff = g.offset(other);
      if (is_equality(c)) {
        EqualityRows rows = equality_rows(c, g, p, t);
        Mat block = rows.omega.middleCols(off, dim);
        Vec rhs = rows.rhs - rows.omega.middleCols(pooff, podim) * (*parent_pdot);
        eq_blocks.push_back(std::move(block));
        eq_rhs.push_back(std::move(rhs));
        eq_rows += static_cast<int>(rows.omega.rows());
      } else {
        for (const Residual& r : residuals(c, g, p, t)) {
          if (!is_binding(k, r.side)) continue;
          Vec grad = inequality_gradient(c, r.side, g, p);
          Vec block = grad.segment(off, dim);
          const double folded = -grad.segment(pooff, podim).dot(*parent_pdot);
          sys.bounds.push_back({block, folded});
          sys.binding_rows.push_back({k, r.side, block, r.g});
        }
      }
    }
    // Edges whose other endpoint is not this vehicle's parent fold at the
    // other endpoint's solve; scenario validation rejects misaligned edges.
  }
  sys.kinematic_rows = static_cast<int>(kb.omega.rows());
  sys.equality_rows = eq_rows;
  sys.stack = Mat::Zero(sys.kinematic_rows + eq_rows, dim);
  sys.rhs = Vec::Zero(sys.kinematic_rows + eq_rows);
  sys.stack.topRows(sys.kinematic_rows) = kb.omega;
  sys.rhs.head(sys.kinematic_rows) = kb.t;
  int row = sys.kinematic_rows;
  for (size_t i = 0; i < eq_blocks.size(); ++i) {
    const int r = static_cast<int>(eq_blocks[i].rows());
    sys.stack.middleRows(row, r) = eq_blocks[i];
    sys.rhs.segment(row, r) = eq_rhs[i];
    row += r;
  }
  return sys;
}

namespace {

// Tighten bounds whose rows already sit outside the boundary (g > 0) so the
// selection steers back toward g = 0 at rate gain*g.
void apply_stabilization(VelocitySystem& sys, double gain) {
  if (gain <= 0.0) return;
  for (size_t i = 0; i < sys.bounds.size(); ++i) {
    const double g = sys.binding_rows[i].residual;
    if (g > 0.0) sys.bounds[i].rhs -= gain * g;
  }
}

}  // namespace

FeasibilityReport solve_graph(const VehicleGroup& g, const std::vector<EdgeConstraint>& cs,
                              const Vec& p, double t,
                              const std::vector<BindingSide>& binding,
                              const CheckOptions& opts) {
  VelocitySystem sys = build_graph_system(g, cs, p, t, binding);
  apply_stabilization(sys, opts.stabilization);
  SelectionOptions sopts{opts.cruise, opts.margin, opts.bound};
  SolveCore core = solve_system(sys, sopts, opts.tol);
  core.report.diag.active.time = t;
  return std::move(core.report);
}

FeasibilityReport check_state(const VehicleGroup& g, const std::vector<EdgeConstraint>& cs,
                              const Vec& p, double t, const CheckOptions& opts) {
  return solve_graph(g, cs, p, t, binding_by_activation(cs, g, p, t, opts.eps_act), opts);
}

std::vector<std::string> validate_tree(const LeaderFollowerTree& tree, int n_vehicles) {
  std::vector<std::string> errs;
  const int n = static_cast<int>(tree.parent.size());
  if (n != n_vehicles) {
    errs.push_back("tree lists " + std::to_string(n) + " vehicles, scenario has " +
                   std::to_string(n_vehicles));
    return errs;
  }
  int roots = 0;
  for (int v = 0; v < n; ++v) {
    const int pa = tree.parent[static_cast<size_t>(v)];
    if (pa < 0) {
      ++roots;
    } else if (pa >= n) {
      errs.push_back("vehicle " + std::to_string(v) + " has out-of-range parent " +
                     std::to_string(pa));
    } else if (pa == v) {
      errs.push_back("vehicle " + std::to_string(v) + " is its own parent");
    }
  }
  if (roots != 1) {
    errs.push_back("tree needs exactly one root, found " + std::to_string(roots));
  }
  if (!errs.empty()) return errs;
  // Every vehicle must reach the root without revisiting anyone.
  for (int v = 0; v < n; ++v) {
    int cur = v;
    int hops = 0;
    while (cur >= 0 && hops <= n) {
      cur = tree.parent[static_cast<size_t>(cur)];
      ++hops;
    }
    if (hops > n) {
      errs.push_back("cycle reached from vehicle " + std::to_string(v));
      return errs;
    }
  }
  return errs;
}

std::vector<int> topological_order(const LeaderFollowerTree& tree) {
  const int n = static_cast<int>(tree.parent.size());
  auto errs = validate_tree(tree, n);
  if (!errs.empty()) throw Error("invalid leader-follower tree: " + errs.front());
  std::vector<int> order;
  std::vector<bool> placed(static_cast<size_t>(n), false);
  while (static_cast<int>(order.size()) < n) {
    for (int v = 0; v < n; ++v) {
      if (placed[static_cast<size_t>(v)]) continue;
      const int pa = tree.parent[static_cast<size_t>(v)];
      if (pa < 0 || placed[static_cast<size_t>(pa)]) {
        placed[static_cast<size_t>(v)] = true;
        order.push_back(v);
      }
    }
  }
  return order;
}

TreeReport solve_tree(const VehicleGroup& g, const LeaderFollowerTree& tree,
                      const std::vector<EdgeConstraint>& cs, const Vec& p, double t,
                      const std::vector<BindingSide>& binding, const TreeOptions& opts) {
  TreeReport out;
  out.vehicles.resize(static_cast<size_t>(g.count()));
  std::vector<std::optional<Vec>> pdots(static_cast<size_t>(g.count()));
  for (int v : topological_order(tree)) {
    const int parent = tree.parent[static_cast<size_t>(v)];
    const Vec* parent_pdot = nullptr;
    if (parent >= 0 && pdots[static_cast<size_t>(parent)]) {
      parent_pdot = &*pdots[static_cast<size_t>(parent)];
    }
    VelocitySystem sys = build_block_system(g, v, parent, cs, p, t, binding, parent_pdot);
    apply_stabilization(sys, opts.base.stabilization);
    SelectionOptions sopts;
    sopts.margin = opts.base.margin;
    sopts.bound = opts.base.bound;
    if (static_cast<int>(opts.cruise_per_vehicle.size()) == g.count() &&
        opts.cruise_per_vehicle[static_cast<size_t>(v)].size() > 0) {
      sopts.cruise = opts.cruise_per_vehicle[static_cast<size_t>(v)];
    }
    FeasibilityReport rep;
    if (parent < 0 && opts.root_pdot) {
      // Prescribed root motion: verify instead of selecting.
      SolveCore core = solve_system(sys, sopts, opts.base.tol);
      rep = std::move(core.report);
      if (core.ok) {
        const Vec& pd = *opts.root_pdot;
        const double resid =
            sys.stack.rows() > 0 ? (sys.stack * pd - sys.rhs).cwiseAbs().maxCoeff() : 0.0;
        if (resid > 1e-8) {
          rep.status = FeasibilityStatus::EqualityInconsistent;
          rep.selection.reset();
          if (!rep.diag.note.empty()) rep.diag.note += "; ";
          rep.diag.note += "prescribed root velocity violates its velocity stack";
        } else {
          bool ok = true;
          for (const auto& r : sys.bounds) {
            if (r.row.dot(pd) > r.rhs - opts.base.margin + kCertSlack) ok = false;
          }
          if (!ok) {
            rep.status = FeasibilityStatus::NoFeasibleDirection;
            rep.selection.reset();
            if (!rep.diag.note.empty()) rep.diag.note += "; ";
            rep.diag.note += "prescribed root velocity violates a binding row";
          } else {
            MotionSelection sel;
            sel.weights = Vec(0);
            sel.pdot = pd;
            sel.strategy = SelectionStrategy::Unconstrained;
            rep.selection = std::move(sel);
            rep.status = FeasibilityStatus::Feasible;
            if (!rep.diag.note.empty()) rep.diag.note += "; ";
            rep.diag.note += "prescribed root velocity";
          }
        }
      }
    } else {
      SolveCore core = solve_system(sys, sopts, opts.base.tol);
      rep = std::move(core.report);
    }
    rep.diag.active.time = t;
    if (rep.status != FeasibilityStatus::Feasible && out.first_failed < 0) {
      out.status = rep.status;
      out.first_failed = v;
    }
    if (rep.selection) pdots[static_cast<size_t>(v)] = rep.selection->pdot;
    out.vehicles[static_cast<size_t>(v)] = std::move(rep);
  }
  return out;
}

TreeReport check_leader_follower(const VehicleGroup& g, const LeaderFollowerTree& tree,
                                 const std::vector<EdgeConstraint>& cs, const Vec& p,
                                 double t, const TreeOptions& opts) {
  return solve_tree(g, tree, cs, p, t,
                    binding_by_activation(cs, g, p, t, opts.base.eps_act), opts);
}

}  // namespace coordfeas
