// Hot paths, roughly inner-loop order: rank/null-space kernels, one feasible
// family, one full state check, and short integration runs.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "coordfeas/constraints.hpp"
#include "coordfeas/feasibility.hpp"
#include "coordfeas/matlite.hpp"
#include "coordfeas/sim.hpp"
#include "coordfeas/vehicles.hpp"

using namespace coordfeas;

namespace {

Mat random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

// Three unicycles on a distance-banded visibility chain, the shape the
// simulator re-solves every stage.
struct Fleet {
  VehicleGroup group{{Unicycle{}, Unicycle{}, Unicycle{}}};
  std::vector<EdgeConstraint> constraints{
      Visibility{0, 1, 0.4},
      DistanceBand{0, 1, 1.0, 2.0},
      Visibility{0, 2, 0.4},
      DistanceBand{0, 2, 1.0, 2.0},
  };
  Vec p = [] {
    Vec p(9);
    p << 0.0, 0.0, 0.0, -1.5, 0.5, -0.32, -1.5, -0.5, 0.32;
    return p;
  }();
};

Scenario cruise_scenario(double duration) {
  Scenario s;
  s.kinds = {Unicycle{}, Unicycle{}};
  s.initial = {(Vec(3) << 0.0, 0.0, 0.3).finished(),
               (Vec(3) << -1.5, 0.0, 0.0).finished()};
  s.constraints = {DistanceBand{0, 1, 1.0, 2.0}};
  s.duration = duration;
  s.step = 1e-3;
  s.integrator = Integrator::RK4;
  s.cruise = (Vec(4) << 0.8, 0.1, 0.8, 0.0).finished();
  return s;
}

void BM_RankOf(benchmark::State& state) {
  const Mat m = random_matrix(static_cast<int>(state.range(0)),
                              static_cast<int>(state.range(0)) + 3, 17);
  for (auto _ : state) benchmark::DoNotOptimize(rank_of(m));
}
BENCHMARK(BM_RankOf)->Arg(6)->Arg(12)->Arg(24);

void BM_NullBasis(benchmark::State& state) {
  Fleet f;
  const KinematicBlock kb = stack_kinematics(f.group, f.p);
  for (auto _ : state) benchmark::DoNotOptimize(null_basis(kb.omega));
}
BENCHMARK(BM_NullBasis);

void BM_MotionFamily(benchmark::State& state) {
  Fleet f;
  const VelocitySystem sys = build_graph_system(f.group, f.constraints, f.p, 0.0, {});
  for (auto _ : state) benchmark::DoNotOptimize(motion_family(sys.stack, sys.rhs));
}
BENCHMARK(BM_MotionFamily);

void BM_CheckState(benchmark::State& state) {
  Fleet f;
  for (auto _ : state)
    benchmark::DoNotOptimize(check_state(f.group, f.constraints, f.p, 0.0, {}));
}
BENCHMARK(BM_CheckState);

void BM_SimRun(benchmark::State& state) {
  const Scenario s = cruise_scenario(static_cast<double>(state.range(0)) * 1e-3);
  for (auto _ : state) {
    TrajectoryLog log = run(s);
    benchmark::DoNotOptimize(log);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimRun)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
