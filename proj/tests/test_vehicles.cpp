#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "coordfeas/errors.hpp"
#include "coordfeas/vehicles.hpp"

using namespace coordfeas;

namespace {

constexpr double kPi = std::numbers::pi;

Vec state3(double x, double y, double th) {
  Vec s(3);
  s << x, y, th;
  return s;
}

Vec state4(double x, double y, double th, double phi) {
  Vec s(4);
  s << x, y, th, phi;
  return s;
}

std::mt19937_64 seeded(unsigned long long s) { return std::mt19937_64(s); }

Vec random_state(std::mt19937_64& rng, const VehicleKind& kind) {
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> steer(-1.4, 1.4);
  Vec s(state_dim(kind));
  s(0) = pos(rng);
  s(1) = pos(rng);
  s(2) = ang(rng);
  if (s.size() == 4) s(3) = steer(rng);
  return s;
}

double annihilation_error(const VehicleKind& kind, const Vec& s) {
  const auto blk = kinematic_block(kind, s);
  const auto vf = fields(kind, s);
  double worst = (blk.omega * vf.drift - blk.t).lpNorm<Eigen::Infinity>();
  for (const Vec& f : vf.controls) {
    worst = std::max(worst, (blk.omega * f).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace

TEST_SUITE("vehicles") {

TEST_CASE("state and control dimensions") {
  CHECK(state_dim(Unicycle{}) == 3);
  CHECK(state_dim(ConstantSpeed{1.0}) == 3);
  CHECK(state_dim(CarLike{0.5}) == 4);
  CHECK(control_dim(Unicycle{}) == 2);
  CHECK(control_dim(ConstantSpeed{1.0}) == 1);
  CHECK(control_dim(CarLike{0.5}) == 2);
}

TEST_CASE("unicycle fields at theta zero") {
  const auto vf = fields(Unicycle{}, state3(0, 0, 0));
  CHECK(vf.drift.lpNorm<Eigen::Infinity>() == 0.0);
  REQUIRE(vf.controls.size() == 2);
  CHECK((vf.controls[0] - state3(1, 0, 0)).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK((vf.controls[1] - state3(0, 0, 1)).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("constant-speed drift carries the fixed speed") {
  const auto vf = fields(ConstantSpeed{2.0}, state3(0, 0, 0));
  CHECK((vf.drift - state3(2, 0, 0)).lpNorm<Eigen::Infinity>() <= 1e-15);
  REQUIRE(vf.controls.size() == 1);
  CHECK((vf.controls[0] - state3(0, 0, 1)).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("car-like fields couple heading rate to steering") {
  const auto vf = fields(CarLike{2.0}, state4(0, 0, 0, kPi / 4));
  REQUIRE(vf.controls.size() == 2);
  // d theta / d drive = tan(phi) / wheelbase = 1 / 2.
  CHECK(std::abs(vf.controls[0](2) - 0.5) <= 1e-12);
  CHECK((vf.controls[1] - state4(0, 0, 0, 1)).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("car-like steering near the singular angle is rejected") {
  CHECK_THROWS_AS(fields(CarLike{1.0}, state4(0, 0, 0, 1.58)), SingularSteering);
  CHECK_THROWS_AS(kinematic_block(CarLike{1.0}, state4(0, 0, 0, -kPi / 2)),
                  SingularSteering);
}

TEST_CASE("unicycle annihilator row") {
  const auto blk = kinematic_block(Unicycle{}, state3(5, -2, 0));
  REQUIRE(blk.omega.rows() == 1);
  CHECK((blk.omega.row(0).transpose() - state3(0, -1, 0)).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK(blk.t(0) == 0.0);
}

TEST_CASE("constant-speed annihilator pins the forward channel") {
  const auto blk = kinematic_block(ConstantSpeed{2.0}, state3(0, 0, kPi / 2));
  REQUIRE(blk.omega.rows() == 2);
  CHECK((blk.omega.row(0).transpose() - state3(1, 0, 0)).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((blk.omega.row(1).transpose() - state3(0, 1, 0)).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(blk.t(0) == 0.0);
  CHECK(blk.t(1) == 2.0);
}

TEST_CASE("car-like annihilator has two rows") {
  const double l = 1.0;
  const auto blk = kinematic_block(CarLike{l}, state4(0, 0, 0, 0));
  REQUIRE(blk.omega.rows() == 2);
  CHECK((blk.omega.row(0).transpose() - state4(0, -1, -l, 0)).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK((blk.omega.row(1).transpose() - state4(0, -1, 0, 0)).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK(blk.t.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("annihilation identities hold at random states") {
  std::vector<VehicleKind> kinds = {Unicycle{}, ConstantSpeed{1.7}, ConstantSpeed{-0.8},
                                    CarLike{0.5}, CarLike{2.5}};
  auto rng = seeded(42);
  for (const auto& kind : kinds) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec s = random_state(rng, kind);
      CHECK(annihilation_error(kind, s) <= 1e-12);
    }
  }
}

TEST_CASE("velocity channel rows extract the control channels") {
  auto rng = seeded(43);
  std::vector<VehicleKind> kinds = {Unicycle{}, CarLike{0.7}};
  for (const auto& kind : kinds) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vec s = random_state(rng, kind);
      const Mat rows = velocity_channel_rows(kind, s);
      const auto vf = fields(kind, s);
      REQUIRE(rows.rows() == velocity_channel_count(kind));
      CHECK((rows * vf.drift).lpNorm<Eigen::Infinity>() <= 1e-12);
      for (std::size_t j = 0; j < vf.controls.size(); ++j) {
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
          const double want = static_cast<Eigen::Index>(j) == r ? 1.0 : 0.0;
          CHECK(std::abs(rows.row(r).dot(vf.controls[j]) - want) <= 1e-12);
        }
      }
    }
  }
  // Constant-speed: the turn-rate channel extracts the single control and the
  // forward channel reproduces the built-in speed.
  const ConstantSpeed cs{1.3};
  const Vec s = state3(1, 2, 0.4);
  const Mat rows = velocity_channel_rows(cs, s);
  const auto vf = fields(cs, s);
  REQUIRE(rows.rows() == 2);
  CHECK(std::abs(rows.row(0).dot(vf.drift) - 1.3) <= 1e-12);
  CHECK(std::abs(rows.row(1).dot(vf.controls[0]) - 1.0) <= 1e-12);
}

TEST_CASE("controls recovered from an admissible velocity") {
  const Vec s = state3(0, 0, kPi / 2);
  Vec pdot(3);
  pdot << 0, 2, -1;  // forward at speed 2 while turning
  const Vec u = controls_from_velocity(Unicycle{}, s, pdot);
  REQUIRE(u.size() == 2);
  CHECK(std::abs(u(0) - 2.0) <= 1e-12);
  CHECK(std::abs(u(1) + 1.0) <= 1e-12);
}

TEST_CASE("sideways velocity is not in the distribution") {
  const Vec s = state3(0, 0, 0);
  Vec pdot(3);
  pdot << 0, 1, 0;
  CHECK_THROWS_AS(controls_from_velocity(Unicycle{}, s, pdot), NotInDistribution);
}

TEST_CASE("control recovery round-trips at random states") {
  auto rng = seeded(44);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<VehicleKind> kinds = {Unicycle{}, ConstantSpeed{2.0}, CarLike{1.2}};
  for (const auto& kind : kinds) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vec s = random_state(rng, kind);
      const auto vf = fields(kind, s);
      Vec want(control_dim(kind));
      for (Eigen::Index i = 0; i < want.size(); ++i) want(i) = u(rng);
      Vec pdot = vf.drift;
      for (std::size_t j = 0; j < vf.controls.size(); ++j) pdot += vf.controls[j] * want(j);
      const Vec got = controls_from_velocity(kind, s, pdot, 1e-9);
      CHECK((got - want).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
  }
}

TEST_CASE("group layout and slicing") {
  VehicleGroup g({Unicycle{}, CarLike{0.5}, ConstantSpeed{1.0}});
  CHECK(g.count() == 3);
  CHECK(g.total_dim() == 10);
  CHECK(g.offset(0) == 0);
  CHECK(g.offset(1) == 3);
  CHECK(g.offset(2) == 7);
  Vec p(10);
  p << 0, 1, 2, 3, 4, 5, 6, 7, 8, 9;
  CHECK((g.slice(p, 1) - state4(3, 4, 5, 6)).lpNorm<Eigen::Infinity>() == 0.0);
  const Vec back = g.assemble({state3(0, 1, 2), state4(3, 4, 5, 6), state3(7, 8, 9)});
  CHECK((back - p).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("stacked annihilator of two unicycles at theta zero") {
  VehicleGroup g({Unicycle{}, Unicycle{}});
  Vec p(6);
  p << 0, 0, 0, 1, 0, 0;
  const auto blk = stack_kinematics(g, p);
  REQUIRE(blk.omega.rows() == 2);
  REQUIRE(blk.omega.cols() == 6);
  Vec row0(6), row1(6);
  row0 << 0, -1, 0, 0, 0, 0;
  row1 << 0, 0, 0, 0, -1, 0;
  CHECK((blk.omega.row(0).transpose() - row0).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK((blk.omega.row(1).transpose() - row1).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK(blk.t.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("stacked annihilator mixes block sizes") {
  VehicleGroup g1({Unicycle{}, ConstantSpeed{1.5}});
  Vec p1 = Vec::Zero(6);
  auto blk1 = stack_kinematics(g1, p1);
  CHECK(blk1.omega.rows() == 3);
  CHECK(blk1.omega.cols() == 6);
  Vec want(3);
  want << 0, 0, 1.5;
  CHECK((blk1.t - want).lpNorm<Eigen::Infinity>() == 0.0);

  VehicleGroup g2({Unicycle{}, CarLike{1.0}});
  Vec p2 = Vec::Zero(7);
  auto blk2 = stack_kinematics(g2, p2);
  CHECK(blk2.omega.rows() == 3);
  CHECK(blk2.omega.cols() == 7);
  CHECK(blk2.t.lpNorm<Eigen::Infinity>() == 0.0);
}

}  // TEST_SUITE
