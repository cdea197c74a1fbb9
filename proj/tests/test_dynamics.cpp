#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "uficlab/dynamics.hpp"

using namespace uficlab;

static RobotState default_state() {
  const Mat6 M = Vec6(3, 3, 3, 0.1, 0.1, 0.1).asDiagonal();
  const Mat6 D = Vec6(40, 40, 40, 2, 2, 2).asDiagonal();
  const Vec6 f_g = (Vec6() << 0, 0, 3.0 * kGravity, 0, 0, 0).finished();
  return make_robot_state(M, D, f_g);
}

TEST_CASE("make_robot_state validates the plant matrices") {
  const RobotState s = default_state();
  CHECK((s.M_inv * s.M_C - Mat6::Identity()).norm() < 1e-12);

  Mat6 bad = Mat6::Identity();
  bad(0, 0) = -1.0;  // not positive definite
  CHECK_THROWS_AS((void)make_robot_state(bad, Mat6::Zero(), Vec6::Zero()), DomainError);
  Mat6 asym = Mat6::Identity();
  asym(0, 1) = 0.5;  // not symmetric
  CHECK_THROWS_AS((void)make_robot_state(asym, Mat6::Zero(), Vec6::Zero()), DomainError);
  Mat6 bad_damp = Mat6::Zero();
  bad_damp(2, 2) = -1.0;
  CHECK_THROWS_AS((void)make_robot_state(Mat6::Identity(), bad_damp, Vec6::Zero()),
                  DomainError);
}

TEST_CASE("one step matches the hand-computed update") {
  RobotState s = default_state();
  s.x = (Vec6() << 0.1, -0.2, 0.05, 0.01, 0.0, -0.02).finished();
  s.x_dot = (Vec6() << 0.3, 0.0, -0.1, 0.0, 0.2, 0.0).finished();
  const Vec6 f_robot = (Vec6() << 1, 2, 3, 0.1, 0.2, 0.3).finished();
  const Vec6 f_ext = (Vec6() << -0.5, 0, 0.5, 0, 0, 0).finished();
  const double dt = 1e-3;

  const Vec6 accel = s.M_inv * (f_robot + f_ext - s.D_C * s.x_dot - s.f_g);
  const Vec6 v_next = s.x_dot + dt * accel;
  const Vec6 x_next = s.x + dt * v_next;  // position uses the updated velocity

  const RobotState out = step_dynamics(s, f_robot, f_ext, dt);
  CHECK((out.x_dot - v_next).norm() < 1e-15);
  CHECK((out.x - x_next).norm() < 1e-15);
}

TEST_CASE("gravity wrench keeps a resting robot still") {
  RobotState s = default_state();
  s.x = (Vec6() << 0.2, 0.1, 0.3, 0, 0, 0).finished();
  RobotState cur = s;
  for (int k = 0; k < 1000; ++k) cur = step_dynamics(cur, s.f_g, Vec6::Zero(), 1e-3);
  CHECK((cur.x - s.x).norm() == 0.0);
  CHECK(cur.x_dot.norm() == 0.0);
}

TEST_CASE("constant force approaches the damping-limited terminal velocity") {
  RobotState s = default_state();
  const Vec6 f = s.f_g + (Vec6() << 4.0, 0, 0, 0, 0, 0).finished();
  const double dt = 1e-4;
  RobotState cur = s;
  for (int k = 0; k < 50000; ++k) cur = step_dynamics(cur, f, Vec6::Zero(), dt);
  // v(t) = (f/D)(1 - exp(-D t / M)), t = 5 s >> M/D = 0.075 s.
  CHECK(cur.x_dot[0] == doctest::Approx(4.0 / 40.0).epsilon(1e-6));
  CHECK(std::abs(cur.x_dot[2]) < 1e-12);
}

TEST_CASE("velocity transient tracks the analytic exponential") {
  RobotState s = default_state();
  const Vec6 f = s.f_g + (Vec6() << 0, 2.0, 0, 0, 0, 0).finished();
  const double dt = 1e-5, T = 0.2;
  RobotState cur = s;
  const int n = static_cast<int>(T / dt);
  for (int k = 0; k < n; ++k) cur = step_dynamics(cur, f, Vec6::Zero(), dt);
  const double tau = 3.0 / 40.0;
  const double expect = (2.0 / 40.0) * (1.0 - std::exp(-T / tau));
  CHECK(cur.x_dot[1] == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("kinetic energy is the plant storage function") {
  RobotState s = default_state();
  s.x_dot = (Vec6() << 1, 0, 0, 0, 2, 0).finished();
  CHECK(kinetic_energy(s) == doctest::Approx(0.5 * 3.0 + 0.5 * 0.1 * 4.0).epsilon(1e-14));
  s.x_dot.setZero();
  CHECK(kinetic_energy(s) == 0.0);
}

TEST_CASE("non-finite forces fault with the step index") {
  const RobotState s = default_state();
  Vec6 f = Vec6::Zero();
  f[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)step_dynamics(s, f, Vec6::Zero(), 1e-3, 42);
    FAIL("expected SimulationFault");
  } catch (const SimulationFault& e) {
    CHECK(e.step_index == 42);
  }
}
