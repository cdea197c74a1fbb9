#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "uficlab/controller.hpp"

using namespace uficlab;

TEST_CASE("impedance wrench is stiffness plus damping") {
  ControllerGains g;
  RobotState s;
  s.x = (Vec6() << 0.11, 0.0, 0.0, 0.0, 0.02, 0.0).finished();
  s.x_dot = (Vec6() << 0.0, 0.5, 0.0, 0.0, 0.0, 0.1).finished();
  const Vec6 x_d = (Vec6() << 0.1, 0.0, 0.0, 0.0, 0.0, 0.0).finished();
  const Vec6 f_i = impedance_wrench(s, x_d, g);
  CHECK(f_i[0] == doctest::Approx(-1000.0 * 0.01).epsilon(1e-12));
  CHECK(f_i[1] == doctest::Approx(-80.0 * 0.5).epsilon(1e-12));
  CHECK(f_i[4] == doctest::Approx(-50.0 * 0.02).epsilon(1e-12));
  CHECK(f_i[5] == doctest::Approx(-5.0 * 0.1).epsilon(1e-12));
  CHECK(f_i[2] == 0.0);
}

TEST_CASE("force controller free-space command follows the PI law") {
  ControllerGains g;
  const Vec6 f_d = (Vec6() << 0, 0, -5, 0, 0, 0).finished();
  const double dt = 1e-3;
  // Nothing measured: error = f_d, integral gains one step of it first.
  const auto [f_f, integral] =
      force_wrench(Vec6::Zero(), f_d, Vec6::Zero(), Mat3::Identity(), g, dt);
  CHECK(integral[2] == doctest::Approx(-5.0 * dt).epsilon(1e-12));
  CHECK(f_f[2] == doctest::Approx(-5.0 - 0.5 * 5.0 - 1.0 * 5.0 * dt).epsilon(1e-12));
  CHECK(f_f[0] == 0.0);
  CHECK(f_f.tail<3>().isZero(0.0));
}

TEST_CASE("force loop is negative feedback and settles at the setpoint") {
  ControllerGains g;
  const Vec6 f_d = (Vec6() << 0, 0, -5, 0, 0, 0).finished();
  // Measured equals desired: integral frozen, command is the feedforward alone.
  const auto [f_hold, i_hold] = force_wrench(f_d, f_d, Vec6::Ones() * 0.3,
                                             Mat3::Identity(), g, 1e-3);
  CHECK((i_hold - Vec6::Ones() * 0.3).norm() == 0.0);
  CHECK(f_hold[2] == doctest::Approx(-5.0 + 0.3).epsilon(1e-12));
  // Pushing harder than desired must weaken the command.
  const Vec6 f_over = (Vec6() << 0, 0, -6, 0, 0, 0).finished();
  const auto [f_soft, i2] =
      force_wrench(f_over, f_d, Vec6::Zero(), Mat3::Identity(), g, 1e-3);
  const auto [f_hard, i3] =
      force_wrench(Vec6::Zero(), f_d, Vec6::Zero(), Mat3::Identity(), g, 1e-3);
  CHECK(f_soft[2] > f_hard[2]);  // less negative = weaker push
}

TEST_CASE("force integral clamps per component") {
  ControllerGains g;
  const Vec6 f_d = (Vec6() << 0, 0, -5, 0, 0, 0).finished();
  Vec6 integral = Vec6::Zero();
  for (int k = 0; k < 20000; ++k) {
    auto [f_f, next] =
        force_wrench(Vec6::Zero(), f_d, integral, Mat3::Identity(), g, 1e-3);
    integral = next;
  }
  CHECK(integral[2] == doctest::Approx(-g.f_integral_limit).epsilon(1e-12));
  const auto [f_sat, last] =
      force_wrench(Vec6::Zero(), f_d, integral, Mat3::Identity(), g, 1e-3);
  CHECK(f_sat[2] == doctest::Approx(-5.0 - 2.5 - 20.0).epsilon(1e-12));
}

TEST_CASE("force command rotates force and torque halves independently") {
  ControllerGains g;
  const Mat3 R = Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()).toRotationMatrix();
  Vec6 f_d;
  f_d << 1, 0, 0, 0, 2, 0;
  const auto [f_f, integral] =
      force_wrench(f_d, f_d, Vec6::Zero(), R, g, 1e-3);
  // EE x maps to base y; EE torque-y maps to base torque-(-x).
  CHECK(f_f[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f_f[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f_f[3] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(std::abs(f_f[4]) < 1e-12);
}

TEST_CASE("controller gains config and validation") {
  const Config cfg = Config::from_string(
      "controller.K_C = 500, 500, 500, 20, 20, 20\n"
      "controller.D_C = 60, 60, 60, 3, 3, 3\n"
      "controller.K_p = 0.4, 0.4, 0.4, 0.4, 0.4, 0.4\n"
      "controller.K_i = 2, 2, 2, 2, 2, 2\n"
      "controller.f_integral_limit = 10\n");
  const ControllerGains g = ControllerGains::from_config(cfg);
  CHECK(g.K_C(0, 0) == 500.0);
  CHECK(g.D_C_ctrl(3, 3) == 3.0);
  CHECK(g.K_p(2, 2) == 0.4);
  CHECK(g.K_i(5, 5) == 2.0);
  CHECK(g.f_integral_limit == 10.0);
  ControllerGains bad = g;
  bad.f_integral_limit = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("tank drains consumed power and logs the ledger") {
  TankState tank = make_tank(1.0, 0.1, 0.2, 2.0, TankMode::scalar_init);
  const Vec6 x_dot = (Vec6() << 0.1, 0, 0, 0, 0, 0).finished();
  const Vec6 f_cntr = (Vec6() << 3.0, 0, 0, 0, 0, 0).finished();
  const double dt = 1e-3;
  const TankState next = tank_step(tank, x_dot, f_cntr, dt);
  CHECK(next.E_tank == doctest::Approx(1.0 - 0.3 * dt).epsilon(1e-12));
  CHECK(next.last_consumed_W == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(next.last_injected_J == 0.0);
  CHECK(next.consumed_J == doctest::Approx(0.3 * dt).epsilon(1e-12));
  CHECK(next.sigma == 1);
  // Negative power (environment does work on the controller) refills.
  const TankState refill = tank_step(tank, x_dot, -f_cntr, dt);
  CHECK(refill.E_tank == doctest::Approx(1.0 + 0.3 * dt).epsilon(1e-12));
}

TEST_CASE("tank ledger identity holds under random traffic") {
  auto schedule = std::make_shared<std::vector<double>>(5000);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> amp(-2.0, 4.0);
  for (auto& w : *schedule) w = amp(rng);
  TankState tank = make_tank(0.15, 0.1, 0.2, 0.5, TankMode::scheduled, schedule);
  const double E0 = tank.E_tank;
  const double dt = 1e-3;
  std::uniform_real_distribution<double> vel(-0.2, 0.2), force(-30.0, 30.0);
  for (int k = 0; k < 5000; ++k) {
    Vec6 x_dot, f;
    for (int i = 0; i < 6; ++i) {
      x_dot[i] = vel(rng);
      f[i] = force(rng);
    }
    tank = tank_step(tank, x_dot, tank.sigma ? f : Vec6::Zero(), dt);
    CHECK(tank.E_tank >= 0.0);
    CHECK(tank.E_tank <= 0.5);
    const double ledger = E0 + tank.injected_J - tank.consumed_J + tank.clamp_bias;
    CHECK(tank.E_tank == doctest::Approx(ledger).epsilon(1e-9));
  }
  CHECK(tank.clamp_events > 0);  // the walk hits both bounds at this scale
}

TEST_CASE("negative scheduled power never injects") {
  auto schedule = std::make_shared<std::vector<double>>(3, -5.0);
  TankState tank = make_tank(0.3, 0.1, 0.2, 0.5, TankMode::scheduled, schedule);
  const TankState next = tank_step(tank, Vec6::Zero(), Vec6::Zero(), 1e-3);
  CHECK(next.last_injected_J == 0.0);
  CHECK(next.E_tank == 0.3);
}

TEST_CASE("valve hysteresis opens high and closes low") {
  auto schedule = std::make_shared<std::vector<double>>(100, 0.0);
  (*schedule)[50] = 200.0;  // one large injection pulse
  TankState tank = make_tank(0.15, 0.1, 0.2, 0.5, TankMode::scheduled, schedule);
  CHECK(tank.sigma == 1);  // starts in the hysteresis band, valve open
  const Vec6 x_dot = (Vec6() << 0.1, 0, 0, 0, 0, 0).finished();
  const Vec6 f = (Vec6() << 30.0, 0, 0, 0, 0, 0).finished();  // 3 W drain

  // Drain below epsilon: valve closes exactly when E < 0.1.
  int steps_open = 0;
  while (tank.sigma == 1) {
    tank = tank_step(tank, x_dot, f, 1e-3);
    ++steps_open;
    REQUIRE(steps_open < 50);
  }
  CHECK(tank.E_tank < 0.1);
  CHECK(tank.E_tank >= 0.1 - 3.0 * 1e-3 - 1e-12);  // one step past the threshold

  // Inside the band nothing reopens; schedule entries up to the pulse are zero.
  while (tank.step < 50) {
    tank = tank_step(tank, Vec6::Zero(), Vec6::Zero(), 1e-3);
    CHECK(tank.sigma == 0);
  }
  // The pulse refills past epsilon_on and re-arms the valve.
  tank = tank_step(tank, Vec6::Zero(), Vec6::Zero(), 1e-3);
  CHECK(tank.E_tank >= 0.2);
  CHECK(tank.sigma == 1);
}

TEST_CASE("scalar tank never reopens once closed") {
  TankState tank = make_tank(0.105, 0.1, 0.2, 0.5, TankMode::scalar_init);
  const Vec6 x_dot = (Vec6() << 0.1, 0, 0, 0, 0, 0).finished();
  const Vec6 f = (Vec6() << 1.0, 0, 0, 0, 0, 0).finished();
  bool closed = false;
  for (int k = 0; k < 1000; ++k) {
    tank = tank_step(tank, x_dot, tank.sigma ? f : Vec6::Zero(), 1e-3);
    if (tank.sigma == 0) closed = true;
    if (closed) CHECK(tank.sigma == 0);
  }
  CHECK(closed);
}

TEST_CASE("scheduled tank flags exhaustion past the plan") {
  auto schedule = std::make_shared<std::vector<double>>(2, 0.05);
  TankState tank = make_tank(0.3, 0.1, 0.2, 0.5, TankMode::scheduled, schedule);
  tank = tank_step(tank, Vec6::Zero(), Vec6::Zero(), 1e-3);
  CHECK_FALSE(tank.exhausted);
  tank = tank_step(tank, Vec6::Zero(), Vec6::Zero(), 1e-3);
  CHECK_FALSE(tank.exhausted);
  tank = tank_step(tank, Vec6::Zero(), Vec6::Zero(), 1e-3);
  CHECK(tank.exhausted);
}

TEST_CASE("make_tank validates its bounds") {
  CHECK_THROWS_AS((void)make_tank(-1.0, 0.1, 0.2, 0.5, TankMode::scalar_init),
                  ConfigError);
  CHECK_THROWS_AS((void)make_tank(0.3, 0.2, 0.1, 0.5, TankMode::scalar_init),
                  ConfigError);  // epsilon_on below epsilon
  CHECK_THROWS_AS((void)make_tank(0.3, 0.1, 0.2, 0.15, TankMode::scalar_init),
                  ConfigError);  // cap below the re-arm level
  CHECK_THROWS_AS((void)make_tank(0.3, 0.1, 0.2, 0.5, TankMode::scheduled, nullptr),
                  ConfigError);  // scheduled mode needs a plan
}

TEST_CASE("closed valve passes gravity compensation through untouched") {
  const Vec6 f_i = (Vec6() << 1, 2, 3, 4, 5, 6).finished();
  const Vec6 f_f = (Vec6() << -1, 0.5, 2, 0, 0, 0).finished();
  const Vec6 f_g = (Vec6() << 0, 0, 29.43, 0, 0, 0).finished();
  const Vec6 closed = control_wrench(f_i, f_f, 0, f_g);
  CHECK((closed - f_g).isZero(0.0));  // bitwise, not approximately
  const Vec6 open = control_wrench(f_i, f_f, 1, f_g);
  CHECK(open[2] == doctest::Approx(3.0 + 2.0 + 29.43).epsilon(1e-12));
}
