#include "uficlab/controller.hpp"

#include <algorithm>
#include <cmath>

namespace uficlab {

namespace {

void check_diagonal_psd(const Mat6& m, const char* name) {
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      if (i == j && m(i, j) < 0.0)
        throw ConfigError(std::string(name) + " must have nonnegative diagonal");
      if (i != j && m(i, j) != 0.0)
        throw ConfigError(std::string(name) + " must be diagonal");
    }
}

}  // namespace

ControllerGains ControllerGains::from_config(const Config& cfg, const std::string& prefix) {
  ControllerGains g;
  auto diag = [&](const char* key, const Mat6& fallback) -> Mat6 {
    if (!cfg.has(prefix + key)) return fallback;
    return Mat6(cfg.get_vec6(prefix + key).asDiagonal());
  };
  g.K_C = diag("K_C", g.K_C);
  g.D_C_ctrl = diag("D_C", g.D_C_ctrl);
  g.K_p = diag("K_p", g.K_p);
  g.K_i = diag("K_i", g.K_i);
  g.f_integral_limit = cfg.get_double(prefix + "f_integral_limit", g.f_integral_limit);
  g.validate();
  return g;
}

void ControllerGains::validate() const {
  check_diagonal_psd(K_C, "K_C");
  check_diagonal_psd(D_C_ctrl, "D_C");
  check_diagonal_psd(K_p, "K_p");
  check_diagonal_psd(K_i, "K_i");
  if (!(f_integral_limit > 0.0)) throw ConfigError("f_integral_limit must be positive");
}

Vec6 impedance_wrench(const RobotState& state, const Vec6& x_d, const ControllerGains& gains) {
  return -gains.K_C * (state.x - x_d) - gains.D_C_ctrl * state.x_dot;
}

std::pair<Vec6, Vec6> force_wrench(const Vec6& f_ext_ee, const Vec6& f_d_ee,
                                   const Vec6& integral, const Mat3& R_ee_to_base,
                                   const ControllerGains& gains, double dt) {
  const Vec6 f_err = f_d_ee - f_ext_ee;
  Vec6 next_integral = integral + f_err * dt;
  next_integral = next_integral.cwiseMax(-gains.f_integral_limit)
                      .cwiseMin(gains.f_integral_limit);
  const Vec6 ee = f_d_ee + gains.K_p * f_err + gains.K_i * next_integral;
  return {rotate_wrench(R_ee_to_base, ee), next_integral};
}

TankState make_tank(double E0, double epsilon, double epsilon_on, double E_max,
                    TankMode mode, std::shared_ptr<const std::vector<double>> schedule) {
  if (!(epsilon > 0.0)) throw ConfigError("tank epsilon must be positive");
  if (epsilon_on < epsilon) throw ConfigError("tank epsilon_on must be >= epsilon");
  if (E_max < epsilon_on) throw ConfigError("tank E_max must be >= epsilon_on");
  if (E0 < 0.0 || E0 > E_max) throw ConfigError("tank E0 must be in [0, E_max]");
  if (mode == TankMode::scheduled && !schedule)
    throw ConfigError("scheduled tank needs a power schedule");
  TankState t;
  t.E_tank = E0;
  t.epsilon = epsilon;
  t.epsilon_on = epsilon_on;
  t.E_max = E_max;
  t.mode = mode;
  t.schedule = std::move(schedule);
  t.sigma = E0 >= epsilon ? 1 : 0;
  return t;
}

TankState tank_step(const TankState& tank, const Vec6& x_dot, const Vec6& f_cntr, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  TankState next = tank;

  const double consumed_W = x_dot.dot(f_cntr);
  next.last_consumed_W = consumed_W;
  next.consumed_J += consumed_W * dt;
  double e = tank.E_tank - consumed_W * dt;

  next.last_injected_J = 0.0;
  if (tank.mode == TankMode::scheduled) {
    if (tank.step >= tank.schedule->size()) {
      next.exhausted = true;
    } else {
      const double inject = std::max(0.0, (*tank.schedule)[tank.step]) * dt;
      next.last_injected_J = inject;
      next.injected_J += inject;
      e += inject;
    }
  }

  if (e < 0.0) {
    next.clamp_bias += -e;
    ++next.clamp_events;
    e = 0.0;
  } else if (e > tank.E_max) {
    next.clamp_bias += tank.E_max - e;
    ++next.clamp_events;
    e = tank.E_max;
  }
  next.E_tank = e;

  if (e < tank.epsilon)
    next.sigma = 0;
  else if (e >= tank.epsilon_on)
    next.sigma = 1;
  ++next.step;
  return next;
}

Vec6 control_wrench(const Vec6& f_i, const Vec6& f_f, int sigma, const Vec6& f_g) {
  if (sigma == 0) return f_g;
  return f_i + f_f + f_g;
}

}  // namespace uficlab
