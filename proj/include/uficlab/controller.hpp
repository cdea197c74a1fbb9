#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "uficlab/config.hpp"
#include "uficlab/dynamics.hpp"
#include "uficlab/types.hpp"

namespace uficlab {

struct ControllerGains {
  Mat6 K_C = Vec6(1000, 1000, 1000, 50, 50, 50).asDiagonal();     // stiffness
  Mat6 D_C_ctrl = Vec6(80, 80, 80, 5, 5, 5).asDiagonal();         // controller damping
  Mat6 K_p = Mat6::Identity() * 0.5;                              // force P gain
  Mat6 K_i = Mat6::Identity() * 1.0;                              // force I gain, 1/s
  double f_integral_limit = 20.0;                                 // N, anti-windup clamp

  static ControllerGains from_config(const Config& cfg, const std::string& prefix = "controller.");
  void validate() const;  // diagonal PSD gains, positive clamp
};

/// f_i = −K_C(x − x_d) − D_C_ctrl·ẋ.
Vec6 impedance_wrench(const RobotState& state, const Vec6& x_d, const ControllerGains& gains);

/// PI force controller. f_ext_ee is the wrench the end-effector applies to the
/// environment, measured in the EE frame; the error is desired minus measured
/// (pressing too lightly increases the commanded push), so the loop is
/// negative-feedback and settles at f_ext_ee = f_d_ee. The integral is updated
/// first (clamped per component at ±f_integral_limit), and the result is
/// rotated to the base frame by blockdiag(R, R).
/// Returns (f_f, updated integral).
std::pair<Vec6, Vec6> force_wrench(const Vec6& f_ext_ee, const Vec6& f_d_ee,
                                   const Vec6& integral, const Mat3& R_ee_to_base,
                                   const ControllerGains& gains, double dt);

enum class TankMode { scalar_init, scheduled };

/// Virtual energy tank with hysteresis valve. The caller passes the wrench the
/// valve actually let through, so a closed valve freezes consumption.
struct TankState {
  double E_tank = 0.1;       // J, in [0, E_max]
  double epsilon = 0.1;      // J, valve closes below this
  double epsilon_on = 0.2;   // J, valve re-arms at or above this
  double E_max = 0.2;        // J, refill cap
  int sigma = 1;             // {0, 1}
  TankMode mode = TankMode::scalar_init;
  std::shared_ptr<const std::vector<double>> schedule;  // W per step, scheduled mode
  std::size_t step = 0;

  // Bookkeeping for the exact energy audit. clamp_bias is the net energy the
  // [0, E_max] clamp added (+) or removed (−), so at all times
  // E_tank = E0 + injected_J − consumed_J + clamp_bias exactly.
  double injected_J = 0.0;
  double consumed_J = 0.0;
  double clamp_bias = 0.0;
  long clamp_events = 0;
  bool exhausted = false;    // scheduled ran past its plan: controlled stop
  double last_injected_J = 0.0;
  double last_consumed_W = 0.0;
};

TankState make_tank(double E0, double epsilon, double epsilon_on, double E_max,
                    TankMode mode,
                    std::shared_ptr<const std::vector<double>> schedule = nullptr);

/// One bookkeeping step: drain ẋᵀf_cntr·dt, inject the scheduled power (if any),
/// clamp to [0, E_max], then update the valve with hysteresis
/// (σ→0 when E < ε, σ→1 when E ≥ ε_on). Past-the-plan scheduled steps set
/// `exhausted` instead of throwing; the caller stops the run.
TankState tank_step(const TankState& tank, const Vec6& x_dot, const Vec6& f_cntr, double dt);

/// σ·(f_i + f_f) + f_g. σ = 0 yields exactly f_g (bitwise), never a residual.
Vec6 control_wrench(const Vec6& f_i, const Vec6& f_f, int sigma, const Vec6& f_g);

}  // namespace uficlab
