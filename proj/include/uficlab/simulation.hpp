#pragma once

#include <optional>
#include <string>

#include "uficlab/controller.hpp"
#include "uficlab/dynamics.hpp"
#include "uficlab/skills.hpp"
#include "uficlab/surface.hpp"

namespace uficlab {

/// Per-step tank power and its timestamps; estimator output and training label.
struct PowerTrace {
  VectorXd t;
  VectorXd power;  // W

  Eigen::Index size() const { return t.size(); }
  double dt() const { return t.size() > 1 ? t[1] - t[0] : kDefaultDt; }
};

enum class StopReason { completed, schedule_exhausted };

/// Closed-loop log, one row per control step. Kinematic columns are the state
/// at the row's timestamp (before that step's update); wrench and tank columns
/// are what the step applied. sigma is the valve value the wrench used.
struct SimTrace {
  VectorXd t;
  MatRM x, x_dot;          // N x 6
  MatRM f_robot, f_ext;    // N x 6
  VectorXd E_robot;        // J, kinetic
  VectorXd E_tank;         // J, after the step's bookkeeping
  VectorXd sigma;          // {0,1}
  VectorXd injected_J, consumed_W;
  double epsilon = 0.1;
  double E0 = 0.0;
  long clamp_events = 0;
  StopReason stop = StopReason::completed;

  Eigen::Index size() const { return t.size(); }
  double dt() const { return t.size() > 1 ? t[1] - t[0] : kDefaultDt; }

  /// Ground-truth power labels: the logged per-step consumption.
  PowerTrace consumed_power() const;
};

struct TankConfig {
  TankMode mode = TankMode::scalar_init;
  double E0 = 200.0;
  double epsilon = 0.1;
  double epsilon_on = 0.2;   // hysteresis re-arm level, default 2ε
  double E_max = 400.0;
  std::shared_ptr<const std::vector<double>> schedule;  // scheduled mode, W per step
};

struct SimConfig {
  SurfaceModel surface;
  std::optional<SurfaceModel> floor;  // second contact surface (safety runs)
  Mat6 M_C = Vec6(3, 3, 3, 0.1, 0.1, 0.1).asDiagonal();
  Mat6 D_C = Vec6(40, 40, 40, 2, 2, 2).asDiagonal();
  Vec6 f_g = (Vec6() << 0, 0, 3.0 * kGravity, 0, 0, 0).finished();
  ControllerGains gains;
  TankConfig tank;
  double force_noise_sigma = 0.1;  // N, on the measured EE wrench
  std::uint64_t seed = 1;
  double dt = kDefaultDt;
};

/// Runs the unified force-impedance loop over the whole skill: contact wrench,
/// impedance + PI force control, tank bookkeeping with the valve-gated wrench,
/// then a semi-implicit dynamics step. The robot starts at the skill's first
/// pose, at rest. Throws SimulationFault on non-finite state.
SimTrace simulate_skill(const SimConfig& cfg, const SkillProfile& skill);

/// ∫ ẋᵀf_cntr dτ + ε over a completed trace (trapezoid on the logged
/// consumption). Throws DomainError on an empty trace.
double task_energy(const SimTrace& trace);

void trace_to_csv(const SimTrace& trace, const std::string& path,
                  const std::map<std::string, std::string>& extra_metadata = {});
SimTrace csv_to_trace(const std::string& path);

}  // namespace uficlab
