#pragma once

#include <string>
#include <vector>

#include "uficlab/estimator.hpp"
#include "uficlab/metrics.hpp"

namespace uficlab {

/// One skill's prediction quality against a fresh closed-loop simulation.
struct SkillEval {
  std::string pattern;
  Eigen::Vector2d start_uv = Eigen::Vector2d::Zero();
  TrajectoryMetrics metrics;
  double expert_energy_J = 0.0;
  double expert_mape_sum_pct = 0.0;
};

struct EvalSummary {
  std::vector<SkillEval> per_skill;
  Aggregate mse, mape, mape_sum, pearson, expert_mape_sum;
};

/// Simulates each skill (base.seed replaced per skill), predicts power at the
/// given stride, and scores predictions against the measured consumption
/// subsampled at the same steps. The handcrafted expert estimate is scored on
/// the same measured integral.
EvalSummary evaluate_skills(const Estimator& est, const SimConfig& base,
                            const std::vector<SkillProfile>& skills,
                            const std::vector<std::uint64_t>& seeds, int stride);

/// One tank budgeting mode driven through a contact-loss gap.
struct SafetyRunResult {
  std::string mode;
  SimTrace trace;
  bool lost_contact = false;
  Eigen::Index k_loss = -1;  // first step inside the gap
  Eigen::Index k_end = -1;   // first valve cut or floor strike after the loss
  double fall_distance_m = 0.0;      // along the surface normal at the loss point
  double peak_contact_force_N = 0.0; // max contact force magnitude after the loss
  bool hit_floor = false;
  bool valve_closed = false;
};

struct SafetyModes {
  double scalar_low_E0 = 0.03;
  double scalar_low_epsilon = 0.01;
  double scalar_high_E0 = 200.0;
  double scalar_high_epsilon = 0.1;
  double scheduled_epsilon = 0.1;
  int schedule_stride = 10;
};

/// Detection pass over a finished run; exposed for tests.
SafetyRunResult analyze_safety_run(std::string mode, SimTrace trace,
                                   const SurfaceModel& surface,
                                   const SurfaceModel* floor);

/// Runs scalar_low, scalar_high, and scheduled budgeting over the same skill
/// and surface (which must have a gap region; base.floor catches falls).
std::vector<SafetyRunResult> run_safety_experiment(const SimConfig& base,
                                                   const SkillProfile& skill,
                                                   const Estimator& est,
                                                   const SafetyModes& modes);

}  // namespace uficlab
