#pragma once

#include <vector>

#include "uficlab/simulation.hpp"
#include "uficlab/skills.hpp"

namespace uficlab {

/// Pointwise and integral agreement between a measured and a predicted power
/// trace with identical timestamps.
struct TrajectoryMetrics {
  double mse = 0.0;            // W^2, raw
  double mape_pct = 0.0;       // %, floored denominator
  double mape_sum_pct = 0.0;   // %, on trapezoid energy integrals
  double pearson = 0.0;        // 0 when either side is near-constant
  double energy_true_J = 0.0;
  double energy_pred_J = 0.0;
};

/// Sample indices 0, stride, 2*stride, ... with the last index always present.
std::vector<Eigen::Index> stride_steps(Eigen::Index n, int stride);

PowerTrace subsample_trace(const PowerTrace& trace, const std::vector<Eigen::Index>& steps);

/// Throws ContractError unless both traces share timestamps. The percentage
/// error denominator is floored at max(1e-3 W, 5% of the truth peak).
TrajectoryMetrics compute_metrics(const PowerTrace& truth, const PowerTrace& pred);

double pearson_correlation(const VectorXd& a, const VectorXd& b);

/// Handcrafted reference estimate: friction coefficient times the normal
/// component of the desired wrench times the desired translational speed,
/// integrated over the skill (the desired motion is tangential).
double expert_energy(const SkillProfile& skill, double mu);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population
  long count = 0;
};

Aggregate aggregate(const std::vector<double>& values);

}  // namespace uficlab
