#include "uficlab/metrics.hpp"

#include <cmath>

namespace uficlab {

std::vector<Eigen::Index> stride_steps(Eigen::Index n, int stride) {
  if (n <= 0) throw DomainError("stride_steps: empty range");
  if (stride < 1) throw DomainError("stride_steps: stride must be positive");
  std::vector<Eigen::Index> steps;
  for (Eigen::Index t = 0; t < n; t += stride) steps.push_back(t);
  if (steps.back() != n - 1) steps.push_back(n - 1);
  return steps;
}

PowerTrace subsample_trace(const PowerTrace& trace, const std::vector<Eigen::Index>& steps) {
  PowerTrace out;
  out.t.resize(static_cast<Eigen::Index>(steps.size()));
  out.power.resize(static_cast<Eigen::Index>(steps.size()));
  for (size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] < 0 || steps[i] >= trace.size())
      throw DomainError("subsample_trace: step out of range");
    out.t[static_cast<Eigen::Index>(i)] = trace.t[steps[i]];
    out.power[static_cast<Eigen::Index>(i)] = trace.power[steps[i]];
  }
  return out;
}

namespace {

double trapezoid(const PowerTrace& tr) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < tr.size(); ++i)
    sum += 0.5 * (tr.power[i] + tr.power[i + 1]) * (tr.t[i + 1] - tr.t[i]);
  return sum;
}

}  // namespace

double pearson_correlation(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size() || a.size() == 0)
    throw ContractError("pearson_correlation: length mismatch");
  const double n = static_cast<double>(a.size());
  const double ma = a.mean(), mb = b.mean();
  const double va = (a.array() - ma).square().sum() / n;
  const double vb = (b.array() - mb).square().sum() / n;
  if (va < 1e-24 || vb < 1e-24) return 0.0;
  const double cov = ((a.array() - ma) * (b.array() - mb)).sum() / n;
  return cov / std::sqrt(va * vb);
}

TrajectoryMetrics compute_metrics(const PowerTrace& truth, const PowerTrace& pred) {
  if (truth.size() != pred.size() || truth.size() == 0)
    throw ContractError("compute_metrics: trace length mismatch");
  if ((truth.t - pred.t).cwiseAbs().maxCoeff() > 0.0)
    throw ContractError("compute_metrics: traces are not aligned in time");

  TrajectoryMetrics m;
  const Eigen::Index n = truth.size();
  m.mse = (pred.power - truth.power).squaredNorm() / static_cast<double>(n);

  const double peak = truth.power.cwiseAbs().maxCoeff();
  const double floor = std::max(1e-3, 0.05 * peak);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += std::abs(pred.power[i] - truth.power[i]) /
           std::max(std::abs(truth.power[i]), floor);
  }
  m.mape_pct = 100.0 * acc / static_cast<double>(n);

  m.energy_true_J = trapezoid(truth);
  m.energy_pred_J = trapezoid(pred);
  if (m.energy_true_J <= 0.0)
    throw DomainError("compute_metrics: non-positive measured energy");
  m.mape_sum_pct =
      100.0 * std::abs(m.energy_pred_J - m.energy_true_J) / m.energy_true_J;

  m.pearson = pearson_correlation(truth.power, pred.power);
  return m;
}

double expert_energy(const SkillProfile& skill, double mu) {
  const Eigen::Index n = skill.size();
  if (n == 0) throw DomainError("expert_energy: empty skill");
  const double f_normal = std::abs(skill.f_d[2]);
  VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double speed = skill.x_dot_d.row(i).head<3>().norm();
    p[i] = mu * f_normal * speed;
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    sum += 0.5 * (p[i] + p[i + 1]) * (skill.t[i + 1] - skill.t[i]);
  return sum;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = static_cast<long>(values.size());
  if (values.empty()) return a;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / n;
  double acc = 0.0;
  for (double v : values) acc += (v - a.mean) * (v - a.mean);
  a.std = std::sqrt(acc / n);
  return a;
}

}  // namespace uficlab
