#include "uficlab/estimator.hpp"

#include "uficlab/parallel.hpp"

namespace uficlab {

Estimator::Estimator(Checkpoint ckpt) : ckpt_(std::move(ckpt)), model_(ckpt_.spec) {
  if (ckpt_.theta.size() != model_.num_params())
    throw ContractError("estimator: parameter vector does not match the model spec");
  if (ckpt_.stats.input_mean.size() != kWindowChannels)
    throw ContractError("estimator: normalization stats channel count mismatch");
}

PowerTrace predict_power(const Estimator& est, const SkillProfile& skill, int stride) {
  if (stride < 1) throw DomainError("predict_power: stride must be positive");
  const TrajectoryData traj = trajectory_from_skill(skill);
  const Eigen::Index n = traj.size();

  std::vector<Eigen::Index> steps;
  for (Eigen::Index t = 0; t < n; t += stride) steps.push_back(t);
  if (steps.back() != n - 1) steps.push_back(n - 1);

  PowerTrace out;
  out.t.resize(static_cast<Eigen::Index>(steps.size()));
  out.power.resize(static_cast<Eigen::Index>(steps.size()));

  const int window = est.model().spec().window;
  const int in_stride = est.model().spec().input_stride;
  parallel_chunks(steps.size(), 256, [&](size_t, size_t begin, size_t end) {
    TcnWorkspace ws;
    MatRM X;
    VectorXd cond;
    for (size_t i = begin; i < end; ++i) {
      const Eigen::Index t = steps[i];
      assemble_window(traj, t, window, est.stats(), X, cond, in_stride);
      const double z = est.model().forward(est.theta(), X, cond, ws, false, nullptr);
      out.t[static_cast<Eigen::Index>(i)] = skill.t[t];
      out.power[static_cast<Eigen::Index>(i)] = label_inverse(z, est.stats());
    }
  });
  return out;
}

double integrate_energy(const PowerTrace& trace, double epsilon) {
  const Eigen::Index n = trace.size();
  if (n == 0) throw DomainError("integrate_energy: empty power trace");
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    sum += 0.5 * (trace.power[i] + trace.power[i + 1]) * (trace.t[i + 1] - trace.t[i]);
  return sum + epsilon;
}

}  // namespace uficlab
