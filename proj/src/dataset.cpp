#include "uficlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uficlab/rng.hpp"

namespace uficlab {

double label_transform(double power_w) {
  return std::log(std::max(power_w, 0.0) + 3.0);
}

double label_inverse(double z, const NormStats& stats) {
  const double logv = z * stats.label_std + stats.label_mean;
  return std::max(std::exp(logv) - 3.0, 0.0);
}

double normalized_label(double power_w, const NormStats& stats) {
  return (label_transform(power_w) - stats.label_mean) / stats.label_std;
}

TrajectoryData trajectory_from_skill(const SkillProfile& skill, const PowerTrace* power) {
  TrajectoryData traj;
  Eigen::Index n = skill.size();
  if (power != nullptr) n = std::min(n, power->size());
  if (n == 0) throw DomainError("trajectory_from_skill: empty trajectory");
  traj.x_d = skill.x_d.topRows(n);
  traj.x_dot_d = skill.x_dot_d.topRows(n);
  traj.f_d = skill.f_d;
  traj.dt = skill.dt();
  if (power != nullptr) traj.power = power->power.head(n).cwiseMax(0.0);
  return traj;
}

void assemble_window(const TrajectoryData& traj, Eigen::Index t, int window,
                     const NormStats& stats, MatRM& X, VectorXd& cond,
                     int stride) {
  if (t < 0 || t >= traj.size())
    throw DomainError("assemble_window: step out of range");
  if (stride < 1) throw ConfigError("assemble_window: stride must be positive");
  if (stats.input_mean.size() != kWindowChannels ||
      stats.input_std.size() != kWindowChannels)
    throw ContractError("assemble_window: stats channel count mismatch");
  X.resize(kWindowChannels, window);
  X.setZero();
  // Column j reads step t - (window - 1 - j) * stride; j0 is the first column
  // whose step is inside the trajectory.
  const Eigen::Index span = static_cast<Eigen::Index>(window - 1) * stride;
  Eigen::Index j0 = 0;
  if (t < span) j0 = window - 1 - t / stride;
  const auto ref = traj.x_d.row(t - (window - 1 - j0) * static_cast<Eigen::Index>(stride));
  for (Eigen::Index j = j0; j < window; ++j) {
    const Eigen::Index s = t - (window - 1 - j) * static_cast<Eigen::Index>(stride);
    for (int c = 0; c < 6; ++c) {
      X(c, j) = (traj.x_d(s, c) - ref[c] - stats.input_mean[c]) / stats.input_std[c];
      X(6 + c, j) =
          (traj.x_dot_d(s, c) - stats.input_mean[6 + c]) / stats.input_std[6 + c];
    }
  }
  cond = traj.f_d;
}

NormStats compute_norm_stats(const std::vector<TrajectoryData>& trajs,
                             const std::vector<int>& traj_ids, int window) {
  VectorXd sum = VectorXd::Zero(kWindowChannels);
  VectorXd sumsq = VectorXd::Zero(kWindowChannels);
  double lsum = 0.0, lsumsq = 0.0;
  long n_cols = 0, n_labels = 0;

  for (int ti : traj_ids) {
    const TrajectoryData& traj = trajs[static_cast<size_t>(ti)];
    const Eigen::Index len = traj.size();
    for (Eigen::Index t = 0; t < len; ++t) {
      const Eigen::Index first = std::max<Eigen::Index>(0, t - window + 1);
      const auto ref = traj.x_d.row(first);
      for (Eigen::Index s = first; s <= t; ++s) {
        for (int c = 0; c < 6; ++c) {
          const double dp = traj.x_d(s, c) - ref[c];
          sum[c] += dp;
          sumsq[c] += dp * dp;
          const double v = traj.x_dot_d(s, c);
          sum[6 + c] += v;
          sumsq[6 + c] += v * v;
        }
        ++n_cols;
      }
      if (traj.power.size() > t) {
        const double y = label_transform(traj.power[t]);
        lsum += y;
        lsumsq += y * y;
        ++n_labels;
      }
    }
  }
  if (n_cols == 0) throw DomainError("compute_norm_stats: no training windows");

  NormStats st;
  st.input_mean = sum / static_cast<double>(n_cols);
  st.input_std.resize(kWindowChannels);
  for (int c = 0; c < kWindowChannels; ++c) {
    const double var =
        sumsq[c] / static_cast<double>(n_cols) - st.input_mean[c] * st.input_mean[c];
    st.input_std[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
    if (st.input_std[c] < 1e-12) st.input_std[c] = 1.0;
  }
  if (n_labels > 0) {
    st.label_mean = lsum / static_cast<double>(n_labels);
    const double var =
        lsumsq / static_cast<double>(n_labels) - st.label_mean * st.label_mean;
    st.label_std = var > 1e-24 ? std::sqrt(var) : 1.0;
    if (st.label_std < 1e-12) st.label_std = 1.0;
  }
  return st;
}

WindowedDataset build_dataset(std::vector<TrajectoryData> trajs, int window,
                              std::uint64_t seed, int stride) {
  if (trajs.empty()) throw DomainError("build_dataset: no trajectories");
  if (window < 1) throw ConfigError("build_dataset: window must be positive");
  if (stride < 1) throw ConfigError("build_dataset: stride must be positive");

  WindowedDataset ds;
  ds.window = window;
  ds.stride = stride;
  ds.trajs = std::move(trajs);

  const int n = static_cast<int>(ds.trajs.size());
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_engine(seed, seed_tag::kShuffle, 0);
  std::shuffle(order.begin(), order.end(), rng);

  int n_test = n >= 3 ? std::max(1, n / 10) : 0;
  int n_val = n >= 2 ? std::max(1, n / 10) : 0;
  const int n_train = n - n_val - n_test;
  ds.train_trajs.assign(order.begin(), order.begin() + n_train);
  ds.val_trajs.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  ds.test_trajs.assign(order.begin() + n_train + n_val, order.end());

  auto enumerate = [&](const std::vector<int>& ids, std::vector<WindowRef>& out) {
    for (int ti : ids) {
      const Eigen::Index len = ds.trajs[static_cast<size_t>(ti)].size();
      for (Eigen::Index t = 0; t < len; ++t) out.emplace_back(ti, t);
    }
  };
  enumerate(ds.train_trajs, ds.train_windows);
  enumerate(ds.val_trajs, ds.val_windows);
  if (ds.train_windows.empty()) throw DomainError("build_dataset: empty training split");

  ds.stats = compute_norm_stats(ds.trajs, ds.train_trajs, (window - 1) * stride + 1);
  return ds;
}

}  // namespace uficlab
