#pragma once

#include <utility>
#include <vector>

#include "uficlab/simulation.hpp"
#include "uficlab/skills.hpp"
#include "uficlab/types.hpp"

namespace uficlab {

/// One collected trajectory: the desired-motion channels the estimator may
/// see plus the per-step tank power it learns to predict. power can be empty
/// for inference-only trajectories.
struct TrajectoryData {
  MatRM x_d;      // N x 6 desired pose
  MatRM x_dot_d;  // N x 6 desired velocity
  Vec6 f_d = Vec6::Zero();  // constant desired wrench, conditioning input
  VectorXd power;           // W, clamped at zero; empty when unlabeled
  double dt = kDefaultDt;

  Eigen::Index size() const { return x_d.rows(); }
};

/// Labels use log(power + 3) then a z-score; inputs use per-channel z-scores
/// computed over real (non-padding) window columns of the training split.
struct NormStats {
  VectorXd input_mean, input_std;  // one entry per input channel
  double label_mean = 0.0;
  double label_std = 1.0;
};

constexpr int kWindowChannels = 12;  // relative desired pose (6) + velocity (6)

double label_transform(double power_w);
double label_inverse(double z, const NormStats& stats);  // back to W, floored at 0
double normalized_label(double power_w, const NormStats& stats);

/// Pairs a skill with its measured power labels; lengths are reconciled to
/// the shorter of the two. Pass nullptr for unlabeled trajectories.
TrajectoryData trajectory_from_skill(const SkillProfile& skill,
                                     const PowerTrace* power = nullptr);

/// Fills the window ending at step t: column j holds trajectory step
/// t - (window - 1 - j) * stride, so stride > 1 widens the time span at the
/// same column count. Pose channels are offsets from the window's first real
/// sample, then z-scored; padding columns before the trajectory start stay
/// exactly zero. cond gets the trajectory's desired wrench, raw.
void assemble_window(const TrajectoryData& traj, Eigen::Index t, int window,
                     const NormStats& stats, MatRM& X, VectorXd& cond,
                     int stride = 1);

/// (trajectory index, window end step).
using WindowRef = std::pair<int, Eigen::Index>;

struct WindowedDataset {
  std::vector<TrajectoryData> trajs;
  std::vector<int> train_trajs, val_trajs, test_trajs;
  std::vector<WindowRef> train_windows, val_windows;
  NormStats stats;
  int window = 100;
  int stride = 1;
};

/// Raw per-channel moments over the training split, before the std floor.
NormStats compute_norm_stats(const std::vector<TrajectoryData>& trajs,
                             const std::vector<int>& traj_ids, int window);

/// Seeded by-trajectory split (roughly 80/10/10, every part non-empty when
/// possible), window enumeration, and training-split normalization stats
/// (computed over the full strided span).
WindowedDataset build_dataset(std::vector<TrajectoryData> trajs, int window,
                              std::uint64_t seed, int stride = 1);

}  // namespace uficlab
