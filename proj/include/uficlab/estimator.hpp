#pragma once

#include "uficlab/checkpoint.hpp"
#include "uficlab/simulation.hpp"

namespace uficlab {

/// Inference bundle: a model, its parameters, and its normalization moments.
class Estimator {
 public:
  explicit Estimator(Checkpoint ckpt);

  const TcnModel& model() const { return model_; }
  const NormStats& stats() const { return ckpt_.stats; }
  const VectorXd& theta() const { return ckpt_.theta; }
  const Checkpoint& checkpoint() const { return ckpt_; }

 private:
  Checkpoint ckpt_;
  TcnModel model_;
};

/// Predicted tank power along a skill, evaluated at every stride-th step with
/// the final step always included. Deterministic and thread-count independent.
PowerTrace predict_power(const Estimator& est, const SkillProfile& skill, int stride = 1);

/// Trapezoid of a (possibly non-uniformly sampled) power trace plus the tank
/// reserve epsilon. Throws DomainError on an empty trace.
double integrate_energy(const PowerTrace& trace, double epsilon);

}  // namespace uficlab
