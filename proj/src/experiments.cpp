#include "uficlab/experiments.hpp"

#include <algorithm>
#include <cmath>

namespace uficlab {

EvalSummary evaluate_skills(const Estimator& est, const SimConfig& base,
                            const std::vector<SkillProfile>& skills,
                            const std::vector<std::uint64_t>& seeds, int stride) {
  if (skills.size() != seeds.size())
    throw ContractError("evaluate_skills: one seed per skill required");
  if (skills.empty()) throw DomainError("evaluate_skills: no skills");

  EvalSummary summary;
  std::vector<double> mse, mape, mape_sum, pearson, expert_ms;

  for (size_t i = 0; i < skills.size(); ++i) {
    const SkillProfile& skill = skills[i];
    SimConfig cfg = base;
    cfg.seed = seeds[i];
    const SimTrace trace = simulate_skill(cfg, skill);

    PowerTrace truth_full = trace.consumed_power();
    truth_full.power = truth_full.power.cwiseMax(0.0);  // label convention

    const auto steps = stride_steps(trace.size(), stride);
    const PowerTrace truth = subsample_trace(truth_full, steps);
    const PowerTrace pred = predict_power(est, skill, stride);
    if (pred.size() != truth.size())
      throw ContractError("evaluate_skills: prediction grid mismatch");

    SkillEval ev;
    ev.pattern = to_string(skill.pattern);
    ev.start_uv = skill.start_uv;
    ev.metrics = compute_metrics(truth, pred);
    ev.expert_energy_J = expert_energy(skill, base.surface.mu);
    ev.expert_mape_sum_pct = 100.0 *
                             std::abs(ev.expert_energy_J - ev.metrics.energy_true_J) /
                             ev.metrics.energy_true_J;
    summary.per_skill.push_back(ev);

    mse.push_back(ev.metrics.mse);
    mape.push_back(ev.metrics.mape_pct);
    mape_sum.push_back(ev.metrics.mape_sum_pct);
    pearson.push_back(ev.metrics.pearson);
    expert_ms.push_back(ev.expert_mape_sum_pct);
  }

  summary.mse = aggregate(mse);
  summary.mape = aggregate(mape);
  summary.mape_sum = aggregate(mape_sum);
  summary.pearson = aggregate(pearson);
  summary.expert_mape_sum = aggregate(expert_ms);
  return summary;
}

namespace {

/// Piecewise-linear resample of a power trace onto target timestamps.
std::vector<double> resample_schedule(const PowerTrace& pred, const VectorXd& t) {
  std::vector<double> out(static_cast<size_t>(t.size()));
  Eigen::Index j = 0;
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    const double tk = t[k];
    if (tk <= pred.t[0]) {
      out[static_cast<size_t>(k)] = pred.power[0];
      continue;
    }
    if (tk >= pred.t[pred.size() - 1]) {
      out[static_cast<size_t>(k)] = pred.power[pred.size() - 1];
      continue;
    }
    while (j + 2 < pred.size() && pred.t[j + 1] <= tk) ++j;
    const double w = (tk - pred.t[j]) / (pred.t[j + 1] - pred.t[j]);
    out[static_cast<size_t>(k)] = (1.0 - w) * pred.power[j] + w * pred.power[j + 1];
  }
  return out;
}

}  // namespace

SafetyRunResult analyze_safety_run(std::string mode, SimTrace trace,
                                   const SurfaceModel& surface,
                                   const SurfaceModel* floor) {
  SafetyRunResult r;
  r.mode = std::move(mode);
  const Eigen::Index n = trace.size();

  for (Eigen::Index k = 0; k < n; ++k) {
    if (trace.sigma[k] == 0.0) {
      r.valve_closed = true;
      break;
    }
  }

  if (surface.gap) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (surface.gap->contains(trace.x(k, 0), trace.x(k, 1))) {
        r.lost_contact = true;
        r.k_loss = k;
        break;
      }
    }
  }
  r.trace = std::move(trace);
  if (!r.lost_contact) return r;

  const SimTrace& tr = r.trace;
  const Vec3 x_loss = tr.x.row(r.k_loss).head<3>().transpose();
  const Vec3 normal = surface.eval(x_loss[0], x_loss[1]).second;

  Eigen::Index k_valve = -1, k_floor = -1;
  double max_drop = 0.0, peak_force = 0.0;
  for (Eigen::Index k = r.k_loss; k < n; ++k) {
    const Vec3 pos = tr.x.row(k).head<3>().transpose();
    const double drop = (x_loss - pos).dot(normal);
    max_drop = std::max(max_drop, drop);
    if (k > r.k_loss) {
      peak_force = std::max(peak_force, tr.f_ext.row(k).head<3>().norm());
      if (k_valve < 0 && tr.sigma[k] == 0.0) k_valve = k;
      if (floor != nullptr && k_floor < 0) {
        const Vec3 vel = tr.x_dot.row(k).head<3>().transpose();
        if (floor->contact(pos, vel).in_contact) k_floor = k;
      }
    }
  }
  r.hit_floor = k_floor >= 0;
  if (k_valve >= 0 && k_floor >= 0) {
    r.k_end = std::min(k_valve, k_floor);
  } else if (k_valve >= 0) {
    r.k_end = k_valve;
  } else if (k_floor >= 0) {
    r.k_end = k_floor;
  } else {
    r.k_end = n - 1;
  }
  r.fall_distance_m = max_drop;
  r.peak_contact_force_N = peak_force;
  return r;
}

std::vector<SafetyRunResult> run_safety_experiment(const SimConfig& base,
                                                   const SkillProfile& skill,
                                                   const Estimator& est,
                                                   const SafetyModes& modes) {
  if (!base.surface.gap)
    throw ConfigError("safety experiment: the surface needs a gap region");
  const SurfaceModel* floor = base.floor ? &*base.floor : nullptr;

  std::vector<SafetyRunResult> results;

  {
    SimConfig cfg = base;
    cfg.tank.mode = TankMode::scalar_init;
    cfg.tank.E0 = modes.scalar_low_E0;
    cfg.tank.epsilon = modes.scalar_low_epsilon;
    cfg.tank.epsilon_on = 2.0 * modes.scalar_low_epsilon;
    cfg.tank.E_max = std::max(cfg.tank.E0, cfg.tank.epsilon_on);
    cfg.tank.schedule.reset();
    results.push_back(
        analyze_safety_run("scalar_low", simulate_skill(cfg, skill), base.surface, floor));
  }
  {
    SimConfig cfg = base;
    cfg.tank.mode = TankMode::scalar_init;
    cfg.tank.E0 = modes.scalar_high_E0;
    cfg.tank.epsilon = modes.scalar_high_epsilon;
    cfg.tank.epsilon_on = 2.0 * modes.scalar_high_epsilon;
    cfg.tank.E_max = 2.0 * modes.scalar_high_E0;
    cfg.tank.schedule.reset();
    results.push_back(
        analyze_safety_run("scalar_high", simulate_skill(cfg, skill), base.surface, floor));
  }
  {
    const PowerTrace pred = predict_power(est, skill, modes.schedule_stride);
    const double budget = integrate_energy(pred, modes.scheduled_epsilon);
    auto schedule =
        std::make_shared<std::vector<double>>(resample_schedule(pred, skill.t));
    SimConfig cfg = base;
    cfg.tank.mode = TankMode::scheduled;
    cfg.tank.epsilon = modes.scheduled_epsilon;
    cfg.tank.epsilon_on = 2.0 * modes.scheduled_epsilon;
    cfg.tank.E0 = cfg.tank.epsilon_on;
    cfg.tank.E_max = std::max(2.0 * budget, 2.0 * cfg.tank.epsilon_on);
    cfg.tank.schedule = schedule;
    results.push_back(
        analyze_safety_run("scheduled", simulate_skill(cfg, skill), base.surface, floor));
  }
  return results;
}

}  // namespace uficlab
