#include "uficlab/simulation.hpp"

#include <random>

#include "uficlab/csv.hpp"
#include "uficlab/rng.hpp"

namespace uficlab {

PowerTrace SimTrace::consumed_power() const {
  PowerTrace p;
  p.t = t;
  p.power = consumed_W;
  return p;
}

SimTrace simulate_skill(const SimConfig& cfg, const SkillProfile& skill) {
  const Eigen::Index n = skill.size();
  if (n == 0) throw DomainError("simulate_skill: empty skill profile");
  const double dt = n > 1 ? skill.dt() : cfg.dt;
  if (!(dt > 0.0)) throw DomainError("simulate_skill: non-positive dt");

  RobotState state = make_robot_state(cfg.M_C, cfg.D_C, cfg.f_g);
  state.x = skill.x_d.row(0).transpose();
  state.x_dot.setZero();

  TankState tank = make_tank(cfg.tank.E0, cfg.tank.epsilon, cfg.tank.epsilon_on,
                             cfg.tank.E_max, cfg.tank.mode, cfg.tank.schedule);

  auto rng = make_engine(cfg.seed, seed_tag::kForceNoise, 0);
  std::normal_distribution<double> noise(0.0, cfg.force_noise_sigma > 0.0
                                                  ? cfg.force_noise_sigma
                                                  : 1.0);

  SimTrace tr;
  tr.t.resize(n);
  tr.x.resize(n, 6);
  tr.x_dot.resize(n, 6);
  tr.f_robot.resize(n, 6);
  tr.f_ext.resize(n, 6);
  tr.E_robot.resize(n);
  tr.E_tank.resize(n);
  tr.sigma.resize(n);
  tr.injected_J.resize(n);
  tr.consumed_W.resize(n);
  tr.epsilon = tank.epsilon;
  tr.E0 = tank.E_tank;

  Vec6 f_integral = Vec6::Zero();
  Eigen::Index rows = n;

  for (Eigen::Index k = 0; k < n; ++k) {
    ContactState c = cfg.surface.contact(state);
    Vec6 f_ext = c.f_ext;
    if (cfg.floor) {
      ContactState cf = cfg.floor->contact(state);
      f_ext += cf.f_ext;
    }

    const Mat3 R = rotation_from_vector(state.x.tail<3>());

    // Measured wrench: what the end-effector applies to the environment,
    // expressed in the end-effector frame, plus sensor noise.
    Vec6 f_meas = rotate_wrench(R.transpose(), -f_ext);
    if (cfg.force_noise_sigma > 0.0) {
      for (int i = 0; i < 6; ++i) f_meas[i] += noise(rng);
    }

    const Vec6 x_d = skill.x_d.row(k).transpose();
    const Vec6& f_d = skill.f_d;

    const Vec6 f_i = impedance_wrench(state, x_d, cfg.gains);
    auto [f_f, new_integral] = force_wrench(f_meas, f_d, f_integral, R, cfg.gains, dt);
    f_integral = new_integral;

    const int sigma_eff = tank.sigma;  // valve updates take effect next step
    const Vec6 f_cntr_gated = sigma_eff ? Vec6(f_i + f_f) : Vec6(Vec6::Zero());
    TankState next_tank = tank_step(tank, state.x_dot, f_cntr_gated, dt);

    const Vec6 f_robot = control_wrench(f_i, f_f, sigma_eff, cfg.f_g);

    tr.t[k] = skill.t[k];
    tr.x.row(k) = state.x.transpose();
    tr.x_dot.row(k) = state.x_dot.transpose();
    tr.f_robot.row(k) = f_robot.transpose();
    tr.f_ext.row(k) = f_ext.transpose();
    tr.E_robot[k] = kinetic_energy(state);
    tr.E_tank[k] = next_tank.E_tank;
    tr.sigma[k] = sigma_eff;
    tr.injected_J[k] = next_tank.last_injected_J;
    tr.consumed_W[k] = next_tank.last_consumed_W;

    state = step_dynamics(state, f_robot, f_ext, dt, k);
    tank = next_tank;

    if (tank.exhausted) {
      rows = k + 1;
      tr.stop = StopReason::schedule_exhausted;
      break;
    }
  }

  if (rows != n) {
    tr.t.conservativeResize(rows);
    tr.x.conservativeResize(rows, 6);
    tr.x_dot.conservativeResize(rows, 6);
    tr.f_robot.conservativeResize(rows, 6);
    tr.f_ext.conservativeResize(rows, 6);
    tr.E_robot.conservativeResize(rows);
    tr.E_tank.conservativeResize(rows);
    tr.sigma.conservativeResize(rows);
    tr.injected_J.conservativeResize(rows);
    tr.consumed_W.conservativeResize(rows);
  }
  tr.clamp_events = tank.clamp_events;
  return tr;
}

double task_energy(const SimTrace& trace) {
  const Eigen::Index n = trace.size();
  if (n == 0) throw DomainError("task_energy: empty trace");
  if (n == 1) return trace.epsilon;
  const double dt = trace.dt();
  double sum = 0.5 * (trace.consumed_W[0] + trace.consumed_W[n - 1]);
  for (Eigen::Index k = 1; k + 1 < n; ++k) sum += trace.consumed_W[k];
  return sum * dt + trace.epsilon;
}

namespace {

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t"};
    for (int i = 0; i < 6; ++i) c.push_back("x" + std::to_string(i));
    for (int i = 0; i < 6; ++i) c.push_back("v" + std::to_string(i));
    for (int i = 0; i < 6; ++i) c.push_back("fr" + std::to_string(i));
    for (int i = 0; i < 6; ++i) c.push_back("fe" + std::to_string(i));
    c.insert(c.end(), {"E_robot", "E_tank", "sigma", "injected_J", "consumed_W"});
    return c;
  }();
  return cols;
}

}  // namespace

void trace_to_csv(const SimTrace& trace, const std::string& path,
                  const std::map<std::string, std::string>& extra_metadata) {
  CsvTable tbl;
  tbl.columns = trace_columns();
  tbl.metadata["epsilon"] = double_to_string(trace.epsilon);
  tbl.metadata["E0"] = double_to_string(trace.E0);
  tbl.metadata["clamp_events"] = std::to_string(trace.clamp_events);
  tbl.metadata["stop_reason"] =
      trace.stop == StopReason::completed ? "completed" : "schedule_exhausted";
  for (const auto& [k, v] : extra_metadata) tbl.metadata[k] = v;

  const Eigen::Index n = trace.size();
  tbl.data.resize(n, static_cast<Eigen::Index>(tbl.columns.size()));
  tbl.data.col(0) = trace.t;
  tbl.data.block(0, 1, n, 6) = trace.x;
  tbl.data.block(0, 7, n, 6) = trace.x_dot;
  tbl.data.block(0, 13, n, 6) = trace.f_robot;
  tbl.data.block(0, 19, n, 6) = trace.f_ext;
  tbl.data.col(25) = trace.E_robot;
  tbl.data.col(26) = trace.E_tank;
  tbl.data.col(27) = trace.sigma;
  tbl.data.col(28) = trace.injected_J;
  tbl.data.col(29) = trace.consumed_W;
  tbl.write(path);
}

SimTrace csv_to_trace(const std::string& path) {
  CsvTable tbl = CsvTable::read(path);
  if (tbl.columns != trace_columns())
    throw ParseError("trace csv " + path + ": unexpected column layout");
  SimTrace tr;
  const Eigen::Index n = tbl.rows();
  tr.t = tbl.data.col(0);
  tr.x = tbl.data.block(0, 1, n, 6);
  tr.x_dot = tbl.data.block(0, 7, n, 6);
  tr.f_robot = tbl.data.block(0, 13, n, 6);
  tr.f_ext = tbl.data.block(0, 19, n, 6);
  tr.E_robot = tbl.data.col(25);
  tr.E_tank = tbl.data.col(26);
  tr.sigma = tbl.data.col(27);
  tr.injected_J = tbl.data.col(28);
  tr.consumed_W = tbl.data.col(29);
  if (auto it = tbl.metadata.find("epsilon"); it != tbl.metadata.end())
    tr.epsilon = string_to_double(it->second);
  if (auto it = tbl.metadata.find("E0"); it != tbl.metadata.end())
    tr.E0 = string_to_double(it->second);
  if (auto it = tbl.metadata.find("clamp_events"); it != tbl.metadata.end())
    tr.clamp_events = std::stol(it->second);
  if (auto it = tbl.metadata.find("stop_reason"); it != tbl.metadata.end())
    tr.stop = it->second == "schedule_exhausted" ? StopReason::schedule_exhausted
                                                 : StopReason::completed;
  return tr;
}

}  // namespace uficlab
