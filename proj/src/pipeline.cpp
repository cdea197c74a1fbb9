#include "uficlab/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uficlab/checkpoint.hpp"
#include "uficlab/csv.hpp"
#include "uficlab/experiments.hpp"
#include "uficlab/heatmap.hpp"
#include "uficlab/rng.hpp"
#include "uficlab/train.hpp"

namespace uficlab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string file_hash(const std::string& path) { return fnv1a_hex(slurp(path)); }

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw ParseError("write failed for " + path);
}

json read_json(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw ParseError("cannot create directory " + path + ": " + ec.message());
}

std::string index_name(const std::string& stem, int i, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", i);
  return stem + buf + ext;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::uint64_t master_seed(const Config& cfg) {
  return static_cast<std::uint64_t>(cfg.get_int("seed", 1));
}

json agg_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"std", a.std}, {"count", a.count}};
}

json summary_json(const EvalSummary& s) {
  json per = json::array();
  for (const SkillEval& ev : s.per_skill) {
    per.push_back({{"pattern", ev.pattern},
                   {"start_u", ev.start_uv[0]},
                   {"start_v", ev.start_uv[1]},
                   {"mse", ev.metrics.mse},
                   {"mape_pct", ev.metrics.mape_pct},
                   {"mape_sum_pct", ev.metrics.mape_sum_pct},
                   {"pearson", ev.metrics.pearson},
                   {"energy_true_J", ev.metrics.energy_true_J},
                   {"energy_pred_J", ev.metrics.energy_pred_J},
                   {"expert_energy_J", ev.expert_energy_J},
                   {"expert_mape_sum_pct", ev.expert_mape_sum_pct}});
  }
  return {{"aggregates",
           {{"mse", agg_json(s.mse)},
            {"mape_pct", agg_json(s.mape)},
            {"mape_sum_pct", agg_json(s.mape_sum)},
            {"pearson", agg_json(s.pearson)},
            {"expert_mape_sum_pct", agg_json(s.expert_mape_sum)}}},
          {"per_skill", per}};
}

struct SkillDraw {
  PatternSpec ps;
  double f_d_z = 5.0;
};

/// Shared random skill sampler: fixed draw order, resamples (from the same
/// stream) when the path leaves the workspace.
SkillDraw draw_skill(const SurfaceModel& surface, const Config& cfg, Pattern pattern,
                     std::uint64_t param_seed, std::uint64_t walk_seed, double dt,
                     SkillProfile& out_skill) {
  const double start_range = cfg.get_double("collect.start_range", 0.3);
  const double speed_min = cfg.get_double("collect.speed_min", 0.02);
  const double speed_max = cfg.get_double("collect.speed_max", 0.10);
  const double fd_min = cfg.get_double("collect.fd_min", 3.0);
  const double fd_max = cfg.get_double("collect.fd_max", 8.0);
  const double length = cfg.get_double("collect.length", 0.5);
  const double hold_s = cfg.get_double("collect.hold_s", 0.5);

  std::mt19937_64 engine(param_seed);
  std::uniform_real_distribution<double> u_start(-start_range, start_range);
  std::uniform_real_distribution<double> u_heading(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> u_speed(speed_min, speed_max);
  std::uniform_real_distribution<double> u_fd(fd_min, fd_max);

  SkillDraw draw;
  draw.ps.pattern = pattern;
  draw.ps.length = length;
  draw.ps.hold_s = hold_s;
  draw.ps.dt = dt;
  draw.ps.seed = walk_seed;

  for (int attempt = 0; attempt < 40; ++attempt) {
    draw.ps.start_uv = Eigen::Vector2d(u_start(engine), u_start(engine));
    draw.ps.heading = u_heading(engine);
    draw.ps.speed = u_speed(engine);
    draw.f_d_z = u_fd(engine);
    draw.ps.f_d = (Vec6() << 0, 0, -draw.f_d_z, 0, 0, 0).finished();
    try {
      out_skill = generate_pattern(surface, draw.ps);
    } catch (const DomainError&) {
      continue;
    }
    if (!out_skill.truncated) return draw;
  }
  return draw;  // last attempt kept, possibly truncated
}

PowerTrace power_from_csv(const std::string& path) {
  CsvTable tbl = CsvTable::read(path);
  PowerTrace pt;
  pt.t = tbl.data.col(tbl.col_index("t"));
  pt.power = tbl.data.col(tbl.col_index("power"));
  return pt;
}

void power_to_csv(const PowerTrace& pt, const std::string& path,
                  const std::map<std::string, std::string>& metadata) {
  CsvTable tbl;
  tbl.columns = {"t", "power"};
  tbl.metadata = metadata;
  tbl.data.resize(pt.size(), 2);
  tbl.data.col(0) = pt.t;
  tbl.data.col(1) = pt.power;
  tbl.write(path);
}

SurfaceModel transfer_surface(const Config& cfg, const SurfaceModel& base,
                              const std::string& name) {
  if (cfg.has("transfer." + name + ".kind"))
    return SurfaceModel::from_config(cfg, "transfer." + name + ".");
  SurfaceModel s = base;
  s.kind = surface_kind_from_string(name);
  s.gap.reset();
  s.id = name;
  s.validate();
  return s;
}

}  // namespace

SimConfig sim_config_from(const Config& cfg) {
  SimConfig sc;
  sc.surface = SurfaceModel::from_config(cfg);
  sc.surface.validate();
  sc.M_C = cfg.get_vec6("robot.M", Vec6(3, 3, 3, 0.1, 0.1, 0.1)).asDiagonal();
  sc.D_C = cfg.get_vec6("robot.D_plant", Vec6(40, 40, 40, 2, 2, 2)).asDiagonal();
  sc.f_g = cfg.get_vec6("robot.f_g",
                        (Vec6() << 0, 0, 3.0 * kGravity, 0, 0, 0).finished());
  sc.gains = ControllerGains::from_config(cfg);
  sc.gains.validate();

  const std::string mode = cfg.get_string("tank.mode", "scalar");
  if (mode == "scalar") {
    sc.tank.mode = TankMode::scalar_init;
  } else if (mode == "scheduled") {
    sc.tank.mode = TankMode::scheduled;
  } else {
    throw ConfigError("tank.mode must be scalar or scheduled");
  }
  sc.tank.E0 = cfg.get_double("tank.E0", 200.0);
  sc.tank.epsilon = cfg.get_double("tank.epsilon", 0.1);
  sc.tank.epsilon_on = cfg.get_double("tank.epsilon_on", 2.0 * sc.tank.epsilon);
  sc.tank.E_max =
      cfg.get_double("tank.E_max", 2.0 * std::max(sc.tank.E0, sc.tank.epsilon_on));

  sc.force_noise_sigma = cfg.get_double("sim.noise_sigma", 0.1);
  sc.dt = cfg.get_double("sim.dt", kDefaultDt);
  sc.seed = master_seed(cfg);
  return sc;
}

void cmd_collect(const Config& cfg, const std::string& out_dir) {
  const SimConfig base = sim_config_from(cfg);
  const std::uint64_t seed = master_seed(cfg);
  const int n = static_cast<int>(cfg.get_int("collect.num_skills", 40));
  if (n < 1) throw ConfigError("collect.num_skills must be positive");
  const auto pattern_names =
      split_list(cfg.get_string("collect.patterns", "line,zigzag,arc,spiral,random_walk"));
  if (pattern_names.empty()) throw ConfigError("collect.patterns is empty");
  std::vector<Pattern> patterns;
  for (const std::string& p : pattern_names) patterns.push_back(pattern_from_string(p));

  ensure_dir(out_dir + "/skills");
  ensure_dir(out_dir + "/labels");

  json entries = json::array();
  for (int i = 0; i < n; ++i) {
    SkillProfile skill;
    const SkillDraw draw = draw_skill(
        base.surface, cfg, patterns[static_cast<size_t>(i) % patterns.size()],
        derive_seed(seed, seed_tag::kCollect, static_cast<std::uint64_t>(i)),
        derive_seed(seed, seed_tag::kSkillWalk, static_cast<std::uint64_t>(i)),
        base.dt, skill);
    skill.surface_id = base.surface.id;

    SimConfig sc = base;
    sc.seed = derive_seed(seed, seed_tag::kCollect, 1000000 + static_cast<std::uint64_t>(i));
    const SimTrace trace = simulate_skill(sc, skill);

    const std::string skill_rel = "skills/" + index_name("skill_", i, ".csv");
    const std::string labels_rel = "labels/" + index_name("power_", i, ".csv");
    skill_to_csv(skill, out_dir + "/" + skill_rel);
    power_to_csv(trace.consumed_power(), out_dir + "/" + labels_rel,
                 {{"skill", skill_rel}, {"sim_seed", std::to_string(sc.seed)}});

    entries.push_back({{"index", i},
                       {"pattern", to_string(skill.pattern)},
                       {"skill_csv", skill_rel},
                       {"labels_csv", labels_rel},
                       {"sim_seed", sc.seed},
                       {"start_u", skill.start_uv[0]},
                       {"start_v", skill.start_uv[1]},
                       {"speed", draw.ps.speed},
                       {"f_d_z", draw.f_d_z},
                       {"truncated", skill.truncated},
                       {"samples", static_cast<long>(skill.size())},
                       {"task_energy_J", task_energy(trace)},
                       {"skill_hash", file_hash(out_dir + "/" + skill_rel)},
                       {"labels_hash", file_hash(out_dir + "/" + labels_rel)}});
  }

  json manifest{{"format_version", 1},
                {"kind", "uficlab-collect"},
                {"config_hash", cfg.hash()},
                {"seed", seed},
                {"surface_id", base.surface.id},
                {"surface_kind", to_string(base.surface.kind)},
                {"num_skills", n},
                {"skills", entries}};
  write_json(manifest, out_dir + "/manifest.json");
}

namespace {

struct CollectData {
  std::vector<SkillProfile> skills;
  std::vector<PowerTrace> labels;
  std::vector<std::uint64_t> sim_seeds;
  json manifest;
};

CollectData load_collect(const std::string& collect_dir) {
  CollectData data;
  data.manifest = read_json(collect_dir + "/manifest.json");
  if (data.manifest.value("kind", std::string()) != "uficlab-collect")
    throw ParseError(collect_dir + "/manifest.json is not a collect manifest");
  for (const json& e : data.manifest.at("skills")) {
    data.skills.push_back(csv_to_skill(collect_dir + "/" + e.at("skill_csv").get<std::string>()));
    data.labels.push_back(
        power_from_csv(collect_dir + "/" + e.at("labels_csv").get<std::string>()));
    data.sim_seeds.push_back(e.at("sim_seed").get<std::uint64_t>());
  }
  if (data.skills.empty()) throw ParseError(collect_dir + ": no skills in manifest");
  return data;
}

}  // namespace

void cmd_train(const Config& cfg, const std::string& collect_dir,
               const std::string& out_dir) {
  ensure_dir(out_dir);
  const CollectData data = load_collect(collect_dir);

  std::vector<TrajectoryData> trajs;
  for (size_t i = 0; i < data.skills.size(); ++i)
    trajs.push_back(trajectory_from_skill(data.skills[i], &data.labels[i]));

  const TcnSpec spec = TcnSpec::from_config(cfg);
  const TcnModel model(spec);
  const std::uint64_t seed = master_seed(cfg);
  WindowedDataset ds =
      build_dataset(std::move(trajs), spec.window, seed, spec.input_stride);

  TrainConfig tcfg = TrainConfig::from_config(cfg);
  tcfg.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed",
                                                     static_cast<std::int64_t>(seed)));
  const TrainResult result = train_model(model, ds, tcfg);

  Checkpoint ckpt;
  ckpt.spec = spec;
  ckpt.stats = ds.stats;
  ckpt.theta = result.theta;
  ckpt.seed = tcfg.seed;
  ckpt.config_hash = cfg.hash();
  save_checkpoint(ckpt, out_dir + "/model.json");
  write_history_csv(result.history, out_dir + "/history.csv");

  json hist_train = json::array(), hist_val = json::array();
  for (const EpochStats& e : result.history) {
    hist_train.push_back(e.train_mape);
    hist_val.push_back(e.val_mape);
  }
  json report{{"format_version", 1},
              {"kind", "uficlab-train"},
              {"config_hash", cfg.hash()},
              {"seed", seed},
              {"train_seed", tcfg.seed},
              {"epochs", tcfg.epochs},
              {"iterations_per_epoch", tcfg.iterations_per_epoch},
              {"batch_size", tcfg.batch_size},
              {"window", spec.window},
              {"param_count", static_cast<long>(model.num_params())},
              {"split",
               {{"train", ds.train_trajs}, {"val", ds.val_trajs}, {"test", ds.test_trajs}}},
              {"counts",
               {{"trajectories", static_cast<long>(ds.trajs.size())},
                {"train_windows", static_cast<long>(ds.train_windows.size())},
                {"val_windows", static_cast<long>(ds.val_windows.size())}}},
              {"history", {{"train_mape", hist_train}, {"val_mape", hist_val}}},
              {"final",
               {{"train_mape", result.history.back().train_mape},
                {"val_mape", result.history.back().val_mape}}},
              {"model_file", "model.json"},
              {"model_hash", file_hash(out_dir + "/model.json")}};
  write_json(report, out_dir + "/train_report.json");
}

void cmd_estimate(const Config& cfg, const std::string& model_path,
                  const std::string& skill_path, const std::string& out_dir) {
  ensure_dir(out_dir);
  const Estimator est(load_checkpoint(model_path));
  const SkillProfile skill = csv_to_skill(skill_path);
  const int stride = static_cast<int>(cfg.get_int("estimate.stride", 1));
  const double epsilon = cfg.get_double("tank.epsilon", 0.1);

  const PowerTrace pred = predict_power(est, skill, stride);
  const double energy = integrate_energy(pred, epsilon);

  const std::string pred_rel = "predicted_power.csv";
  power_to_csv(pred, out_dir + "/" + pred_rel,
               {{"pattern", to_string(skill.pattern)},
                {"stride", std::to_string(stride)}});

  json report{{"format_version", 1},
              {"kind", "uficlab-estimate"},
              {"config_hash", cfg.hash()},
              {"stride", stride},
              {"epsilon", epsilon},
              {"samples", static_cast<long>(pred.size())},
              {"energy_J", energy},
              {"pattern", to_string(skill.pattern)},
              {"skill_hash", file_hash(skill_path)},
              {"power_file", pred_rel},
              {"power_hash", file_hash(out_dir + "/" + pred_rel)}};
  write_json(report, out_dir + "/estimate_report.json");
}

void cmd_eval(const Config& cfg, const std::string& collect_dir,
              const std::string& train_dir, const std::string& out_dir) {
  ensure_dir(out_dir);
  const Estimator est(load_checkpoint(train_dir + "/model.json"));
  const json train_report = read_json(train_dir + "/train_report.json");
  const CollectData data = load_collect(collect_dir);
  const SimConfig base = sim_config_from(cfg);
  const std::uint64_t seed = master_seed(cfg);
  const int stride = static_cast<int>(cfg.get_int("eval.stride", 5));

  std::vector<SkillProfile> test_skills;
  std::vector<std::uint64_t> test_seeds;
  for (const json& idx : train_report.at("split").at("test")) {
    const size_t i = idx.get<size_t>();
    if (i >= data.skills.size())
      throw ParseError("eval: test split index out of range of the manifest");
    test_skills.push_back(data.skills[i]);
    test_seeds.push_back(data.sim_seeds[i]);
  }
  if (test_skills.empty()) throw DomainError("eval: empty test split");

  json report{{"format_version", 1},
              {"kind", "uficlab-eval"},
              {"config_hash", cfg.hash()},
              {"seed", seed},
              {"stride", stride},
              {"model_hash", file_hash(train_dir + "/model.json")}};
  report["test"] = summary_json(evaluate_skills(est, base, test_skills, test_seeds, stride));

  const auto transfer_names = split_list(cfg.get_string("eval.transfer", "planar,inclined"));
  const auto tp_names =
      split_list(cfg.get_string("eval.transfer_patterns", "zigzag,random_walk,spiral"));
  std::vector<Pattern> tpatterns;
  for (const std::string& p : tp_names) tpatterns.push_back(pattern_from_string(p));
  const int n_transfer = static_cast<int>(cfg.get_int("eval.transfer_skills", 6));

  json transfer;
  for (size_t si = 0; si < transfer_names.size(); ++si) {
    const SurfaceModel surf = transfer_surface(cfg, base.surface, transfer_names[si]);
    SimConfig tbase = base;
    tbase.surface = surf;

    std::vector<SkillProfile> skills;
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < n_transfer; ++i) {
      const std::uint64_t off = 2000000 + si * 100000 + static_cast<std::uint64_t>(i);
      SkillProfile skill;
      draw_skill(surf, cfg, tpatterns[static_cast<size_t>(i) % tpatterns.size()],
                 derive_seed(seed, seed_tag::kCollect, off),
                 derive_seed(seed, seed_tag::kSkillWalk, off), base.dt, skill);
      skill.surface_id = surf.id;
      skills.push_back(skill);
      seeds.push_back(derive_seed(seed, seed_tag::kCollect, 1000000 + off));
    }
    transfer[transfer_names[si]] =
        summary_json(evaluate_skills(est, tbase, skills, seeds, stride));
  }
  report["transfer"] = transfer;
  write_json(report, out_dir + "/eval_report.json");
}

void cmd_heatmap(const Config& cfg, const std::string& model_path,
                 const std::string& out_dir) {
  ensure_dir(out_dir);
  const Estimator est(load_checkpoint(model_path));
  SurfaceModel surface = SurfaceModel::from_config(cfg);
  surface.validate();
  const HeatMapSpec spec = HeatMapSpec::from_config(cfg);
  const double epsilon = cfg.get_double("tank.epsilon", 0.1);

  const HeatMapGrid grid = build_heatmap(est, surface, spec, epsilon);
  heatmap_to_csv(grid, out_dir + "/heatmap.csv");

  long valid = 0;
  double emin = 0.0, emax = 0.0, esum = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < grid.us.size(); ++i) {
    for (Eigen::Index j = 0; j < grid.vs.size(); ++j) {
      if (!grid.node_valid(i, j)) continue;
      const double e = grid.energy(i, j);
      if (!any) {
        emin = emax = e;
        any = true;
      }
      emin = std::min(emin, e);
      emax = std::max(emax, e);
      esum += e;
      ++valid;
    }
  }
  json report{{"format_version", 1},
              {"kind", "uficlab-heatmap"},
              {"config_hash", cfg.hash()},
              {"seed", spec.seed},
              {"nu", spec.nu},
              {"nv", spec.nv},
              {"pattern", to_string(spec.pattern)},
              {"stride", spec.stride},
              {"epsilon", epsilon},
              {"valid_nodes", valid},
              {"invalid_nodes", static_cast<long>(spec.nu) * spec.nv - valid},
              {"energy_min_J", emin},
              {"energy_max_J", emax},
              {"energy_mean_J", valid > 0 ? esum / static_cast<double>(valid) : 0.0},
              {"heatmap_file", "heatmap.csv"},
              {"heatmap_hash", file_hash(out_dir + "/heatmap.csv")}};
  write_json(report, out_dir + "/heatmap_report.json");
}

void cmd_safety(const Config& cfg, const std::string& model_path,
                const std::string& out_dir) {
  ensure_dir(out_dir);
  const Estimator est(load_checkpoint(model_path));
  SimConfig base = sim_config_from(cfg);
  if (!base.surface.gap)
    throw ConfigError("safety: the surface config needs a gap region");

  if (cfg.get_bool("safety.floor", true)) {
    SurfaceModel floor;
    floor.kind = SurfaceKind::heightfield;
    floor.poly.assign(10, 0.0);
    floor.poly[0] = -cfg.get_double("safety.floor_depth", 0.015);
    floor.mu = base.surface.mu;
    floor.k_n = base.surface.k_n;
    floor.b_n = base.surface.b_n;
    floor.workspace = base.surface.workspace;
    floor.id = "floor";
    floor.validate();
    base.floor = floor;
  }

  PatternSpec ps;
  ps.pattern = pattern_from_string(cfg.get_string("safety.pattern", "line"));
  ps.start_uv = Eigen::Vector2d(cfg.get_double("safety.start_u", -0.2),
                                cfg.get_double("safety.start_v", 0.0));
  ps.heading = cfg.get_double("safety.heading", 0.0);
  ps.speed = cfg.get_double("safety.speed", 0.05);
  ps.length = cfg.get_double("safety.length", 0.4);
  ps.hold_s = cfg.get_double("safety.hold_s", 1.0);
  ps.dt = base.dt;
  ps.f_d = (Vec6() << 0, 0, -cfg.get_double("safety.f_d_z", 5.0), 0, 0, 0).finished();
  ps.seed = derive_seed(master_seed(cfg), seed_tag::kSkillWalk, 42);
  const SkillProfile skill = generate_pattern(base.surface, ps);

  SafetyModes modes;
  modes.scalar_low_E0 = cfg.get_double("safety.scalar_low_E0", modes.scalar_low_E0);
  modes.scalar_low_epsilon =
      cfg.get_double("safety.scalar_low_epsilon", modes.scalar_low_epsilon);
  modes.scalar_high_E0 = cfg.get_double("safety.scalar_high_E0", modes.scalar_high_E0);
  modes.scalar_high_epsilon =
      cfg.get_double("safety.scalar_high_epsilon", modes.scalar_high_epsilon);
  modes.scheduled_epsilon =
      cfg.get_double("safety.scheduled_epsilon", modes.scheduled_epsilon);
  modes.schedule_stride =
      static_cast<int>(cfg.get_int("safety.schedule_stride", modes.schedule_stride));

  const auto results = run_safety_experiment(base, skill, est, modes);

  json modes_json;
  for (const SafetyRunResult& r : results) {
    const std::string trace_rel = "trace_" + r.mode + ".csv";
    trace_to_csv(r.trace, out_dir + "/" + trace_rel, {{"mode", r.mode}});
    modes_json[r.mode] = {
        {"lost_contact", r.lost_contact},
        {"k_loss", static_cast<long>(r.k_loss)},
        {"k_end", static_cast<long>(r.k_end)},
        {"fall_distance_m", r.fall_distance_m},
        {"peak_contact_force_N", r.peak_contact_force_N},
        {"hit_floor", r.hit_floor},
        {"valve_closed", r.valve_closed},
        {"task_energy_J", task_energy(r.trace)},
        {"final_E_tank_J", r.trace.E_tank[r.trace.size() - 1]},
        {"steps", static_cast<long>(r.trace.size())},
        {"stop_reason", r.trace.stop == StopReason::completed ? "completed"
                                                              : "schedule_exhausted"},
        {"trace_file", trace_rel},
        {"trace_hash", file_hash(out_dir + "/" + trace_rel)}};
  }
  json report{{"format_version", 1},
              {"kind", "uficlab-safety"},
              {"config_hash", cfg.hash()},
              {"seed", master_seed(cfg)},
              {"modes", modes_json}};
  write_json(report, out_dir + "/safety_report.json");
}

}  // namespace uficlab
