#include "uficlab/heatmap.hpp"

#include <cmath>

#include "uficlab/csv.hpp"
#include "uficlab/rng.hpp"

namespace uficlab {

HeatMapSpec HeatMapSpec::from_config(const Config& cfg, const std::string& prefix) {
  HeatMapSpec s;
  s.nu = static_cast<int>(cfg.get_int(prefix + "nu", s.nu));
  s.nv = static_cast<int>(cfg.get_int(prefix + "nv", s.nv));
  s.u_min = cfg.get_double(prefix + "u_min", s.u_min);
  s.u_max = cfg.get_double(prefix + "u_max", s.u_max);
  s.v_min = cfg.get_double(prefix + "v_min", s.v_min);
  s.v_max = cfg.get_double(prefix + "v_max", s.v_max);
  if (cfg.has(prefix + "pattern"))
    s.pattern = pattern_from_string(cfg.get_string(prefix + "pattern"));
  s.speed = cfg.get_double(prefix + "speed", s.speed);
  s.length = cfg.get_double(prefix + "length", s.length);
  s.heading = cfg.get_double(prefix + "heading", s.heading);
  if (cfg.has(prefix + "f_d")) s.f_d = cfg.get_vec6(prefix + "f_d");
  s.stride = static_cast<int>(cfg.get_int(prefix + "stride", s.stride));
  s.seed = static_cast<std::uint64_t>(cfg.get_int(prefix + "seed", 1));
  if (s.nu < 2 || s.nv < 2) throw ConfigError("heatmap: grid needs at least 2x2 nodes");
  if (!(s.u_max > s.u_min) || !(s.v_max > s.v_min))
    throw ConfigError("heatmap: empty coordinate range");
  if (s.stride < 1) throw ConfigError("heatmap: stride must be positive");
  return s;
}

HeatMapGrid build_heatmap(const Estimator& est, const SurfaceModel& surface,
                          const HeatMapSpec& spec, double epsilon) {
  HeatMapGrid grid;
  grid.us.resize(spec.nu);
  grid.vs.resize(spec.nv);
  const double du = (spec.u_max - spec.u_min) / (spec.nu - 1);
  const double dv = (spec.v_max - spec.v_min) / (spec.nv - 1);
  for (int i = 0; i < spec.nu; ++i) grid.us[i] = spec.u_min + i * du;
  for (int j = 0; j < spec.nv; ++j) grid.vs[j] = spec.v_min + j * dv;
  grid.energy = MatRM::Zero(spec.nu, spec.nv);
  grid.valid.assign(static_cast<size_t>(spec.nu) * spec.nv, 0);
  grid.surface_id = surface.id;
  grid.pattern = to_string(spec.pattern);
  grid.epsilon = epsilon;

  PatternSpec ps;
  ps.pattern = spec.pattern;
  ps.speed = spec.speed;
  ps.length = spec.length;
  ps.heading = spec.heading;
  ps.f_d = spec.f_d;

  for (int i = 0; i < spec.nu; ++i) {
    for (int j = 0; j < spec.nv; ++j) {
      ps.start_uv = Eigen::Vector2d(grid.us[i], grid.vs[j]);
      ps.seed = derive_seed(spec.seed, seed_tag::kSkillWalk,
                            static_cast<std::uint64_t>(i) * spec.nv + j);
      SkillProfile skill;
      try {
        skill = generate_pattern(surface, ps);
      } catch (const DomainError&) {
        continue;  // start outside the workspace: node stays invalid
      }
      if (skill.truncated) continue;
      const PowerTrace pred = predict_power(est, skill, spec.stride);
      grid.energy(i, j) = integrate_energy(pred, epsilon);
      grid.valid[static_cast<size_t>(i) * spec.nv + j] = 1;
    }
  }
  return grid;
}

namespace {

// Interval index and weight; weight is exactly 0 or 1 at node coordinates.
std::pair<Eigen::Index, double> locate(const VectorXd& xs, double x, const char* axis) {
  const Eigen::Index n = xs.size();
  if (x < xs[0] || x > xs[n - 1])
    throw DomainError(std::string("query_heatmap: ") + axis + " outside the grid");
  Eigen::Index i = 0;
  while (i + 2 < n && x >= xs[i + 1]) ++i;
  const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return {i, w};
}

}  // namespace

double query_heatmap(const HeatMapGrid& grid, double u, double v) {
  const auto [i, wu] = locate(grid.us, u, "u");
  const auto [j, wv] = locate(grid.vs, v, "v");
  const double w00 = (1.0 - wu) * (1.0 - wv);
  const double w01 = (1.0 - wu) * wv;
  const double w10 = wu * (1.0 - wv);
  const double w11 = wu * wv;
  auto need = [&](Eigen::Index a, Eigen::Index b, double w) {
    if (w != 0.0 && !grid.node_valid(a, b))
      throw DomainError("query_heatmap: interpolation touches an invalid node");
  };
  need(i, j, w00);
  need(i, j + 1, w01);
  need(i + 1, j, w10);
  need(i + 1, j + 1, w11);
  double val = 0.0;
  if (w00 != 0.0) val += w00 * grid.energy(i, j);
  if (w01 != 0.0) val += w01 * grid.energy(i, j + 1);
  if (w10 != 0.0) val += w10 * grid.energy(i + 1, j);
  if (w11 != 0.0) val += w11 * grid.energy(i + 1, j + 1);
  return val;
}

void heatmap_to_csv(const HeatMapGrid& grid, const std::string& path) {
  CsvTable tbl;
  tbl.columns = {"u", "v", "energy_J", "valid"};
  tbl.metadata["nu"] = std::to_string(grid.us.size());
  tbl.metadata["nv"] = std::to_string(grid.vs.size());
  tbl.metadata["surface_id"] = grid.surface_id;
  tbl.metadata["pattern"] = grid.pattern;
  tbl.metadata["epsilon"] = double_to_string(grid.epsilon);
  const Eigen::Index nu = grid.us.size(), nv = grid.vs.size();
  tbl.data.resize(nu * nv, 4);
  for (Eigen::Index i = 0; i < nu; ++i) {
    for (Eigen::Index j = 0; j < nv; ++j) {
      const Eigen::Index r = i * nv + j;
      tbl.data(r, 0) = grid.us[i];
      tbl.data(r, 1) = grid.vs[j];
      tbl.data(r, 2) = grid.energy(i, j);
      tbl.data(r, 3) = grid.node_valid(i, j) ? 1.0 : 0.0;
    }
  }
  tbl.write(path);
}

HeatMapGrid csv_to_heatmap(const std::string& path) {
  CsvTable tbl = CsvTable::read(path);
  const std::vector<std::string> want{"u", "v", "energy_J", "valid"};
  if (tbl.columns != want)
    throw ParseError("heatmap csv " + path + ": unexpected column layout");
  auto meta_int = [&](const std::string& key) {
    auto it = tbl.metadata.find(key);
    if (it == tbl.metadata.end())
      throw ParseError("heatmap csv " + path + ": missing metadata " + key);
    return static_cast<Eigen::Index>(std::stol(it->second));
  };
  HeatMapGrid grid;
  const Eigen::Index nu = meta_int("nu"), nv = meta_int("nv");
  if (nu < 2 || nv < 2 || tbl.rows() != nu * nv)
    throw ParseError("heatmap csv " + path + ": row count does not match the grid");
  grid.us.resize(nu);
  grid.vs.resize(nv);
  grid.energy = MatRM::Zero(nu, nv);
  grid.valid.assign(static_cast<size_t>(nu * nv), 0);
  for (Eigen::Index i = 0; i < nu; ++i) {
    for (Eigen::Index j = 0; j < nv; ++j) {
      const Eigen::Index r = i * nv + j;
      grid.us[i] = tbl.data(r, 0);
      grid.vs[j] = tbl.data(r, 1);
      grid.energy(i, j) = tbl.data(r, 2);
      grid.valid[static_cast<size_t>(r)] = tbl.data(r, 3) != 0.0 ? 1 : 0;
    }
  }
  if (auto it = tbl.metadata.find("surface_id"); it != tbl.metadata.end())
    grid.surface_id = it->second;
  if (auto it = tbl.metadata.find("pattern"); it != tbl.metadata.end())
    grid.pattern = it->second;
  if (auto it = tbl.metadata.find("epsilon"); it != tbl.metadata.end())
    grid.epsilon = string_to_double(it->second);
  return grid;
}

}  // namespace uficlab
