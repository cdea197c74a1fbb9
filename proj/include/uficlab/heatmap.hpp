#pragma once

#include <string>
#include <vector>

#include "uficlab/estimator.hpp"
#include "uficlab/skills.hpp"

namespace uficlab {

/// Per-node predicted task energy over a (u, v) grid of skill start points.
/// Nodes whose skill leaves the workspace are marked invalid.
struct HeatMapGrid {
  VectorXd us, vs;                // node coordinates, ascending
  MatRM energy;                   // us.size() x vs.size(), J
  std::vector<std::uint8_t> valid;  // row-major, 1 = usable
  std::string surface_id;
  std::string pattern;
  double epsilon = 0.1;

  bool node_valid(Eigen::Index i, Eigen::Index j) const {
    return valid[static_cast<size_t>(i * vs.size() + j)] != 0;
  }
};

struct HeatMapSpec {
  int nu = 20, nv = 20;
  double u_min = -0.4, u_max = 0.4;
  double v_min = -0.4, v_max = 0.4;
  Pattern pattern = Pattern::line;
  double speed = 0.05;   // m/s
  double length = 0.3;   // m
  double heading = 0.0;  // rad
  Vec6 f_d = (Vec6() << 0, 0, -5, 0, 0, 0).finished();
  int stride = 10;       // prediction stride along each skill
  std::uint64_t seed = 1;

  static HeatMapSpec from_config(const Config& cfg, const std::string& prefix = "heatmap.");
};

/// Runs the same skill template from every grid node and integrates the
/// predicted power plus the tank reserve epsilon.
HeatMapGrid build_heatmap(const Estimator& est, const SurfaceModel& surface,
                          const HeatMapSpec& spec, double epsilon);

/// Bilinear interpolation; exact at node coordinates. Throws DomainError
/// outside the grid hull or when any nonzero-weight corner is invalid.
double query_heatmap(const HeatMapGrid& grid, double u, double v);

void heatmap_to_csv(const HeatMapGrid& grid, const std::string& path);
HeatMapGrid csv_to_heatmap(const std::string& path);

}  // namespace uficlab
