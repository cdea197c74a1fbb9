#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "uficlab/heatmap.hpp"

using namespace uficlab;

namespace {

HeatMapGrid hand_grid() {
  HeatMapGrid g;
  g.us = (VectorXd(2) << 0.0, 1.0).finished();
  g.vs = (VectorXd(2) << 0.0, 1.0).finished();
  g.energy = MatRM::Zero(2, 2);
  g.energy << 1.0, 2.0, 3.0, 4.0;  // row index moves along u
  g.valid.assign(4, 1);
  g.surface_id = "hand";
  g.pattern = "line";
  g.epsilon = 0.1;
  return g;
}

Estimator constant_estimator(double power_w) {
  Checkpoint ckpt;
  ckpt.spec.in_channels = 12;
  ckpt.spec.window = 8;
  ckpt.spec.kernel = 3;
  ckpt.spec.filters = 4;
  ckpt.spec.dilations = {1, 2};
  ckpt.spec.dropout = 0.0;
  ckpt.spec.cond_dim = 6;
  ckpt.spec.decoder_hidden = 8;
  const TcnModel model(ckpt.spec);
  ckpt.theta = model.init_params(5);
  const ParamSlice& w2 = model.slice("decoder.fc2.w");
  ckpt.theta.segment(w2.offset, w2.size()).setZero();
  ckpt.stats.input_mean = VectorXd::Zero(kWindowChannels);
  ckpt.stats.input_std = VectorXd::Ones(kWindowChannels);
  ckpt.stats.label_mean = std::log(power_w + 3.0);
  ckpt.stats.label_std = 1.0;
  return Estimator{ckpt};
}

}  // namespace

TEST_CASE("bilinear interpolation on a hand grid") {
  const HeatMapGrid g = hand_grid();
  CHECK(query_heatmap(g, 0.0, 0.0) == 1.0);  // node values come back bitwise
  CHECK(query_heatmap(g, 1.0, 0.0) == 3.0);
  CHECK(query_heatmap(g, 0.0, 1.0) == 2.0);
  CHECK(query_heatmap(g, 1.0, 1.0) == 4.0);
  CHECK(query_heatmap(g, 0.25, 0.0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(query_heatmap(g, 0.0, 0.25) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(query_heatmap(g, 0.5, 0.5) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK_THROWS_AS(query_heatmap(g, -0.01, 0.5), DomainError);
  CHECK_THROWS_AS(query_heatmap(g, 0.5, 1.01), DomainError);
}

TEST_CASE("only corners with nonzero weight must be valid") {
  HeatMapGrid g = hand_grid();
  g.valid[3] = 0;  // node (1,1)
  CHECK_THROWS_AS(query_heatmap(g, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(query_heatmap(g, 1.0, 0.5), DomainError);
  // Queries whose weights never touch (1,1) still answer.
  CHECK(query_heatmap(g, 0.0, 0.5) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(query_heatmap(g, 0.5, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(query_heatmap(g, 1.0, 0.0) == 3.0);
}

TEST_CASE("constant predictor fills a uniform map") {
  const Estimator est = constant_estimator(5.0);
  SurfaceModel planar;
  HeatMapSpec spec;
  spec.nu = 3;
  spec.nv = 3;
  spec.u_min = -0.1;
  spec.u_max = 0.1;
  spec.v_min = -0.1;
  spec.v_max = 0.1;
  spec.length = 0.05;
  spec.speed = 0.05;
  spec.stride = 5;
  const HeatMapGrid g = build_heatmap(est, planar, spec, 0.1);
  REQUIRE(g.us.size() == 3);
  REQUIRE(g.vs.size() == 3);
  CHECK(g.us[0] == -0.1);
  CHECK(g.us[2] == doctest::Approx(0.1).epsilon(1e-15));
  // 5 W over a 1 s skill plus the 0.1 J reserve.
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(g.node_valid(i, j));
      CHECK(g.energy(i, j) == doctest::Approx(5.1).epsilon(1e-10));
    }
  // Identical inputs give bit-identical node energies.
  CHECK(g.energy.minCoeff() == g.energy.maxCoeff());
  // Node coordinates come back exactly from queries.
  CHECK(query_heatmap(g, g.us[1], g.vs[2]) == g.energy(1, 2));
}

TEST_CASE("nodes whose skill leaves the workspace are invalid") {
  const Estimator est = constant_estimator(5.0);
  SurfaceModel planar;  // workspace is |u|,|v| <= 0.5
  HeatMapSpec spec;
  spec.nu = 3;
  spec.nv = 2;
  spec.u_min = 0.3;
  spec.u_max = 0.7;  // last u row sits outside the workspace
  spec.v_min = -0.1;
  spec.v_max = 0.1;
  spec.length = 0.05;  // heading 0: skill extends +u, truncating the 0.5 row
  spec.speed = 0.05;
  spec.stride = 5;
  const HeatMapGrid g = build_heatmap(est, planar, spec, 0.1);
  CHECK(g.node_valid(0, 0));      // u = 0.3
  CHECK(!g.node_valid(1, 0));     // u = 0.5: path runs off the edge
  CHECK(!g.node_valid(2, 0));     // u = 0.7: start outside
  CHECK(g.energy(2, 0) == 0.0);
  CHECK(query_heatmap(g, 0.3, 0.0) == g.energy(0, 0));
  CHECK_THROWS_AS(query_heatmap(g, 0.45, 0.0), DomainError);
}

TEST_CASE("grid csv round-trips bitwise") {
  HeatMapGrid g = hand_grid();
  g.us[1] = 0.30000000000000004;  // awkward binary fractions must survive
  g.energy(0, 1) = 1e-300;
  g.valid[2] = 0;
  const std::string path = "/tmp/uficlab_test_heatmap.csv";
  heatmap_to_csv(g, path);
  const HeatMapGrid back = csv_to_heatmap(path);
  REQUIRE(back.us.size() == 2);
  REQUIRE(back.vs.size() == 2);
  CHECK(back.us[1] == g.us[1]);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) CHECK(back.energy(i, j) == g.energy(i, j));
  CHECK(back.valid == g.valid);
  CHECK(back.surface_id == "hand");
  CHECK(back.pattern == "line");
  CHECK(back.epsilon == 0.1);
  std::filesystem::remove(path);
}

TEST_CASE("config parsing validates the grid") {
  Config cfg;
  cfg.set("heatmap.nu", "4");
  cfg.set("heatmap.nv", "5");
  cfg.set("heatmap.u_min", "-0.2");
  cfg.set("heatmap.u_max", "0.2");
  cfg.set("heatmap.pattern", "spiral");
  cfg.set("heatmap.stride", "3");
  const HeatMapSpec s = HeatMapSpec::from_config(cfg);
  CHECK(s.nu == 4);
  CHECK(s.nv == 5);
  CHECK(s.pattern == Pattern::spiral);
  CHECK(s.stride == 3);

  Config bad1;
  bad1.set("heatmap.nu", "1");
  CHECK_THROWS_AS(HeatMapSpec::from_config(bad1), ConfigError);
  Config bad2;
  bad2.set("heatmap.u_min", "0.5");
  bad2.set("heatmap.u_max", "0.5");
  CHECK_THROWS_AS(HeatMapSpec::from_config(bad2), ConfigError);
  Config bad3;
  bad3.set("heatmap.stride", "0");
  CHECK_THROWS_AS(HeatMapSpec::from_config(bad3), ConfigError);
}
