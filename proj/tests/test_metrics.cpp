#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "uficlab/metrics.hpp"

using namespace uficlab;

static PowerTrace make_trace(std::initializer_list<double> t,
                             std::initializer_list<double> p) {
  PowerTrace tr;
  tr.t.resize(static_cast<Eigen::Index>(t.size()));
  tr.power.resize(static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double v : t) tr.t[i++] = v;
  i = 0;
  for (double v : p) tr.power[i++] = v;
  return tr;
}

TEST_CASE("metrics on a hand-computed pair") {
  const PowerTrace truth = make_trace({0, 1, 2}, {1, 2, 3});
  const PowerTrace pred = make_trace({0, 1, 2}, {2, 3, 4});
  const TrajectoryMetrics m = compute_metrics(truth, pred);
  CHECK(m.mse == doctest::Approx(1.0).epsilon(1e-14));
  // Denominator floor max(1e-3, 5% of peak 3) = 0.15 never engages here.
  CHECK(m.mape_pct == doctest::Approx(100.0 * (1.0 + 0.5 + 1.0 / 3.0) / 3.0).epsilon(1e-12));
  CHECK(m.energy_true_J == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(m.energy_pred_J == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(m.mape_sum_pct == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(m.pearson == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("percentage denominator floors at five percent of the peak") {
  const PowerTrace truth = make_trace({0, 1}, {0, 10});
  const PowerTrace pred = make_trace({0, 1}, {1, 10});
  const TrajectoryMetrics m = compute_metrics(truth, pred);
  // |1-0| / max(0, 0.5) = 2, second step exact: mean 1 -> 100%.
  CHECK(m.mape_pct == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("misaligned traces are rejected") {
  const PowerTrace truth = make_trace({0, 1, 2}, {1, 2, 3});
  CHECK_THROWS_AS(compute_metrics(truth, make_trace({0, 1}, {1, 2})), ContractError);
  CHECK_THROWS_AS(compute_metrics(truth, make_trace({0, 1, 2.5}, {1, 2, 3})),
                  ContractError);
  CHECK_THROWS_AS(compute_metrics(make_trace({}, {}), make_trace({}, {})),
                  ContractError);
}

TEST_CASE("non-positive measured energy is rejected") {
  const PowerTrace zero = make_trace({0, 1, 2}, {0, 0, 0});
  CHECK_THROWS_AS(compute_metrics(zero, zero), DomainError);
}

TEST_CASE("pearson endpoints and degenerate inputs") {
  VectorXd a = (VectorXd(4) << 1, 2, 3, 4).finished();
  CHECK(pearson_correlation(a, 2.0 * a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson_correlation(a, -a) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(pearson_correlation(a, VectorXd::Constant(4, 7.0)) == 0.0);
  CHECK_THROWS_AS(pearson_correlation(a, VectorXd::Zero(3)), ContractError);
}

TEST_CASE("stride schedule always ends on the last step") {
  CHECK(stride_steps(10, 3) == std::vector<Eigen::Index>{0, 3, 6, 9});
  CHECK(stride_steps(10, 4) == std::vector<Eigen::Index>{0, 4, 8, 9});
  CHECK(stride_steps(1, 5) == std::vector<Eigen::Index>{0});
  CHECK(stride_steps(5, 1) == std::vector<Eigen::Index>{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(stride_steps(0, 1), DomainError);
  CHECK_THROWS_AS(stride_steps(5, 0), DomainError);
}

TEST_CASE("subsampling keeps values and validates indices") {
  const PowerTrace tr = make_trace({0, 0.1, 0.2, 0.3}, {5, 6, 7, 8});
  const PowerTrace out = subsample_trace(tr, {0, 2, 3});
  REQUIRE(out.size() == 3);
  CHECK(out.t[1] == 0.2);
  CHECK(out.power[1] == 7.0);
  CHECK(out.power[2] == 8.0);
  CHECK_THROWS_AS(subsample_trace(tr, {4}), DomainError);
  CHECK_THROWS_AS(subsample_trace(tr, {-1}), DomainError);
}

TEST_CASE("reference energy is friction force times path length") {
  SurfaceModel planar;
  PatternSpec spec;
  spec.pattern = Pattern::line;
  spec.start_uv = Eigen::Vector2d(-0.15, 0.0);
  spec.speed = 0.05;
  spec.length = 0.3;
  spec.f_d = (Vec6() << 0, 0, -5, 0, 0, 0).finished();
  const SkillProfile skill = generate_pattern(planar, spec);
  // 0.4 * 5 N * 0.3 m of sliding.
  CHECK(expert_energy(skill, 0.4) == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(expert_energy(skill, 0.8) == doctest::Approx(1.2).epsilon(1e-6));
  CHECK_THROWS_AS(expert_energy(SkillProfile{}, 0.4), DomainError);
}

TEST_CASE("aggregate uses the population variance") {
  const Aggregate a = aggregate({1.0, 2.0, 3.0, 4.0});
  CHECK(a.count == 4);
  CHECK(a.mean == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(a.std == doctest::Approx(std::sqrt(1.25)).epsilon(1e-12));
  const Aggregate single = aggregate({5.0});
  CHECK(single.count == 1);
  CHECK(single.mean == 5.0);
  CHECK(single.std == 0.0);
  const Aggregate empty = aggregate({});
  CHECK(empty.count == 0);
  CHECK(empty.mean == 0.0);
}
