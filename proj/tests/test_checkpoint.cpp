#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "uficlab/estimator.hpp"

using namespace uficlab;

namespace {

TcnSpec tiny_spec() {
  TcnSpec spec;
  spec.in_channels = 12;
  spec.window = 8;
  spec.kernel = 3;
  spec.filters = 4;
  spec.dilations = {1, 2};
  spec.dropout = 0.0;
  spec.cond_dim = 6;
  spec.decoder_hidden = 8;
  return spec;
}

Checkpoint make_ckpt() {
  Checkpoint ckpt;
  ckpt.spec = tiny_spec();
  const TcnModel model(ckpt.spec);
  ckpt.theta = model.init_params(3);
  ckpt.theta[0] = 1e-300;          // extreme magnitudes must survive the file
  ckpt.theta[1] = -0.1;
  ckpt.theta[2] = 5e-324;
  ckpt.stats.input_mean = VectorXd::LinSpaced(kWindowChannels, -0.3, 0.4);
  ckpt.stats.input_std = VectorXd::LinSpaced(kWindowChannels, 0.5, 1.7);
  ckpt.stats.label_mean = 1.234567890123456;
  ckpt.stats.label_std = 0.777;
  ckpt.seed = 0xDEADBEEFull;
  ckpt.config_hash = "abc123";
  return ckpt;
}

nlohmann::json slurp(const std::string& path) {
  std::ifstream in(path);
  nlohmann::json j;
  in >> j;
  return j;
}

void spit(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

struct TempDir {
  std::filesystem::path dir;
  TempDir() : dir(std::filesystem::temp_directory_path() / "uficlab_ckpt_test") {
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string path(const char* name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("checkpoint round-trips bitwise") {
  TempDir tmp;
  const Checkpoint ckpt = make_ckpt();
  const std::string path = tmp.path("model.json");
  save_checkpoint(ckpt, path);
  const Checkpoint back = load_checkpoint(path);

  CHECK(back.spec.in_channels == ckpt.spec.in_channels);
  CHECK(back.spec.window == ckpt.spec.window);
  CHECK(back.spec.kernel == ckpt.spec.kernel);
  CHECK(back.spec.filters == ckpt.spec.filters);
  CHECK(back.spec.dilations == ckpt.spec.dilations);
  CHECK(back.spec.dropout == ckpt.spec.dropout);
  CHECK(back.spec.cond_dim == ckpt.spec.cond_dim);
  CHECK(back.spec.decoder_hidden == ckpt.spec.decoder_hidden);
  REQUIRE(back.theta.size() == ckpt.theta.size());
  for (Eigen::Index i = 0; i < ckpt.theta.size(); ++i) CHECK(back.theta[i] == ckpt.theta[i]);
  for (int c = 0; c < kWindowChannels; ++c) {
    CHECK(back.stats.input_mean[c] == ckpt.stats.input_mean[c]);
    CHECK(back.stats.input_std[c] == ckpt.stats.input_std[c]);
  }
  CHECK(back.stats.label_mean == ckpt.stats.label_mean);
  CHECK(back.stats.label_std == ckpt.stats.label_std);
  CHECK(back.seed == ckpt.seed);
  CHECK(back.config_hash == ckpt.config_hash);

  // Saving the loaded copy reproduces the file byte for byte.
  const std::string again = tmp.path("model2.json");
  save_checkpoint(back, again);
  std::ifstream a(path, std::ios::binary), b(again, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("saving rejects a mismatched parameter vector") {
  TempDir tmp;
  Checkpoint ckpt = make_ckpt();
  ckpt.theta.conservativeResize(ckpt.theta.size() - 1);
  CHECK_THROWS_AS(save_checkpoint(ckpt, tmp.path("bad.json")), ContractError);
}

TEST_CASE("tampered files are rejected") {
  TempDir tmp;
  const std::string path = tmp.path("model.json");
  save_checkpoint(make_ckpt(), path);
  const nlohmann::json good = slurp(path);
  const std::string bad = tmp.path("tampered.json");

  {
    nlohmann::json j = good;
    j["kind"] = "something-else";
    spit(j, bad);
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  {
    nlohmann::json j = good;
    j["format_version"] = 2;
    spit(j, bad);
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  {
    nlohmann::json j = good;
    j["params"].erase("decoder.fc2.b");
    spit(j, bad);
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  {
    nlohmann::json j = good;
    j["params"]["stray.slice"] = {1.0, 2.0};
    spit(j, bad);
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  {
    nlohmann::json j = good;
    auto& arr = j["params"]["decoder.fc1.b"];
    arr.erase(arr.size() - 1);
    spit(j, bad);
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  {
    nlohmann::json j = good;
    j["norm"]["input_mean"][0] = "oops";
    spit(j, bad);
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  {
    nlohmann::json j = good;
    j["spec"]["kernel"] = 0;
    spit(j, bad);
    CHECK_THROWS_AS(load_checkpoint(bad), ConfigError);
  }
  {
    std::ofstream out(bad);
    out << "{ not json\n";
    out.close();
    CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
  }
  CHECK_THROWS_AS(load_checkpoint(tmp.path("missing.json")), ParseError);
}

TEST_CASE("estimator validates its checkpoint") {
  Checkpoint ckpt = make_ckpt();
  Checkpoint short_theta = ckpt;
  short_theta.theta.conservativeResize(short_theta.theta.size() - 2);
  CHECK_THROWS_AS(Estimator{short_theta}, ContractError);
  Checkpoint bad_stats = ckpt;
  bad_stats.stats.input_mean = VectorXd::Zero(3);
  CHECK_THROWS_AS(Estimator{bad_stats}, ContractError);
}

TEST_CASE("a zeroed output layer predicts a constant power") {
  // Zeroing just the decoder output weights pins the normalized output at the
  // output bias 0, so predicted power is exp(label_mean) - 3 everywhere.
  Checkpoint ckpt = make_ckpt();
  const TcnModel layout_model(ckpt.spec);
  const ParamSlice& w2 = layout_model.slice("decoder.fc2.w");
  const ParamSlice& b2 = layout_model.slice("decoder.fc2.b");
  ckpt.theta.segment(w2.offset, w2.size()).setZero();
  ckpt.theta.segment(b2.offset, b2.size()).setZero();
  ckpt.stats.input_mean.setZero();
  ckpt.stats.input_std.setOnes();
  ckpt.stats.label_mean = std::log(8.0);
  ckpt.stats.label_std = 1.0;
  const Estimator est{ckpt};

  SurfaceModel planar;
  PatternSpec spec;
  spec.pattern = Pattern::line;
  spec.start_uv = Eigen::Vector2d(-0.1, 0.0);
  spec.speed = 0.05;
  spec.length = 0.02;
  const SkillProfile skill = generate_pattern(planar, spec);

  const PowerTrace out = predict_power(est, skill, 7);
  REQUIRE(out.size() >= 2);
  CHECK(out.t[out.size() - 1] == skill.t[skill.size() - 1]);  // last step kept
  for (Eigen::Index i = 0; i < out.size(); ++i)
    CHECK(out.power[i] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(predict_power(est, skill, 0), DomainError);

  PowerTrace tr;
  tr.t = (VectorXd(3) << 0, 1, 2).finished();
  tr.power = (VectorXd(3) << 1, 2, 3).finished();
  CHECK(integrate_energy(tr, 0.1) == doctest::Approx(4.1).epsilon(1e-14));
  CHECK_THROWS_AS(integrate_energy(PowerTrace{}, 0.1), DomainError);
}
