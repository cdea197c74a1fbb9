#include "uficlab/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace uficlab {

namespace {

constexpr int kFormatVersion = 1;

nlohmann::json vec_to_json(const VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

VectorXd json_to_vec(const nlohmann::json& a, const std::string& what) {
  if (!a.is_array()) throw ParseError("checkpoint: " + what + " must be an array");
  VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw ParseError("checkpoint: " + what + " holds a non-number");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const TcnModel model(ckpt.spec);
  if (ckpt.theta.size() != model.num_params())
    throw ContractError("save_checkpoint: parameter vector does not match the spec");

  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "uficlab-model";
  j["seed"] = ckpt.seed;
  j["config_hash"] = ckpt.config_hash;
  j["spec"] = {{"in_channels", ckpt.spec.in_channels},
               {"window", ckpt.spec.window},
               {"input_stride", ckpt.spec.input_stride},
               {"kernel", ckpt.spec.kernel},
               {"filters", ckpt.spec.filters},
               {"dilations", ckpt.spec.dilations},
               {"dropout", ckpt.spec.dropout},
               {"cond_dim", ckpt.spec.cond_dim},
               {"decoder_hidden", ckpt.spec.decoder_hidden}};
  j["norm"] = {{"input_mean", vec_to_json(ckpt.stats.input_mean)},
               {"input_std", vec_to_json(ckpt.stats.input_std)},
               {"label_mean", ckpt.stats.label_mean},
               {"label_std", ckpt.stats.label_std}};
  nlohmann::json params;
  for (const ParamSlice& s : model.layout())
    params[s.name] = vec_to_json(ckpt.theta.segment(s.offset, s.size()));
  j["params"] = std::move(params);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("save_checkpoint: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw ParseError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_checkpoint: " + path + ": " + e.what());
  }

  if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
    throw ParseError("load_checkpoint: unsupported format version in " + path);
  if (j.value("kind", std::string()) != "uficlab-model")
    throw ParseError("load_checkpoint: " + path + " is not a model file");

  Checkpoint ckpt;
  const auto& spec = j.at("spec");
  ckpt.spec.in_channels = spec.at("in_channels").get<int>();
  ckpt.spec.window = spec.at("window").get<int>();
  ckpt.spec.input_stride = spec.value("input_stride", 1);  // absent in old files
  ckpt.spec.kernel = spec.at("kernel").get<int>();
  ckpt.spec.filters = spec.at("filters").get<int>();
  ckpt.spec.dilations = spec.at("dilations").get<std::vector<int>>();
  ckpt.spec.dropout = spec.at("dropout").get<double>();
  ckpt.spec.cond_dim = spec.at("cond_dim").get<int>();
  ckpt.spec.decoder_hidden = spec.at("decoder_hidden").get<int>();
  ckpt.spec.validate();

  const auto& norm = j.at("norm");
  ckpt.stats.input_mean = json_to_vec(norm.at("input_mean"), "input_mean");
  ckpt.stats.input_std = json_to_vec(norm.at("input_std"), "input_std");
  ckpt.stats.label_mean = norm.at("label_mean").get<double>();
  ckpt.stats.label_std = norm.at("label_std").get<double>();

  ckpt.seed = j.value("seed", std::uint64_t{0});
  ckpt.config_hash = j.value("config_hash", std::string());

  const TcnModel model(ckpt.spec);
  ckpt.theta = VectorXd::Zero(model.num_params());
  const auto& params = j.at("params");
  size_t seen = 0;
  for (const ParamSlice& s : model.layout()) {
    if (!params.contains(s.name))
      throw ParseError("load_checkpoint: missing parameter slice " + s.name);
    VectorXd v = json_to_vec(params.at(s.name), s.name);
    if (v.size() != s.size())
      throw ParseError("load_checkpoint: size mismatch for slice " + s.name);
    ckpt.theta.segment(s.offset, s.size()) = v;
    ++seen;
  }
  if (seen != params.size())
    throw ParseError("load_checkpoint: " + path + " holds unknown parameter slices");
  return ckpt;
}

}  // namespace uficlab
