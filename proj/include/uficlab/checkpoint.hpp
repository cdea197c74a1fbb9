#pragma once

#include <string>

#include "uficlab/dataset.hpp"
#include "uficlab/nn.hpp"

namespace uficlab {

/// Everything needed to run inference: architecture, normalization moments,
/// and the flat parameter vector, stored as versioned JSON with doubles
/// round-trip exact and parameters keyed by slice name.
struct Checkpoint {
  TcnSpec spec;
  NormStats stats;
  VectorXd theta;
  std::uint64_t seed = 0;
  std::string config_hash;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

/// Validates version, slice names and sizes; throws ParseError or ConfigError.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace uficlab
