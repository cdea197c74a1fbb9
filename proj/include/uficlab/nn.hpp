#pragma once

#include <random>
#include <string>
#include <vector>

#include "uficlab/config.hpp"
#include "uficlab/types.hpp"

namespace uficlab {

/// Temporal convolutional network over a fixed-length input window, with a
/// conditioning vector appended at the readout. Each residual block applies
/// two weight-normalized dilated causal convolutions (ReLU + dropout after
/// each); the skip path uses a 1x1 projection when channel counts differ.
/// The decoder maps the last timestep's features, concatenated with the
/// conditioning vector, through one hidden layer to a scalar.
struct TcnSpec {
  int in_channels = 12;
  int window = 100;
  int input_stride = 1;  // trajectory steps between adjacent window columns
  int kernel = 4;
  int filters = 64;
  std::vector<int> dilations = {1, 2, 4};  // one residual block per entry
  double dropout = 0.05;
  int cond_dim = 6;
  int decoder_hidden = 64;

  static TcnSpec from_config(const Config& cfg, const std::string& prefix = "model.");
  void validate() const;  // throws ConfigError
  int receptive_field() const;
};

/// Named view into the flat parameter vector. size() == rows * cols; vectors
/// have cols == 1. Matrices are row-major.
struct ParamSlice {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 1;
  Eigen::Index size() const { return rows * cols; }
};

/// Per-window scratch and cached activations; reuse one instance per worker.
/// Only the readout cone of each layer is computed: the column ranges that
/// can influence the final timestep. Buffers are sized on first use.
struct TcnWorkspace {
  struct BlockCache {
    MatRM Za, maskA, Da;   // first conv: preact, dropout mask, post-dropout
    MatRM Zb, maskB;       // second conv
    MatRM out;             // block output after the residual ReLU
    MatRM dIn;             // gradient scratch for the block input
  };
  MatRM x;                 // input cone slice
  std::vector<BlockCache> blocks;
  VectorXd cond;
  VectorXd h1pre, h1;
  bool ready = false;
  bool train = false;
};

class TcnModel {
 public:
  explicit TcnModel(const TcnSpec& spec);

  const TcnSpec& spec() const { return spec_; }
  Eigen::Index num_params() const { return num_params_; }
  const std::vector<ParamSlice>& layout() const { return layout_; }
  const ParamSlice& slice(const std::string& name) const;  // throws ConfigError

  /// He-normal directions, gains set to the direction norms (so the effective
  /// weights start at the raw draws), zero biases.
  VectorXd init_params(std::uint64_t seed) const;

  /// One window: X is in_channels x window, cond is cond_dim. With train set,
  /// dropout masks are drawn from rng (required) and kept for backward;
  /// otherwise masks are identity. Returns the scalar output.
  double forward(const VectorXd& theta, const MatRM& X, const VectorXd& cond,
                 TcnWorkspace& ws, bool train = false,
                 std::mt19937_64* rng = nullptr) const;

  /// Accumulates d(output scale dy)/d(theta) into grad using the activations
  /// cached by the matching forward call. grad must have num_params() entries.
  void backward(const VectorXd& theta, TcnWorkspace& ws, double dy,
                VectorXd& grad) const;

 private:
  struct ConvDef {
    int in_ch = 0, out_ch = 0, dilation = 1;
    int t0_in = 0, t0_out = 0;  // first window timestep of the in/out buffers
    Eigen::Index v = 0, g = 0, b = 0;  // layout indices
  };
  struct BlockDef {
    ConvDef a, b;
    bool has_proj = false;
    Eigen::Index proj_w = 0, proj_b = 0;
    int t0_in = 0, t0_out = 0;
  };

  Eigen::Index add_slice(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  void conv_forward(const ConvDef& cd, const VectorXd& theta, const MatRM& in,
                    MatRM& preact) const;
  void conv_backward(const ConvDef& cd, const VectorXd& theta, const MatRM& in,
                     const MatRM& dOut, MatRM& dIn, VectorXd& grad) const;

  TcnSpec spec_;
  std::vector<ParamSlice> layout_;
  std::vector<BlockDef> blocks_;
  Eigen::Index fc1_w_ = 0, fc1_b_ = 0, fc2_w_ = 0, fc2_b_ = 0;
  Eigen::Index num_params_ = 0;
};

}  // namespace uficlab
