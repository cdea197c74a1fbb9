#include "uficlab/nn.hpp"

#include <cmath>

namespace uficlab {

namespace {

using ConstMat = Eigen::Map<const MatRM>;
using ConstVec = Eigen::Map<const VectorXd>;
using MutMat = Eigen::Map<MatRM>;
using MutVec = Eigen::Map<VectorXd>;

ConstMat mat_view(const VectorXd& theta, const ParamSlice& s) {
  return ConstMat(theta.data() + s.offset, s.rows, s.cols);
}
ConstVec vec_view(const VectorXd& theta, const ParamSlice& s) {
  return ConstVec(theta.data() + s.offset, s.size());
}
MutMat mat_view(VectorXd& theta, const ParamSlice& s) {
  return MutMat(theta.data() + s.offset, s.rows, s.cols);
}
MutVec vec_view(VectorXd& theta, const ParamSlice& s) {
  return MutVec(theta.data() + s.offset, s.size());
}

/// Effective conv weights from direction rows and per-filter gains.
MatRM effective_weights(ConstMat v, ConstVec g) {
  MatRM w(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double n = v.row(i).norm();
    w.row(i) = (g[i] / n) * v.row(i);
  }
  return w;
}

/// Columns of the dilated causal tap matrix: column c holds the k taps for
/// output time t0_out + c, tap j reading input time t - j*d (zeros before 0).
MatRM im2col(const MatRM& in, int t0_in, int t0_out, int n_out, int in_ch,
             int kernel, int dilation) {
  MatRM cols = MatRM::Zero(static_cast<Eigen::Index>(in_ch) * kernel, n_out);
  for (int j = 0; j < kernel; ++j) {
    for (int c = 0; c < n_out; ++c) {
      const int tt = t0_out + c - j * dilation;
      if (tt < 0) continue;
      cols.block(static_cast<Eigen::Index>(j) * in_ch, c, in_ch, 1) =
          in.col(tt - t0_in);
    }
  }
  return cols;
}

void fill_dropout_mask(MatRM& mask, double p, bool train, std::mt19937_64* rng) {
  if (!train || p <= 0.0) {
    mask.setOnes();
    return;
  }
  if (rng == nullptr)
    throw ContractError("tcn forward: training mode needs a dropout rng");
  const double scale = 1.0 / (1.0 - p);
  std::bernoulli_distribution drop(p);
  for (Eigen::Index r = 0; r < mask.rows(); ++r)
    for (Eigen::Index c = 0; c < mask.cols(); ++c)
      mask(r, c) = drop(*rng) ? 0.0 : scale;
}

}  // namespace

TcnSpec TcnSpec::from_config(const Config& cfg, const std::string& prefix) {
  TcnSpec s;
  s.in_channels = static_cast<int>(cfg.get_int(prefix + "in_channels", s.in_channels));
  s.window = static_cast<int>(cfg.get_int(prefix + "window", s.window));
  s.input_stride =
      static_cast<int>(cfg.get_int(prefix + "input_stride", s.input_stride));
  s.kernel = static_cast<int>(cfg.get_int(prefix + "kernel", s.kernel));
  s.filters = static_cast<int>(cfg.get_int(prefix + "filters", s.filters));
  s.dropout = cfg.get_double(prefix + "dropout", s.dropout);
  s.cond_dim = static_cast<int>(cfg.get_int(prefix + "cond_dim", s.cond_dim));
  s.decoder_hidden =
      static_cast<int>(cfg.get_int(prefix + "decoder_hidden", s.decoder_hidden));
  if (cfg.has(prefix + "dilations")) {
    s.dilations.clear();
    for (double d : cfg.get_doubles(prefix + "dilations"))
      s.dilations.push_back(static_cast<int>(d));
  }
  s.validate();
  return s;
}

void TcnSpec::validate() const {
  if (in_channels < 1) throw ConfigError("model: in_channels must be positive");
  if (window < 1) throw ConfigError("model: window must be positive");
  if (input_stride < 1) throw ConfigError("model: input_stride must be positive");
  if (kernel < 1) throw ConfigError("model: kernel must be positive");
  if (filters < 1) throw ConfigError("model: filters must be positive");
  if (dilations.empty()) throw ConfigError("model: needs at least one dilation");
  for (int d : dilations)
    if (d < 1) throw ConfigError("model: dilations must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw ConfigError("model: dropout must be in [0, 1)");
  if (cond_dim < 0) throw ConfigError("model: cond_dim must be non-negative");
  if (decoder_hidden < 1) throw ConfigError("model: decoder_hidden must be positive");
}

int TcnSpec::receptive_field() const {
  int rf = 1;
  for (int d : dilations) rf += 2 * (kernel - 1) * d;
  return rf;
}

Eigen::Index TcnModel::add_slice(const std::string& name, Eigen::Index rows,
                                 Eigen::Index cols) {
  layout_.push_back({name, num_params_, rows, cols});
  num_params_ += rows * cols;
  return static_cast<Eigen::Index>(layout_.size()) - 1;
}

TcnModel::TcnModel(const TcnSpec& spec) : spec_(spec) {
  spec_.validate();
  const int k = spec_.kernel;
  const int T = spec_.window;
  const int nb = static_cast<int>(spec_.dilations.size());

  // Readout cone: walk the required column ranges back from the last timestep.
  blocks_.resize(nb);
  int need = T - 1;
  for (int b = nb - 1; b >= 0; --b) {
    const int d = spec_.dilations[static_cast<size_t>(b)];
    BlockDef& blk = blocks_[static_cast<size_t>(b)];
    blk.t0_out = need;
    blk.b.t0_out = need;
    blk.a.t0_out = std::max(0, need - (k - 1) * d);
    blk.t0_in = std::max(0, blk.a.t0_out - (k - 1) * d);
    blk.a.t0_in = blk.t0_in;
    blk.b.t0_in = blk.a.t0_out;
    blk.a.dilation = d;
    blk.b.dilation = d;
    need = blk.t0_in;
  }

  for (int b = 0; b < nb; ++b) {
    BlockDef& blk = blocks_[static_cast<size_t>(b)];
    const int in_ch = b == 0 ? spec_.in_channels : spec_.filters;
    const std::string tag = "block" + std::to_string(b);
    blk.a.in_ch = in_ch;
    blk.a.out_ch = spec_.filters;
    blk.b.in_ch = spec_.filters;
    blk.b.out_ch = spec_.filters;
    blk.a.v = add_slice(tag + ".convA.v", spec_.filters,
                        static_cast<Eigen::Index>(in_ch) * k);
    blk.a.g = add_slice(tag + ".convA.g", spec_.filters, 1);
    blk.a.b = add_slice(tag + ".convA.b", spec_.filters, 1);
    blk.b.v = add_slice(tag + ".convB.v", spec_.filters,
                        static_cast<Eigen::Index>(spec_.filters) * k);
    blk.b.g = add_slice(tag + ".convB.g", spec_.filters, 1);
    blk.b.b = add_slice(tag + ".convB.b", spec_.filters, 1);
    blk.has_proj = in_ch != spec_.filters;
    if (blk.has_proj) {
      blk.proj_w = add_slice(tag + ".proj.w", spec_.filters, in_ch);
      blk.proj_b = add_slice(tag + ".proj.b", spec_.filters, 1);
    }
  }

  fc1_w_ = add_slice("decoder.fc1.w", spec_.decoder_hidden,
                     spec_.filters + spec_.cond_dim);
  fc1_b_ = add_slice("decoder.fc1.b", spec_.decoder_hidden, 1);
  fc2_w_ = add_slice("decoder.fc2.w", 1, spec_.decoder_hidden);
  fc2_b_ = add_slice("decoder.fc2.b", 1, 1);
}

const ParamSlice& TcnModel::slice(const std::string& name) const {
  for (const ParamSlice& s : layout_)
    if (s.name == name) return s;
  throw ConfigError("tcn: unknown parameter slice " + name);
}

VectorXd TcnModel::init_params(std::uint64_t seed) const {
  VectorXd theta = VectorXd::Zero(num_params_);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto he_fill = [&](const ParamSlice& s, double fan_in) {
    MutMat m = mat_view(theta, s);
    const double std = std::sqrt(2.0 / fan_in);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = std * normal(rng);
  };
  auto init_conv = [&](const ConvDef& cd) {
    const ParamSlice& vs = layout_[static_cast<size_t>(cd.v)];
    he_fill(vs, static_cast<double>(vs.cols));
    MutVec g = vec_view(theta, layout_[static_cast<size_t>(cd.g)]);
    ConstMat v = mat_view(static_cast<const VectorXd&>(theta), vs);
    for (Eigen::Index i = 0; i < v.rows(); ++i) g[i] = v.row(i).norm();
  };
  for (const BlockDef& blk : blocks_) {
    init_conv(blk.a);
    init_conv(blk.b);
    if (blk.has_proj) {
      const ParamSlice& ps = layout_[static_cast<size_t>(blk.proj_w)];
      he_fill(ps, static_cast<double>(ps.cols));
    }
  }
  he_fill(layout_[static_cast<size_t>(fc1_w_)],
          static_cast<double>(spec_.filters + spec_.cond_dim));
  he_fill(layout_[static_cast<size_t>(fc2_w_)],
          static_cast<double>(spec_.decoder_hidden));
  return theta;
}

void TcnModel::conv_forward(const ConvDef& cd, const VectorXd& theta,
                            const MatRM& in, MatRM& preact) const {
  const int n_out = spec_.window - cd.t0_out;
  const MatRM w = effective_weights(mat_view(theta, layout_[static_cast<size_t>(cd.v)]),
                                    vec_view(theta, layout_[static_cast<size_t>(cd.g)]));
  const MatRM cols =
      im2col(in, cd.t0_in, cd.t0_out, n_out, cd.in_ch, spec_.kernel, cd.dilation);
  preact.resize(cd.out_ch, n_out);
  preact.noalias() = w * cols;
  ConstVec bias = vec_view(theta, layout_[static_cast<size_t>(cd.b)]);
  preact.colwise() += bias;
}

double TcnModel::forward(const VectorXd& theta, const MatRM& X, const VectorXd& cond,
                         TcnWorkspace& ws, bool train, std::mt19937_64* rng) const {
  if (theta.size() != num_params_) throw ContractError("tcn forward: theta size mismatch");
  if (X.rows() != spec_.in_channels || X.cols() != spec_.window)
    throw ContractError("tcn forward: input window shape mismatch");
  if (cond.size() != spec_.cond_dim) throw ContractError("tcn forward: cond size mismatch");

  const int T = spec_.window;
  ws.blocks.resize(blocks_.size());
  ws.train = train;
  ws.cond = cond;

  const int t0_x = blocks_.front().t0_in;
  ws.x = X.middleCols(t0_x, T - t0_x);

  const MatRM* cur = &ws.x;
  int cur_t0 = t0_x;
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const BlockDef& blk = blocks_[b];
    TcnWorkspace::BlockCache& bc = ws.blocks[b];
    const int n_out = T - blk.t0_out;

    conv_forward(blk.a, theta, *cur, bc.Za);
    bc.maskA.resize(bc.Za.rows(), bc.Za.cols());
    fill_dropout_mask(bc.maskA, spec_.dropout, train, rng);
    bc.Da = bc.Za.cwiseMax(0.0).cwiseProduct(bc.maskA);

    conv_forward(blk.b, theta, bc.Da, bc.Zb);
    bc.maskB.resize(bc.Zb.rows(), bc.Zb.cols());
    fill_dropout_mask(bc.maskB, spec_.dropout, train, rng);
    const MatRM Db = bc.Zb.cwiseMax(0.0).cwiseProduct(bc.maskB);

    const MatRM in_slice = cur->middleCols(blk.t0_out - cur_t0, n_out);
    MatRM res(spec_.filters, n_out);
    if (blk.has_proj) {
      ConstMat wp = mat_view(theta, layout_[static_cast<size_t>(blk.proj_w)]);
      ConstVec bp = vec_view(theta, layout_[static_cast<size_t>(blk.proj_b)]);
      res.noalias() = wp * in_slice;
      res.colwise() += bp;
    } else {
      res = in_slice;
    }
    bc.out = (Db + res).cwiseMax(0.0);
    cur = &bc.out;
    cur_t0 = blk.t0_out;
  }

  VectorXd z(spec_.filters + spec_.cond_dim);
  z.head(spec_.filters) = cur->col(cur->cols() - 1);
  z.tail(spec_.cond_dim) = cond;

  ConstMat w1 = mat_view(theta, layout_[static_cast<size_t>(fc1_w_)]);
  ConstVec b1 = vec_view(theta, layout_[static_cast<size_t>(fc1_b_)]);
  ws.h1pre = w1 * z + b1;
  ws.h1 = ws.h1pre.cwiseMax(0.0);
  ConstMat w2 = mat_view(theta, layout_[static_cast<size_t>(fc2_w_)]);
  ConstVec b2 = vec_view(theta, layout_[static_cast<size_t>(fc2_b_)]);
  ws.ready = true;
  return (w2 * ws.h1)(0, 0) + b2[0];
}

void TcnModel::conv_backward(const ConvDef& cd, const VectorXd& theta, const MatRM& in,
                             const MatRM& dOut, MatRM& dIn, VectorXd& grad) const {
  const int n_out = spec_.window - cd.t0_out;
  const int k = spec_.kernel;
  ConstMat v = mat_view(theta, layout_[static_cast<size_t>(cd.v)]);
  ConstVec g = vec_view(theta, layout_[static_cast<size_t>(cd.g)]);
  const MatRM w = effective_weights(v, g);
  const MatRM cols = im2col(in, cd.t0_in, cd.t0_out, n_out, cd.in_ch, k, cd.dilation);

  MatRM dW(w.rows(), w.cols());
  dW.noalias() = dOut * cols.transpose();
  MutVec gb = vec_view(grad, layout_[static_cast<size_t>(cd.b)]);
  gb += dOut.rowwise().sum();

  // Weight-norm chain rule per filter: w_i = g_i * v_i / |v_i|.
  MutMat gv = mat_view(grad, layout_[static_cast<size_t>(cd.v)]);
  MutVec gg = vec_view(grad, layout_[static_cast<size_t>(cd.g)]);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double n = v.row(i).norm();
    const double dot = dW.row(i).dot(v.row(i));
    gg[i] += dot / n;
    gv.row(i) += (g[i] / n) * dW.row(i) - (g[i] * dot / (n * n * n)) * v.row(i);
  }

  // Scatter the column gradients back onto the input buffer (col2im).
  MatRM dCols(cols.rows(), cols.cols());
  dCols.noalias() = w.transpose() * dOut;
  for (int j = 0; j < k; ++j) {
    for (int c = 0; c < n_out; ++c) {
      const int tt = cd.t0_out + c - j * cd.dilation;
      if (tt < 0) continue;
      dIn.col(tt - cd.t0_in) +=
          dCols.block(static_cast<Eigen::Index>(j) * cd.in_ch, c, cd.in_ch, 1);
    }
  }
}

void TcnModel::backward(const VectorXd& theta, TcnWorkspace& ws, double dy,
                        VectorXd& grad) const {
  if (!ws.ready) throw ContractError("tcn backward: no cached forward pass");
  if (grad.size() != num_params_) throw ContractError("tcn backward: grad size mismatch");

  const int T = spec_.window;
  const MatRM& last_out = ws.blocks.back().out;

  VectorXd z(spec_.filters + spec_.cond_dim);
  z.head(spec_.filters) = last_out.col(last_out.cols() - 1);
  z.tail(spec_.cond_dim) = ws.cond;

  // Decoder.
  {
    MutMat g2w = mat_view(grad, layout_[static_cast<size_t>(fc2_w_)]);
    MutVec g2b = vec_view(grad, layout_[static_cast<size_t>(fc2_b_)]);
    g2w += dy * ws.h1.transpose();
    g2b[0] += dy;
  }
  ConstMat w2 = mat_view(theta, layout_[static_cast<size_t>(fc2_w_)]);
  VectorXd dh1 = dy * w2.transpose();
  VectorXd dh1pre =
      dh1.cwiseProduct((ws.h1pre.array() > 0.0).cast<double>().matrix());
  {
    MutMat g1w = mat_view(grad, layout_[static_cast<size_t>(fc1_w_)]);
    MutVec g1b = vec_view(grad, layout_[static_cast<size_t>(fc1_b_)]);
    g1w += dh1pre * z.transpose();
    g1b += dh1pre;
  }
  ConstMat w1 = mat_view(theta, layout_[static_cast<size_t>(fc1_w_)]);
  const VectorXd dz = w1.transpose() * dh1pre;

  // Seed the block gradients at the readout column.
  MatRM dOut = MatRM::Zero(last_out.rows(), last_out.cols());
  dOut.col(dOut.cols() - 1) = dz.head(spec_.filters);

  for (int b = static_cast<int>(blocks_.size()) - 1; b >= 0; --b) {
    const BlockDef& blk = blocks_[static_cast<size_t>(b)];
    TcnWorkspace::BlockCache& bc = ws.blocks[static_cast<size_t>(b)];
    const int n_out = T - blk.t0_out;
    const bool first = b == 0;
    const MatRM& in = first ? ws.x : ws.blocks[static_cast<size_t>(b - 1)].out;
    const int in_t0 = first ? blocks_.front().t0_in : blocks_[static_cast<size_t>(b - 1)].t0_out;

    const MatRM dS =
        dOut.cwiseProduct((bc.out.array() > 0.0).cast<double>().matrix());

    bc.dIn = MatRM::Zero(in.rows(), in.cols());

    // Skip path.
    if (blk.has_proj) {
      const MatRM in_slice = in.middleCols(blk.t0_out - in_t0, n_out);
      MutMat gpw = mat_view(grad, layout_[static_cast<size_t>(blk.proj_w)]);
      MutVec gpb = vec_view(grad, layout_[static_cast<size_t>(blk.proj_b)]);
      gpw += dS * in_slice.transpose();
      gpb += dS.rowwise().sum();
      ConstMat wp = mat_view(theta, layout_[static_cast<size_t>(blk.proj_w)]);
      bc.dIn.middleCols(blk.t0_out - in_t0, n_out) += wp.transpose() * dS;
    } else {
      bc.dIn.middleCols(blk.t0_out - in_t0, n_out) += dS;
    }

    // Conv path, second then first.
    const MatRM dZb = dS.cwiseProduct(bc.maskB)
                          .cwiseProduct((bc.Zb.array() > 0.0).cast<double>().matrix());
    MatRM dDa = MatRM::Zero(bc.Da.rows(), bc.Da.cols());
    conv_backward(blk.b, theta, bc.Da, dZb, dDa, grad);

    const MatRM dZa = dDa.cwiseProduct(bc.maskA)
                          .cwiseProduct((bc.Za.array() > 0.0).cast<double>().matrix());
    conv_backward(blk.a, theta, in, dZa, bc.dIn, grad);

    dOut = bc.dIn;
  }
}

}  // namespace uficlab
