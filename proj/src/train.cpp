#include "uficlab/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "uficlab/csv.hpp"
#include "uficlab/parallel.hpp"
#include "uficlab/rng.hpp"

namespace uficlab {

void adam_step(AdamState& st, VectorXd& theta, const VectorXd& grad,
               const AdamConfig& cfg) {
  if (st.m.size() != theta.size()) {
    st.m = VectorXd::Zero(theta.size());
    st.v = VectorXd::Zero(theta.size());
    st.t = 0;
  }
  ++st.t;
  st.m = cfg.beta1 * st.m + (1.0 - cfg.beta1) * grad;
  st.v = cfg.beta2 * st.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  theta -= (cfg.lr / bc1) * st.m.cwiseQuotient(
               ((st.v / bc2).cwiseSqrt().array() + cfg.eps).matrix());
}

TrainConfig TrainConfig::from_config(const Config& cfg, const std::string& prefix) {
  TrainConfig t;
  t.epochs = static_cast<int>(cfg.get_int(prefix + "epochs", t.epochs));
  t.iterations_per_epoch = static_cast<int>(
      cfg.get_int(prefix + "iterations_per_epoch", t.iterations_per_epoch));
  t.batch_size = static_cast<int>(cfg.get_int(prefix + "batch_size", t.batch_size));
  t.adam.lr = cfg.get_double(prefix + "lr", t.adam.lr);
  t.lr_decay = cfg.get_double(prefix + "lr_decay", t.lr_decay);
  t.keep_best = cfg.get_bool(prefix + "keep_best", t.keep_best);
  t.mape_floor = cfg.get_double(prefix + "mape_floor", t.mape_floor);
  t.divergence_factor =
      cfg.get_double(prefix + "divergence_factor", t.divergence_factor);
  t.val_max_windows =
      static_cast<int>(cfg.get_int(prefix + "val_max_windows", t.val_max_windows));
  t.grad_chunk = static_cast<int>(cfg.get_int(prefix + "grad_chunk", t.grad_chunk));
  t.seed = static_cast<std::uint64_t>(cfg.get_int(prefix + "seed", 1));
  if (t.epochs < 1 || t.iterations_per_epoch < 1 || t.batch_size < 1)
    throw ConfigError("train: epochs, iterations and batch size must be positive");
  if (t.grad_chunk < 1) throw ConfigError("train: grad_chunk must be positive");
  if (!(t.mape_floor > 0.0)) throw ConfigError("train: mape_floor must be positive");
  if (!(t.lr_decay > 0.0) || t.lr_decay > 1.0)
    throw ConfigError("train: lr_decay must be in (0, 1]");
  return t;
}

double evaluate_mape(const TcnModel& model, const VectorXd& theta,
                     const WindowedDataset& ds, const std::vector<WindowRef>& refs,
                     int max_windows, double floor) {
  if (refs.empty()) return 0.0;
  const size_t stride =
      std::max<size_t>(1, refs.size() / static_cast<size_t>(std::max(1, max_windows)));
  std::vector<WindowRef> picked;
  for (size_t i = 0; i < refs.size(); i += stride) picked.push_back(refs[i]);

  const size_t n = picked.size();
  const size_t chunk = 64;
  const size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(n_chunks, 0.0);

  parallel_chunks(n, chunk, [&](size_t ci, size_t begin, size_t end) {
    TcnWorkspace ws;
    MatRM X;
    VectorXd cond;
    double acc = 0.0;
    for (size_t i = begin; i < end; ++i) {
      const auto [ti, t] = picked[i];
      const TrajectoryData& traj = ds.trajs[static_cast<size_t>(ti)];
      assemble_window(traj, t, ds.window, ds.stats, X, cond, ds.stride);
      const double yhat = model.forward(theta, X, cond, ws, false, nullptr);
      const double y = normalized_label(traj.power[t], ds.stats);
      acc += std::abs(yhat - y) / std::max(std::abs(y), floor);
    }
    partial[ci] = acc;
  });

  double total = 0.0;
  for (double p : partial) total += p;
  return total / static_cast<double>(n);
}

TrainResult train_model(const TcnModel& model, const WindowedDataset& ds,
                        const TrainConfig& cfg) {
  if (ds.train_windows.empty()) throw DomainError("train_model: no training windows");

  TrainResult res;
  res.theta = model.init_params(derive_seed(cfg.seed, seed_tag::kInitWeights, 0));
  AdamState adam;
  VectorXd grad = VectorXd::Zero(model.num_params());

  auto sampler = make_engine(cfg.seed, seed_tag::kShuffle, 1);
  std::uniform_int_distribution<size_t> pick(0, ds.train_windows.size() - 1);

  const size_t bs = static_cast<size_t>(cfg.batch_size);
  const size_t chunk = static_cast<size_t>(cfg.grad_chunk);
  const size_t n_chunks = (bs + chunk - 1) / chunk;
  std::vector<VectorXd> chunk_grads(n_chunks);
  std::vector<double> chunk_loss(n_chunks);
  std::vector<WindowRef> batch(bs);

  double first_val = -1.0;
  std::uint64_t window_counter = 0;
  VectorXd best_theta;
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t_start = std::chrono::steady_clock::now();
    AdamConfig adam_cfg = cfg.adam;
    adam_cfg.lr = cfg.adam.lr * std::pow(cfg.lr_decay, static_cast<double>(epoch));
    double epoch_loss = 0.0;

    for (int it = 0; it < cfg.iterations_per_epoch; ++it) {
      for (size_t i = 0; i < bs; ++i) batch[i] = ds.train_windows[pick(sampler)];
      const std::uint64_t counter_base = window_counter;
      window_counter += bs;

      parallel_chunks(bs, chunk, [&](size_t ci, size_t begin, size_t end) {
        VectorXd& cg = chunk_grads[ci];
        if (cg.size() != model.num_params()) cg = VectorXd::Zero(model.num_params());
        cg.setZero();
        TcnWorkspace ws;
        MatRM X;
        VectorXd cond;
        double acc = 0.0;
        for (size_t i = begin; i < end; ++i) {
          const auto [ti, t] = batch[i];
          const TrajectoryData& traj = ds.trajs[static_cast<size_t>(ti)];
          assemble_window(traj, t, ds.window, ds.stats, X, cond, ds.stride);
          auto rng = make_engine(cfg.seed, seed_tag::kDropout, counter_base + i);
          const double yhat = model.forward(res.theta, X, cond, ws, true, &rng);
          const double y = normalized_label(traj.power[t], ds.stats);
          const double denom = std::max(std::abs(y), cfg.mape_floor);
          acc += std::abs(yhat - y) / denom;
          const double dy = (yhat >= y ? 1.0 : -1.0) / (denom * static_cast<double>(bs));
          model.backward(res.theta, ws, dy, cg);
        }
        chunk_loss[ci] = acc;
      });

      grad.setZero();
      double loss = 0.0;
      for (size_t ci = 0; ci < n_chunks; ++ci) {
        grad += chunk_grads[ci];
        loss += chunk_loss[ci];
      }
      loss /= static_cast<double>(bs);
      epoch_loss += loss;

      if (!std::isfinite(loss))
        throw TrainingFault("non-finite training loss", epoch * cfg.iterations_per_epoch + it);
      adam_step(adam, res.theta, grad, adam_cfg);
    }

    EpochStats st;
    st.epoch = epoch;
    st.train_mape = epoch_loss / cfg.iterations_per_epoch;
    st.val_mape = evaluate_mape(model, res.theta, ds, ds.val_windows,
                                cfg.val_max_windows, cfg.mape_floor);
    st.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                    .count();
    res.history.push_back(st);

    if (!std::isfinite(st.val_mape))
      throw TrainingFault("non-finite validation error", epoch);
    if (first_val < 0.0) first_val = std::max(st.val_mape, 1e-6);
    if (st.val_mape > cfg.divergence_factor * first_val)
      throw TrainingFault("validation error diverged", epoch);
    if (st.val_mape < best_val) {
      best_val = st.val_mape;
      best_theta = res.theta;
    }
  }
  // An empty validation split scores 0.0 everywhere; keep the final weights.
  if (cfg.keep_best && !ds.val_windows.empty() && best_theta.size() > 0)
    res.theta = best_theta;
  return res;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
  CsvTable tbl;
  tbl.columns = {"epoch", "train_mape", "val_mape", "wall_s"};
  tbl.data.resize(static_cast<Eigen::Index>(history.size()), 4);
  for (size_t i = 0; i < history.size(); ++i) {
    tbl.data(static_cast<Eigen::Index>(i), 0) = history[i].epoch;
    tbl.data(static_cast<Eigen::Index>(i), 1) = history[i].train_mape;
    tbl.data(static_cast<Eigen::Index>(i), 2) = history[i].val_mape;
    tbl.data(static_cast<Eigen::Index>(i), 3) = history[i].wall_s;
  }
  tbl.write(path);
}

}  // namespace uficlab
