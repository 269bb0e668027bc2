#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <vector>

#include "mbrnn/net.hpp"
#include "mbrnn/rng.hpp"

namespace mbrnn {

struct TrainConfig {
  double lr0 = 0.001;
  double lr_decay = 0.95;  // per-epoch exponential factor
  double weight_decay = 1e-5;
  bool coupled_weight_decay = false;  // add wd*theta to the gradient instead of decoupled decay
  int batch = 32;
  int epochs = 30;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int micro_batch = 32;  // BPTT memory cap; gradients accumulate across chunks
};

struct EpochStats {
  double train_loss = 0.0;
  double val_sae = 0.0;
  double lr = 0.0;
};

template <typename Scalar>
struct LabeledSet {
  std::vector<typename Net<Scalar>::Mat> x;  // T x D each
  std::vector<typename Net<Scalar>::Mat> y;  // T x (l+1) each
  std::size_t size() const { return x.size(); }
};

template <typename Scalar>
struct TrainResult {
  Net<Scalar> net;  // best-validation checkpoint
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_val_sae = 0.0;
  double untrained_val_sae = 0.0;
};

// Mean SAE of the model over a labeled set (all samples, all periods).
template <typename Scalar>
double mean_sae(const Net<Scalar>& net, const LabeledSet<Scalar>& set, int chunk = 64) {
  if (set.size() == 0) throw std::invalid_argument("mean_sae: empty set");
  double total = 0.0;
  long rows = 0;
  ForwardCache<Scalar> cache;
  for (std::size_t lo = 0; lo < set.size(); lo += chunk) {
    const std::size_t hi = std::min(set.size(), lo + chunk);
    std::vector<const typename Net<Scalar>::Mat*> xs;
    for (std::size_t i = lo; i < hi; ++i) xs.push_back(&set.x[i]);
    forward_batch(net, xs, cache, false);
    const int T = static_cast<int>(set.x[lo].rows());
    for (std::size_t i = lo; i < hi; ++i) {
      for (int t = 0; t < T; ++t) {
        double row = 0.0;
        for (Eigen::Index k = 0; k < set.y[i].cols(); ++k)
          row += std::abs(static_cast<double>(set.y[i](t, k)) -
                          static_cast<double>(cache.probs[t](k, i - lo)));
        total += row;
        ++rows;
      }
    }
  }
  return total / static_cast<double>(rows);
}

namespace detail {

// One AdamW step over every tensor; weight decay is decoupled unless the
// config couples it into the gradient.
template <typename Scalar>
void adam_step(Net<Scalar>& net, const Net<Scalar>& grads, Net<Scalar>& m, Net<Scalar>& v,
               long step, double lr, const TrainConfig& cfg) {
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));
  auto update = [&](auto& theta, const auto& g_in, auto& m_t, auto& v_t) {
    using Arr = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Arr g = g_in.array();
    if (cfg.coupled_weight_decay && cfg.weight_decay > 0)
      g += static_cast<Scalar>(cfg.weight_decay) * theta.array();
    m_t.array() = static_cast<Scalar>(b1) * m_t.array() + static_cast<Scalar>(1 - b1) * g;
    v_t.array() = static_cast<Scalar>(b2) * v_t.array() + static_cast<Scalar>(1 - b2) * g.square();
    const Arr mhat = m_t.array() / static_cast<Scalar>(bc1);
    const Arr vhat = v_t.array() / static_cast<Scalar>(bc2);
    theta.array() -= static_cast<Scalar>(lr) * mhat / (vhat.sqrt() + static_cast<Scalar>(cfg.adam_eps));
    if (!cfg.coupled_weight_decay && cfg.weight_decay > 0)
      theta.array() -= static_cast<Scalar>(lr * cfg.weight_decay) * theta.array();
  };
  for (int l = 0; l < net.num_layers(); ++l) {
    update(net.layers[l].w_ih, grads.layers[l].w_ih, m.layers[l].w_ih, v.layers[l].w_ih);
    update(net.layers[l].w_hh, grads.layers[l].w_hh, m.layers[l].w_hh, v.layers[l].w_hh);
    update(net.layers[l].b, grads.layers[l].b, m.layers[l].b, v.layers[l].b);
  }
  update(net.head_w, grads.head_w, m.head_w, v.head_w);
  update(net.head_b, grads.head_b, m.head_b, v.head_b);
}

template <typename Scalar>
void axpy(Net<Scalar>& acc, const Net<Scalar>& g, Scalar scale) {
  for (int l = 0; l < acc.num_layers(); ++l) {
    acc.layers[l].w_ih += scale * g.layers[l].w_ih;
    acc.layers[l].w_hh += scale * g.layers[l].w_hh;
    acc.layers[l].b += scale * g.layers[l].b;
  }
  acc.head_w += scale * g.head_w;
  acc.head_b += scale * g.head_b;
}

}  // namespace detail

// AdamW training with per-epoch exponential learning-rate decay. History
// records train loss and validation SAE per epoch; the returned parameters are
// the best-validation checkpoint. Deterministic in (net0, sets, cfg).
template <typename Scalar>
TrainResult<Scalar> train(const Net<Scalar>& net0, const LabeledSet<Scalar>& train_set,
                          const LabeledSet<Scalar>& val_set, const TrainConfig& cfg,
                          bool verbose = false) {
  if (train_set.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (train_set.x.size() != train_set.y.size() || val_set.x.size() != val_set.y.size())
    throw std::invalid_argument("train: features/labels size mismatch");

  TrainResult<Scalar> result;
  Net<Scalar> net = net0;
  Net<Scalar> m = zeros_like(net), v = zeros_like(net);
  Net<Scalar> grads = zeros_like(net), chunk_grads;
  Rng shuffle_rng(child_seed(cfg.seed, "train.shuffle"));
  long step = 0;

  result.untrained_val_sae = val_set.size() > 0 ? mean_sae(net, val_set) : 0.0;
  result.net = net;
  result.best_val_sae = result.untrained_val_sae;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr0 * std::pow(cfg.lr_decay, static_cast<double>(epoch));
    // Fisher-Yates with our own stream, independent of std::shuffle internals.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.uniform_int(i);
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    long epoch_samples = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch) {
      const std::size_t hi = std::min(order.size(), lo + cfg.batch);
      const int bsize = static_cast<int>(hi - lo);
      grads = zeros_like(net);
      double batch_loss = 0.0;
      for (std::size_t clo = lo; clo < hi; clo += cfg.micro_batch) {
        const std::size_t chi = std::min(hi, clo + cfg.micro_batch);
        std::vector<const typename Net<Scalar>::Mat*> xs, ys;
        for (std::size_t i = clo; i < chi; ++i) {
          xs.push_back(&train_set.x[order[i]]);
          ys.push_back(&train_set.y[order[i]]);
        }
        const Scalar chunk_loss = loss_and_grad(net, xs, ys, chunk_grads);
        const Scalar scale = static_cast<Scalar>(chi - clo) / static_cast<Scalar>(bsize);
        detail::axpy(grads, chunk_grads, scale);
        batch_loss += static_cast<double>(chunk_loss) * static_cast<double>(scale);
      }
      ++step;
      detail::adam_step(net, grads, m, v, step, lr, cfg);
      epoch_loss += batch_loss * bsize;
      epoch_samples += bsize;
    }
    EpochStats stats;
    stats.lr = lr;
    stats.train_loss = epoch_loss / static_cast<double>(epoch_samples);
    stats.val_sae = val_set.size() > 0 ? mean_sae(net, val_set) : 0.0;
    result.history.push_back(stats);
    if (val_set.size() > 0 && (result.best_epoch < 0 || stats.val_sae < result.best_val_sae)) {
      result.best_val_sae = stats.val_sae;
      result.best_epoch = epoch;
      result.net = net;
    }
    if (verbose)
      std::cerr << "epoch " << epoch << " lr " << lr << " train_loss " << stats.train_loss
                << " val_sae " << stats.val_sae << "\n";
  }
  if (val_set.size() == 0) result.net = net;  // no validation: keep the final weights
  return result;
}

// One point of the random hyperparameter search.
struct HpTrial {
  double lr = 0.0;
  int layers = 0;
  int width = 0;
  int batch = 0;
  double weight_decay = 0.0;
  double val_sae = 0.0;
};

struct HpSpace {
  std::vector<double> lr = {0.0001, 0.0005, 0.001, 0.005};
  std::vector<int> layers = {2, 3, 4, 5, 6};
  std::vector<int> width = {16, 32, 64, 128};
  std::vector<int> batch = {32, 64, 128, 256};
  std::vector<double> weight_decay = {1e-4, 1e-5, 1e-6};
  std::size_t size() const {
    return lr.size() * layers.size() * width.size() * batch.size() * weight_decay.size();
  }
};

// Uniform random search without replacement, selected by lowest validation
// SAE. A budget above the grid size is capped with a warning.
template <typename Scalar>
std::vector<HpTrial> hp_search(const HpSpace& space, int budget, std::uint64_t seed,
                               const LabeledSet<Scalar>& train_set, const LabeledSet<Scalar>& val_set,
                               const TrainConfig& base_cfg, int input_dim, int output_dim,
                               bool verbose = false) {
  const std::size_t total = space.size();
  if (budget < 1) throw std::invalid_argument("hp_search: budget >= 1 required");
  if (static_cast<std::size_t>(budget) > total) {
    std::cerr << "hp_search: budget " << budget << " exceeds grid size " << total << ", capping\n";
    budget = static_cast<int>(total);
  }
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(child_seed(seed, "hp.space"));
  for (int i = 0; i < budget; ++i) {
    const std::size_t j = i + rng.uniform_int(total - i);
    std::swap(idx[i], idx[j]);
  }

  std::vector<HpTrial> trials;
  for (int i = 0; i < budget; ++i) {
    std::size_t code = idx[i];
    HpTrial t;
    t.lr = space.lr[code % space.lr.size()];
    code /= space.lr.size();
    t.layers = space.layers[code % space.layers.size()];
    code /= space.layers.size();
    t.width = space.width[code % space.width.size()];
    code /= space.width.size();
    t.batch = space.batch[code % space.batch.size()];
    code /= space.batch.size();
    t.weight_decay = space.weight_decay[code % space.weight_decay.size()];

    TrainConfig cfg = base_cfg;
    cfg.lr0 = t.lr;
    cfg.batch = t.batch;
    cfg.weight_decay = t.weight_decay;
    cfg.seed = child_seed(seed, "hp.trial", static_cast<std::uint64_t>(i));
    Net<Scalar> net0 = make_net<Scalar>(input_dim, t.width, t.layers, output_dim, cfg.seed);
    TrainResult<Scalar> r = train(net0, train_set, val_set, cfg);
    t.val_sae = r.best_val_sae;
    trials.push_back(t);
    if (verbose)
      std::cerr << "hp trial " << i << ": lr " << t.lr << " layers " << t.layers << " width "
                << t.width << " batch " << t.batch << " wd " << t.weight_decay << " -> val SAE "
                << t.val_sae << "\n";
  }
  return trials;
}

inline const HpTrial& best_trial(const std::vector<HpTrial>& trials) {
  if (trials.empty()) throw std::invalid_argument("best_trial: no trials");
  const HpTrial* best = &trials[0];
  for (const auto& t : trials)
    if (t.val_sae < best->val_sae) best = &t;
  return *best;
}

}  // namespace mbrnn
