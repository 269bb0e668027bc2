#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mbrnn/rng.hpp"

namespace mbrnn {

// Stacked LSTM with a linear softmax head, one output distribution per period.
// Every time step applies the same cell, so the inference horizon is
// unconstrained by the training horizon. Gate packing order: input, forget,
// cell, output.
template <typename Scalar>
struct Net {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Mat w_ih;  // 4H x in
    Mat w_hh;  // 4H x H
    Vec b;     // 4H
  };

  std::vector<Layer> layers;
  Mat head_w;  // out x H
  Vec head_b;  // out
  int input = 0, hidden = 0, output = 0;

  int num_layers() const { return static_cast<int>(layers.size()); }

  template <typename Other>
  Net<Other> cast() const {
    Net<Other> o;
    o.input = input;
    o.hidden = hidden;
    o.output = output;
    for (const auto& l : layers)
      o.layers.push_back({l.w_ih.template cast<Other>(), l.w_hh.template cast<Other>(),
                          l.b.template cast<Other>()});
    o.head_w = head_w.template cast<Other>();
    o.head_b = head_b.template cast<Other>();
    return o;
  }

  // f(tensor) over every parameter tensor, in checkpoint order.
  template <typename F>
  void for_each_tensor(F&& f) {
    for (auto& l : layers) {
      f(l.w_ih);
      f(l.w_hh);
      f(l.b);
    }
    f(head_w);
    f(head_b);
  }
};

template <typename Scalar>
Net<Scalar> zeros_like(const Net<Scalar>& n) {
  Net<Scalar> z;
  z.input = n.input;
  z.hidden = n.hidden;
  z.output = n.output;
  for (const auto& l : n.layers)
    z.layers.push_back({Net<Scalar>::Mat::Zero(l.w_ih.rows(), l.w_ih.cols()),
                        Net<Scalar>::Mat::Zero(l.w_hh.rows(), l.w_hh.cols()),
                        Net<Scalar>::Vec::Zero(l.b.size())});
  z.head_w = Net<Scalar>::Mat::Zero(n.head_w.rows(), n.head_w.cols());
  z.head_b = Net<Scalar>::Vec::Zero(n.head_b.size());
  return z;
}

// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases with the forget-gate
// block lifted by one.
template <typename Scalar>
Net<Scalar> make_net(int input, int hidden, int num_layers, int output, std::uint64_t seed) {
  if (input < 1 || hidden < 1 || num_layers < 1 || output < 1)
    throw std::invalid_argument("make_net: all dimensions must be positive");
  Net<Scalar> n;
  n.input = input;
  n.hidden = hidden;
  n.output = output;
  Rng rng(child_seed(seed, "net.init"));
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  auto fill = [&](typename Net<Scalar>::Mat& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
  };
  for (int l = 0; l < num_layers; ++l) {
    typename Net<Scalar>::Layer layer;
    const int in = l == 0 ? input : hidden;
    layer.w_ih.resize(4 * hidden, in);
    layer.w_hh.resize(4 * hidden, hidden);
    fill(layer.w_ih);
    fill(layer.w_hh);
    layer.b = Net<Scalar>::Vec::Zero(4 * hidden);
    layer.b.segment(hidden, hidden).array() += Scalar(1);  // forget gate
    n.layers.push_back(std::move(layer));
  }
  n.head_w.resize(output, hidden);
  fill(n.head_w);
  n.head_b = Net<Scalar>::Vec::Zero(output);
  return n;
}

// Activations kept for backpropagation through time. Batch matrices are
// column-per-sample.
template <typename Scalar>
struct ForwardCache {
  using Mat = typename Net<Scalar>::Mat;
  // [t][layer]
  std::vector<std::vector<Mat>> gi, gf, gg, go, c, tc, h;
  std::vector<Mat> x;       // [t] input D x B
  std::vector<Mat> probs;   // [t] out x B
};

// Batched stacked-LSTM forward over inputs sharing one horizon. xs[b] is a
// T x D matrix; returns per-step softmax outputs in the cache.
template <typename Scalar>
void forward_batch(const Net<Scalar>& net, const std::vector<const typename Net<Scalar>::Mat*>& xs,
                   ForwardCache<Scalar>& cache, bool keep_activations) {
  using Mat = typename Net<Scalar>::Mat;
  const int B = static_cast<int>(xs.size());
  if (B == 0) throw std::invalid_argument("forward_batch: empty batch");
  const int T = static_cast<int>(xs[0]->rows());
  const int H = net.hidden;
  const int L = net.num_layers();
  for (const auto* x : xs)
    if (x->rows() != T || x->cols() != net.input)
      throw std::invalid_argument("forward_batch: input shape mismatch");

  std::vector<Mat> h_prev(L, Mat::Zero(H, B)), c_prev(L, Mat::Zero(H, B));
  cache.probs.assign(T, Mat());
  cache.x.assign(keep_activations ? T : 0, Mat());
  if (keep_activations) {
    cache.gi.assign(T, std::vector<Mat>(L));
    cache.gf.assign(T, std::vector<Mat>(L));
    cache.gg.assign(T, std::vector<Mat>(L));
    cache.go.assign(T, std::vector<Mat>(L));
    cache.c.assign(T, std::vector<Mat>(L));
    cache.tc.assign(T, std::vector<Mat>(L));
    cache.h.assign(T, std::vector<Mat>(L));
  }

  Mat in(net.input, B), gates, i_g, f_g, g_g, o_g, c_new, tc_new, h_new;
  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < B; ++b) in.col(b) = xs[b]->row(t).transpose();
    if (keep_activations) cache.x[t] = in;
    Mat layer_in = in;
    for (int l = 0; l < L; ++l) {
      gates = net.layers[l].w_ih * layer_in + net.layers[l].w_hh * h_prev[l];
      gates.colwise() += net.layers[l].b;
      i_g = (Scalar(1) / (Scalar(1) + (-gates.topRows(H).array()).exp())).matrix();
      f_g = (Scalar(1) / (Scalar(1) + (-gates.middleRows(H, H).array()).exp())).matrix();
      g_g = gates.middleRows(2 * H, H).array().tanh().matrix();
      o_g = (Scalar(1) / (Scalar(1) + (-gates.bottomRows(H).array()).exp())).matrix();
      c_new = (f_g.array() * c_prev[l].array() + i_g.array() * g_g.array()).matrix();
      tc_new = c_new.array().tanh().matrix();
      h_new = (o_g.array() * tc_new.array()).matrix();
      if (keep_activations) {
        cache.gi[t][l] = i_g;
        cache.gf[t][l] = f_g;
        cache.gg[t][l] = g_g;
        cache.go[t][l] = o_g;
        cache.c[t][l] = c_new;
        cache.tc[t][l] = tc_new;
        cache.h[t][l] = h_new;
      }
      c_prev[l] = c_new;
      h_prev[l] = h_new;
      layer_in = h_new;
    }
    Mat logits = net.head_w * layer_in;
    logits.colwise() += net.head_b;
    // Column-stable softmax.
    for (int b = 0; b < B; ++b) {
      auto col = logits.col(b);
      const Scalar m = col.maxCoeff();
      col = (col.array() - m).exp();
      col /= col.sum();
    }
    cache.probs[t] = std::move(logits);
  }
}

// Inference on one sample: rows of the result are softmax distributions.
template <typename Scalar>
typename Net<Scalar>::Mat forward(const Net<Scalar>& net, const typename Net<Scalar>::Mat& x) {
  ForwardCache<Scalar> cache;
  std::vector<const typename Net<Scalar>::Mat*> xs = {&x};
  forward_batch(net, xs, cache, false);
  typename Net<Scalar>::Mat out(x.rows(), net.output);
  for (Eigen::Index t = 0; t < x.rows(); ++t) out.row(t) = cache.probs[t].col(0).transpose();
  return out;
}

// Mean over the batch and horizon of the per-period sum of absolute errors
// plus the per-period maximum absolute error, both equally weighted. The first
// term is exactly the batch-mean SAE.
template <typename Scalar>
Scalar loss(const std::vector<typename Net<Scalar>::Mat>& y,
            const std::vector<typename Net<Scalar>::Mat>& yhat) {
  if (y.size() != yhat.size() || y.empty()) throw std::invalid_argument("loss: batch mismatch");
  const Eigen::Index T = y[0].rows();
  Scalar term1 = 0, term2 = 0;
  for (std::size_t b = 0; b < y.size(); ++b) {
    if (y[b].rows() != T || y[b].cols() != yhat[b].cols() || y[b].rows() != yhat[b].rows())
      throw std::invalid_argument("loss: shape mismatch");
    for (Eigen::Index t = 0; t < T; ++t) {
      Scalar row_sum = 0, row_max = 0;
      for (Eigen::Index k = 0; k < y[b].cols(); ++k) {
        const Scalar d = std::abs(y[b](t, k) - yhat[b](t, k));
        row_sum += d;
        if (d > row_max) row_max = d;
      }
      term1 += row_sum;
      term2 += row_max;
    }
  }
  const Scalar denom = static_cast<Scalar>(y.size()) * static_cast<Scalar>(T);
  return term1 / denom + term2 / denom;
}

// Loss and parameter gradients for one batch via backpropagation through
// time. Subgradient conventions: sign(0) = 0 for the absolute values, maximum
// ties broken toward the lowest index.
template <typename Scalar>
Scalar loss_and_grad(const Net<Scalar>& net, const std::vector<const typename Net<Scalar>::Mat*>& xs,
                     const std::vector<const typename Net<Scalar>::Mat*>& ys, Net<Scalar>& grads,
                     std::vector<typename Net<Scalar>::Mat>* predictions = nullptr) {
  using Mat = typename Net<Scalar>::Mat;
  const int B = static_cast<int>(xs.size());
  if (B == 0 || ys.size() != xs.size()) throw std::invalid_argument("loss_and_grad: batch mismatch");
  const int T = static_cast<int>(xs[0]->rows());
  const int H = net.hidden;
  const int L = net.num_layers();
  const int out_dim = net.output;

  ForwardCache<Scalar> cache;
  forward_batch(net, xs, cache, true);

  // Per-sample prediction matrices; the scalar loss reuses loss() so the two
  // computations can never drift apart.
  std::vector<Mat> yhat(B, Mat(T, out_dim)), ymat(B);
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < T; ++t) yhat[b].row(t) = cache.probs[t].col(b).transpose();
    ymat[b] = *ys[b];
  }
  const Scalar total = loss<Scalar>(ymat, yhat);

  const Scalar w = Scalar(1) / (static_cast<Scalar>(B) * static_cast<Scalar>(T));
  // d loss / d probs, then back through the softmax to logits.
  std::vector<Mat> dlogits(T, Mat(out_dim, B));
  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < B; ++b) {
      Eigen::Index kmax = 0;
      Scalar vmax = -1;
      for (Eigen::Index k = 0; k < out_dim; ++k) {
        const Scalar d = std::abs(yhat[b](t, k) - ymat[b](t, k));
        if (d > vmax) {
          vmax = d;
          kmax = k;
        }
      }
      typename Net<Scalar>::Vec dy(out_dim);
      for (Eigen::Index k = 0; k < out_dim; ++k) {
        const Scalar diff = yhat[b](t, k) - ymat[b](t, k);
        Scalar s = diff > 0 ? Scalar(1) : (diff < 0 ? Scalar(-1) : Scalar(0));
        if (k == kmax) s += diff > 0 ? Scalar(1) : (diff < 0 ? Scalar(-1) : Scalar(0));
        dy(k) = w * s;
      }
      const auto p = cache.probs[t].col(b);
      const Scalar dot = dy.dot(p);
      dlogits[t].col(b) = (p.array() * (dy.array() - dot)).matrix();
    }
  }

  grads = zeros_like(net);
  std::vector<Mat> dh_next(L, Mat::Zero(H, B)), dc_next(L, Mat::Zero(H, B));
  Mat dh, dc, da(4 * H, B), dx;
  for (int t = T - 1; t >= 0; --t) {
    // Head.
    grads.head_w.noalias() += dlogits[t] * cache.h[t][L - 1].transpose();
    grads.head_b += dlogits[t].rowwise().sum();
    Mat dfrom_above = net.head_w.transpose() * dlogits[t];
    for (int l = L - 1; l >= 0; --l) {
      dh = dh_next[l] + dfrom_above;
      const Mat& i_g = cache.gi[t][l];
      const Mat& f_g = cache.gf[t][l];
      const Mat& g_g = cache.gg[t][l];
      const Mat& o_g = cache.go[t][l];
      const Mat& tc = cache.tc[t][l];
      dc = (dh.array() * o_g.array() * (Scalar(1) - tc.array().square())).matrix() + dc_next[l];
      // Gate pre-activation gradients.
      da.topRows(H) = (dc.array() * g_g.array() * i_g.array() * (Scalar(1) - i_g.array())).matrix();
      if (t > 0)
        da.middleRows(H, H) =
            (dc.array() * cache.c[t - 1][l].array() * f_g.array() * (Scalar(1) - f_g.array())).matrix();
      else
        da.middleRows(H, H).setZero();  // c_prev = 0
      da.middleRows(2 * H, H) = (dc.array() * i_g.array() * (Scalar(1) - g_g.array().square())).matrix();
      da.bottomRows(H) = (dh.array() * tc.array() * o_g.array() * (Scalar(1) - o_g.array())).matrix();

      const Mat& in = l == 0 ? cache.x[t] : cache.h[t][l - 1];
      grads.layers[l].w_ih.noalias() += da * in.transpose();
      if (t > 0) grads.layers[l].w_hh.noalias() += da * cache.h[t - 1][l].transpose();
      grads.layers[l].b += da.rowwise().sum();

      dh_next[l] = net.layers[l].w_hh.transpose() * da;
      dc_next[l] = (dc.array() * f_g.array()).matrix();
      if (l > 0) dfrom_above = net.layers[l].w_ih.transpose() * da;
    }
  }
  if (predictions != nullptr) *predictions = std::move(yhat);
  return total;
}

}  // namespace mbrnn
