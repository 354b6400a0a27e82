#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "embprobe/embedding.hpp"
#include "embprobe/errors.hpp"
#include "embprobe/labels.hpp"
#include "embprobe/random.hpp"

namespace embprobe {

enum class ProbeKind { logreg, linear_svm, mlp1, mlp2 };

inline std::string_view probe_kind_name(ProbeKind k) {
  switch (k) {
    case ProbeKind::logreg: return "logreg";
    case ProbeKind::linear_svm: return "linear_svm";
    case ProbeKind::mlp1: return "mlp1";
    case ProbeKind::mlp2: return "mlp2";
  }
  return "?";
}

inline std::optional<ProbeKind> parse_probe_kind(std::string_view s) {
  for (auto k : {ProbeKind::logreg, ProbeKind::linear_svm, ProbeKind::mlp1, ProbeKind::mlp2})
    if (probe_kind_name(k) == s) return k;
  return std::nullopt;
}

// Per-column affine map to mean 0, variance 1. Constant columns are only
// centered.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const RowMatrix& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    s.scale = ((x.rowwise() - s.mean).array().square().colwise().sum() /
               static_cast<double>(x.rows()))
                  .sqrt();
    for (Eigen::Index j = 0; j < s.scale.size(); ++j)
      if (!(s.scale[j] > 1e-12)) s.scale[j] = 1.0;
    return s;
  }

  RowMatrix apply(const RowMatrix& x) const {
    return (x.rowwise() - mean).array().rowwise() / scale.array();
  }
};

struct DenseLayer {
  RowMatrix weights;  // in x out
  Eigen::RowVectorXd bias;
};

// Forward pass: ReLU after every layer except the last, which yields
// logits.
inline RowMatrix network_logits(const std::vector<DenseLayer>& layers, const RowMatrix& x) {
  RowMatrix a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    RowMatrix z = (a * layers[l].weights).rowwise() + layers[l].bias;
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

namespace detail {

inline RowMatrix row_softmax(const RowMatrix& logits) {
  RowMatrix p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  p = p.array().colwise() / p.rowwise().sum().array();
  return p;
}

}  // namespace detail

// Weighted softmax cross-entropy with an L2 penalty on weights (not
// biases):
//   L = sum_i w_i CE_i / sum_i w_i + l2/2 sum ||W||^2
// where w_i is the class weight of item i. Fills `grads` when non-null.
inline double softmax_network_loss(const std::vector<DenseLayer>& layers, const RowMatrix& x,
                                   std::span<const Label> y, std::span<const double> item_weight,
                                   double l2, std::vector<DenseLayer>* grads = nullptr) {
  const Eigen::Index n = x.rows();
  std::vector<RowMatrix> acts{x};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    RowMatrix z = (acts.back() * layers[l].weights).rowwise() + layers[l].bias;
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  const RowMatrix& logits = acts.back();
  RowMatrix shifted = logits.colwise() - logits.rowwise().maxCoeff();
  const Eigen::VectorXd log_z = shifted.array().exp().rowwise().sum().log();
  double weight_sum = 0, loss = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = item_weight[static_cast<std::size_t>(i)];
    weight_sum += w;
    loss += w * (log_z[i] - shifted(i, y[static_cast<std::size_t>(i)]));
  }
  loss /= weight_sum;
  for (const auto& layer : layers) loss += 0.5 * l2 * layer.weights.squaredNorm();
  if (!grads) return loss;

  grads->resize(layers.size());
  RowMatrix delta = detail::row_softmax(logits);
  for (Eigen::Index i = 0; i < n; ++i) {
    delta(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    delta.row(i) *= item_weight[static_cast<std::size_t>(i)] / weight_sum;
  }
  for (std::size_t l = layers.size(); l-- > 0;) {
    (*grads)[l].weights = acts[l].transpose() * delta + l2 * layers[l].weights;
    (*grads)[l].bias = delta.colwise().sum();
    if (l > 0) {
      RowMatrix back = delta * layers[l].weights.transpose();
      delta = (acts[l].array() > 0.0).select(back, 0.0);
    }
  }
  return loss;
}

// One-vs-rest hinge loss with L2 penalty, weighted per item:
//   L = sum_i w_i sum_c max(0, 1 - t_ic s_ic) / sum_i w_i + l2/2 ||W||^2
// with t_ic = +1 for the true class and -1 otherwise. Fills a subgradient.
inline double ovr_hinge_loss(const DenseLayer& layer, const RowMatrix& x, std::span<const Label> y,
                             std::span<const double> item_weight, double l2,
                             DenseLayer* grad = nullptr) {
  const RowMatrix scores = (x * layer.weights).rowwise() + layer.bias;
  RowMatrix dscore = RowMatrix::Zero(scores.rows(), scores.cols());
  double weight_sum = 0, loss = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) weight_sum += item_weight[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double w = item_weight[static_cast<std::size_t>(i)] / weight_sum;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      const double t = c == y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
      const double margin = 1.0 - t * scores(i, c);
      if (margin > 0) {
        loss += w * margin;
        dscore(i, c) = -w * t;
      }
    }
  }
  loss += 0.5 * l2 * layer.weights.squaredNorm();
  if (grad) {
    grad->weights = x.transpose() * dscore + l2 * layer.weights;
    grad->bias = dscore.colwise().sum();
  }
  return loss;
}

struct ProbeTrainConfig {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;  // 0: per-kind default
  double lr = 0;           // 0: per-kind default
  double l2 = 1e-4;
  std::size_t batch = 200;  // minibatch size for the MLP kinds
};

// Trained probe. Inputs are standardized with statistics of the training
// rows before reaching the network.
struct ProbeModel {
  ProbeKind kind = ProbeKind::logreg;
  int classes = 0;
  std::size_t input_dim = 0;
  Standardizer standardizer;
  std::vector<DenseLayer> layers;
  std::vector<double> class_weights;
  bool constant = false;
  Label constant_label = 0;
  bool warning = false;  // set for a single-class training set
};

// Row-wise argmax; ties resolve to the lower class index.
inline std::vector<Label> argmax_rows(const RowMatrix& scores) {
  std::vector<Label> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<Label>(best);
  }
  return out;
}

inline std::vector<Label> predict(const ProbeModel& m, const RowMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != m.input_dim)
    throw InvalidArgument("probe expects " + std::to_string(m.input_dim) + " input columns, got " +
                          std::to_string(x.cols()));
  if (m.constant) return std::vector<Label>(static_cast<std::size_t>(x.rows()), m.constant_label);
  return argmax_rows(network_logits(m.layers, m.standardizer.apply(x)));
}

namespace detail {

inline DenseLayer glorot_layer(std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  DenseLayer l{RowMatrix(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out)),
               Eigen::RowVectorXd(static_cast<Eigen::Index>(out))};
  for (Eigen::Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] = rng.uniform(-limit, limit);
  for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = rng.uniform(-limit, limit);
  return l;
}

// Adam state for a stack of dense layers.
struct Adam {
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t t = 0;
  std::vector<DenseLayer> m, v;

  explicit Adam(const std::vector<DenseLayer>& layers, double lr_) : lr(lr_) {
    for (const auto& l : layers) {
      m.push_back({RowMatrix::Zero(l.weights.rows(), l.weights.cols()),
                   Eigen::RowVectorXd::Zero(l.bias.size())});
    }
    v = m;
  }

  void step(std::vector<DenseLayer>& layers, const std::vector<DenseLayer>& grads) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto update = [&](auto& p, const auto& g, auto& mm, auto& vv) {
        mm = beta1 * mm + (1.0 - beta1) * g;
        vv = beta2 * vv.array() + (1.0 - beta2) * g.array().square();
        p.array() -= lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + eps);
      };
      update(layers[l].weights, grads[l].weights, m[l].weights, v[l].weights);
      update(layers[l].bias, grads[l].bias, m[l].bias, v[l].bias);
    }
  }
};

}  // namespace detail

// Trains a probe on raw rows `x` with labels in [0, classes).
//   logreg     - multinomial logistic regression, full-batch gradient descent
//   linear_svm - one-vs-rest hinge + L2, full-batch subgradient descent
//   mlp1       - 100 ReLU units, softmax output, minibatch Adam
//   mlp2       - 256 + 256 ReLU units, softmax output, minibatch Adam
// `weights` are per-class loss weights (empty = all 1).
inline ProbeModel train_probe(ProbeKind kind, const RowMatrix& x, const std::vector<Label>& y,
                              int classes, const std::vector<double>& weights,
                              const ProbeTrainConfig& cfg = {}) {
  if (x.rows() == 0 || static_cast<std::size_t>(x.rows()) != y.size())
    throw InvalidArgument("probe training needs matching, nonempty X and y");
  ProbeModel m;
  m.kind = kind;
  m.classes = classes;
  m.input_dim = static_cast<std::size_t>(x.cols());
  m.class_weights = weights.empty() ? std::vector<double>(static_cast<std::size_t>(classes), 1.0)
                                    : weights;
  for (Label label : y)
    if (label < 0 || label >= classes) throw InvalidArgument("training label out of range");
  if (std::all_of(y.begin(), y.end(), [&](Label v) { return v == y.front(); })) {
    m.constant = true;
    m.constant_label = y.front();
    m.warning = true;
    return m;
  }

  m.standardizer = Standardizer::fit(x);
  const RowMatrix xs = m.standardizer.apply(x);
  std::vector<double> item_weight(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    item_weight[i] = m.class_weights[static_cast<std::size_t>(y[i])];

  Rng rng(derive_seed(cfg.seed, "probe-init"));
  const std::size_t in = m.input_dim;
  const auto c = static_cast<std::size_t>(classes);
  std::vector<DenseLayer> grads;

  if (kind == ProbeKind::logreg || kind == ProbeKind::linear_svm) {
    m.layers.push_back({RowMatrix::Zero(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(c)),
                        Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(c))});
    const std::size_t epochs = cfg.epochs ? cfg.epochs : 500;
    const double lr = cfg.lr > 0 ? cfg.lr : (kind == ProbeKind::logreg ? 0.5 : 0.1);
    grads.resize(1);
    for (std::size_t e = 0; e < epochs; ++e) {
      if (kind == ProbeKind::logreg)
        softmax_network_loss(m.layers, xs, y, item_weight, cfg.l2, &grads);
      else
        ovr_hinge_loss(m.layers[0], xs, y, item_weight, cfg.l2, &grads[0]);
      m.layers[0].weights -= lr * grads[0].weights;
      m.layers[0].bias -= lr * grads[0].bias;
    }
    return m;
  }

  const std::vector<std::size_t> widths =
      kind == ProbeKind::mlp1 ? std::vector<std::size_t>{100} : std::vector<std::size_t>{256, 256};
  std::size_t prev = in;
  for (std::size_t w : widths) {
    m.layers.push_back(detail::glorot_layer(prev, w, rng));
    prev = w;
  }
  m.layers.push_back(detail::glorot_layer(prev, c, rng));

  const std::size_t epochs = cfg.epochs ? cfg.epochs : 200;
  detail::Adam adam(m.layers, cfg.lr > 0 ? cfg.lr : 1e-3);
  const std::size_t n = y.size();
  const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch, n));
  std::vector<std::size_t> order(n);
  Rng shuffle_rng(derive_seed(cfg.seed, "probe-batches"));
  RowMatrix xb;
  std::vector<Label> yb;
  std::vector<double> wb;
  for (std::size_t e = 0; e < epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      xb.resize(static_cast<Eigen::Index>(len), xs.cols());
      yb.resize(len);
      wb.resize(len);
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t r = order[start + i];
        xb.row(static_cast<Eigen::Index>(i)) = xs.row(static_cast<Eigen::Index>(r));
        yb[i] = y[r];
        wb[i] = item_weight[r];
      }
      softmax_network_loss(m.layers, xb, yb, wb, cfg.l2, &grads);
      adam.step(m.layers, grads);
    }
  }
  return m;
}

}  // namespace embprobe
