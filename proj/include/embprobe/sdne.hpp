#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "embprobe/embedding.hpp"
#include "embprobe/errors.hpp"
#include "embprobe/graph.hpp"
#include "embprobe/random.hpp"

namespace embprobe {

// Autoencoder |V| -> h -> d -> h -> |V|, logistic sigmoid on every layer.
// Weights are stored input x output, so a layer is act(x * W + b).
struct SdneModel {
  RowMatrix enc1;  // |V| x h
  Eigen::RowVectorXd enc1_bias;
  RowMatrix enc2;  // h x d
  Eigen::RowVectorXd enc2_bias;
  RowMatrix dec1;  // d x h
  Eigen::RowVectorXd dec1_bias;
  RowMatrix dec2;  // h x |V|
  Eigen::RowVectorXd dec2_bias;

  std::size_t vertices() const noexcept { return static_cast<std::size_t>(enc1.rows()); }
  std::size_t hidden() const noexcept { return static_cast<std::size_t>(enc1.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(enc2.cols()); }

  // Flat views of every weight and bias block, in layer order.
  std::vector<Eigen::Map<Eigen::VectorXd>> parameters() {
    std::vector<Eigen::Map<Eigen::VectorXd>> out;
    auto add = [&](auto& x) { out.emplace_back(x.data(), x.size()); };
    add(enc1);
    add(enc1_bias);
    add(enc2);
    add(enc2_bias);
    add(dec1);
    add(dec1_bias);
    add(dec2);
    add(dec2_bias);
    return out;
  }

  SdneModel zeros_like() const {
    SdneModel z;
    z.enc1 = RowMatrix::Zero(enc1.rows(), enc1.cols());
    z.enc1_bias = Eigen::RowVectorXd::Zero(enc1_bias.size());
    z.enc2 = RowMatrix::Zero(enc2.rows(), enc2.cols());
    z.enc2_bias = Eigen::RowVectorXd::Zero(enc2_bias.size());
    z.dec1 = RowMatrix::Zero(dec1.rows(), dec1.cols());
    z.dec1_bias = Eigen::RowVectorXd::Zero(dec1_bias.size());
    z.dec2 = RowMatrix::Zero(dec2.rows(), dec2.cols());
    z.dec2_bias = Eigen::RowVectorXd::Zero(dec2_bias.size());
    return z;
  }
};

// Glorot-uniform weights, zero biases.
inline SdneModel sdne_init(std::size_t vertices, std::size_t hidden, std::size_t dim,
                           std::uint64_t seed) {
  if (vertices == 0 || hidden == 0 || dim == 0)
    throw InvalidArgument("sdne layer sizes must be >= 1");
  Rng rng(derive_seed(seed, "sdne-init"));
  auto layer = [&](std::size_t in, std::size_t out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    RowMatrix w(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
    return w;
  };
  SdneModel m;
  m.enc1 = layer(vertices, hidden);
  m.enc2 = layer(hidden, dim);
  m.dec1 = layer(dim, hidden);
  m.dec2 = layer(hidden, vertices);
  m.enc1_bias = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(hidden));
  m.enc2_bias = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(dim));
  m.dec1_bias = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(hidden));
  m.dec2_bias = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(vertices));
  return m;
}

namespace detail {

template <typename M>
void sigmoid_inplace(M& x) {
  x = x.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

}  // namespace detail

struct SdneForward {
  Eigen::RowVectorXd code;
  Eigen::RowVectorXd reconstruction;
};

// Dense forward pass of one input row.
inline SdneForward sdne_forward(const SdneModel& m, std::span<const double> row) {
  if (row.size() != m.vertices()) throw InvalidArgument("sdne input row has wrong length");
  const Eigen::Map<const Eigen::RowVectorXd> x(row.data(), static_cast<Eigen::Index>(row.size()));
  Eigen::RowVectorXd h1 = x * m.enc1 + m.enc1_bias;
  detail::sigmoid_inplace(h1);
  SdneForward out;
  out.code = h1 * m.enc2 + m.enc2_bias;
  detail::sigmoid_inplace(out.code);
  Eigen::RowVectorXd h3 = out.code * m.dec1 + m.dec1_bias;
  detail::sigmoid_inplace(h3);
  out.reconstruction = h3 * m.dec2 + m.dec2_bias;
  detail::sigmoid_inplace(out.reconstruction);
  return out;
}

inline SdneForward sdne_forward(const SdneModel& m, const std::vector<std::uint8_t>& row) {
  std::vector<double> x(row.begin(), row.end());
  return sdne_forward(m, std::span<const double>(x));
}

// Loss parts: reconstruction = sum_i ||(q'_i - q_i) * beta_i||^2 over the
// batch, proximity = sum over batch edges of ||code_u - code_v||^2, and
// total = reconstruction + alpha * proximity.
struct SdneLoss {
  double reconstruction = 0;
  double proximity = 0;
  double total = 0;
};

enum class SdneTerms { both, reconstruction, proximity };

// Edges with at least one endpoint in the batch, each listed once.
inline std::vector<Edge> sdne_batch_edges(const Graph& g, std::span<const VertexId> batch) {
  std::vector<Edge> edges;
  for (VertexId v : batch)
    for (VertexId u : g.neighbors(v)) edges.push_back(u < v ? Edge{u, v} : Edge{v, u});
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// Loss of a batch of adjacency rows plus the given edges; endpoints
// outside the batch are encoded in the same pass. When `grads` is non-null
// it receives the gradient of the selected terms (with alpha applied to
// the proximity term). The reported SdneLoss always has all parts.
inline SdneLoss sdne_loss(const SdneModel& m, const Graph& g, std::span<const VertexId> batch,
                          std::span<const Edge> edges, double alpha, double beta,
                          SdneModel* grads = nullptr, SdneTerms terms = SdneTerms::both) {
  if (batch.empty()) throw InvalidArgument("sdne batch is empty");
  const std::size_t n = m.vertices();
  const Eigen::Index h = static_cast<Eigen::Index>(m.hidden());

  // Rows 0..B-1 are the batch, later rows are extra edge endpoints.
  std::vector<VertexId> rows(batch.begin(), batch.end());
  std::unordered_map<VertexId, Eigen::Index> slot;
  for (std::size_t i = 0; i < rows.size(); ++i) slot.emplace(rows[i], static_cast<Eigen::Index>(i));
  for (const auto& e : edges)
    for (VertexId v : {e.first, e.second})
      if (slot.emplace(v, static_cast<Eigen::Index>(rows.size())).second) rows.push_back(v);
  const Eigen::Index total_rows = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());

  // Inputs are 0/1 adjacency rows, so the first layer sums weight rows.
  RowMatrix h1(total_rows, h);
  for (Eigen::Index i = 0; i < total_rows; ++i) {
    h1.row(i) = m.enc1_bias;
    for (VertexId u : g.neighbors(rows[static_cast<std::size_t>(i)])) h1.row(i) += m.enc1.row(u);
  }
  detail::sigmoid_inplace(h1);
  RowMatrix code = (h1 * m.enc2).rowwise() + m.enc2_bias;
  detail::sigmoid_inplace(code);
  RowMatrix h3 = (code.topRows(b) * m.dec1).rowwise() + m.dec1_bias;
  detail::sigmoid_inplace(h3);
  RowMatrix recon = (h3 * m.dec2).rowwise() + m.dec2_bias;
  detail::sigmoid_inplace(recon);

  // beta_ij = beta where a_ij = 1, 1 elsewhere.
  RowMatrix weight = RowMatrix::Ones(b, static_cast<Eigen::Index>(n));
  RowMatrix diff = recon;
  for (Eigen::Index i = 0; i < b; ++i)
    for (VertexId u : g.neighbors(rows[static_cast<std::size_t>(i)])) {
      diff(i, u) -= 1.0;
      weight(i, u) = beta;
    }

  SdneLoss loss;
  loss.reconstruction = (diff.array() * weight.array()).square().sum();
  for (const auto& e : edges)
    loss.proximity += (code.row(slot.at(e.first)) - code.row(slot.at(e.second))).squaredNorm();
  loss.total = loss.reconstruction + alpha * loss.proximity;
  if (!grads) return loss;

  *grads = m.zeros_like();
  RowMatrix dcode = RowMatrix::Zero(total_rows, code.cols());

  if (terms != SdneTerms::proximity) {
    RowMatrix dz4 = 2.0 * diff.array() * weight.array().square() * recon.array() *
                    (1.0 - recon.array());
    grads->dec2 = h3.transpose() * dz4;
    grads->dec2_bias = dz4.colwise().sum();
    RowMatrix dz3 = (dz4 * m.dec2.transpose()).array() * h3.array() * (1.0 - h3.array());
    grads->dec1 = code.topRows(b).transpose() * dz3;
    grads->dec1_bias = dz3.colwise().sum();
    dcode.topRows(b) = dz3 * m.dec1.transpose();
  }
  if (terms != SdneTerms::reconstruction) {
    for (const auto& e : edges) {
      const Eigen::Index iu = slot.at(e.first), iv = slot.at(e.second);
      const Eigen::RowVectorXd d = 2.0 * alpha * (code.row(iu) - code.row(iv));
      dcode.row(iu) += d;
      dcode.row(iv) -= d;
    }
  }
  RowMatrix dz2 = dcode.array() * code.array() * (1.0 - code.array());
  grads->enc2 = h1.transpose() * dz2;
  grads->enc2_bias = dz2.colwise().sum();
  RowMatrix dz1 = (dz2 * m.enc2.transpose()).array() * h1.array() * (1.0 - h1.array());
  grads->enc1_bias = dz1.colwise().sum();
  for (Eigen::Index i = 0; i < total_rows; ++i)
    for (VertexId u : g.neighbors(rows[static_cast<std::size_t>(i)])) grads->enc1.row(u) += dz1.row(i);
  return loss;
}

// Codes for every vertex.
inline RowMatrix sdne_encode_all(const SdneModel& m, const Graph& g) {
  const Eigen::Index n = static_cast<Eigen::Index>(g.vertex_count());
  RowMatrix h1(n, static_cast<Eigen::Index>(m.hidden()));
  for (Eigen::Index v = 0; v < n; ++v) {
    h1.row(v) = m.enc1_bias;
    for (VertexId u : g.neighbors(static_cast<VertexId>(v))) h1.row(v) += m.enc1.row(u);
  }
  detail::sigmoid_inplace(h1);
  RowMatrix code = (h1 * m.enc2).rowwise() + m.enc2_bias;
  detail::sigmoid_inplace(code);
  return code;
}

struct SdneConfig {
  std::size_t hidden = 256;
  std::size_t dim = 128;
  double alpha = 500;
  double beta = 10;
  double lr = 0.01;
  std::size_t epochs = 500;
  std::size_t batch = 64;
  std::uint64_t seed = 0;
  double rho = 0.9;  // RMSProp decay
  double eps = 1e-8;
};

struct SdneResult {
  SdneModel model;
  std::vector<SdneLoss> epoch_loss;  // summed over the epoch's batches
  Embedding embedding;
};

// RMSProp over seeded-shuffled minibatches of vertex rows and their
// incident edges.
inline SdneResult train_sdne(const Graph& g, const SdneConfig& cfg) {
  const std::size_t n = g.vertex_count();
  if (n == 0) throw InvalidArgument("sdne needs a nonempty graph");
  if (cfg.batch == 0 || cfg.epochs == 0) throw InvalidArgument("batch and epochs must be >= 1");
  SdneResult result;
  result.model = sdne_init(n, cfg.hidden, cfg.dim, cfg.seed);
  SdneModel& m = result.model;
  SdneModel cache = m.zeros_like();
  SdneModel grads;

  std::vector<VertexId> order(n);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), VertexId{0});
    Rng rng(derive_seed(cfg.seed, "sdne-epoch", epoch));
    rng.shuffle(std::span(order));
    SdneLoss epoch_loss;
    for (std::size_t start = 0; start < n; start += cfg.batch) {
      const auto batch = std::span<const VertexId>(order).subspan(start, std::min(cfg.batch, n - start));
      const auto edges = sdne_batch_edges(g, batch);
      const SdneLoss l = sdne_loss(m, g, batch, edges, cfg.alpha, cfg.beta, &grads);
      if (!std::isfinite(l.total))
        throw DivergenceError("sdne loss non-finite in epoch " + std::to_string(epoch + 1),
                              epoch + 1);
      epoch_loss.reconstruction += l.reconstruction;
      epoch_loss.proximity += l.proximity;
      epoch_loss.total += l.total;

      auto params = m.parameters();
      auto gp = grads.parameters();
      auto cp = cache.parameters();
      for (std::size_t k = 0; k < params.size(); ++k) {
        cp[k] = cfg.rho * cp[k].array() + (1.0 - cfg.rho) * gp[k].array().square();
        params[k].array() -= cfg.lr * gp[k].array() / (cp[k].array().sqrt() + cfg.eps);
      }
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  result.embedding = Embedding{sdne_encode_all(m, g), Geometry::euclidean, MethodTag::sdne,
                               g.labels()};
  return result;
}

}  // namespace embprobe
