#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "embprobe/embedding.hpp"
#include "embprobe/errors.hpp"
#include "embprobe/graph.hpp"
#include "embprobe/random.hpp"
#include "embprobe/walks.hpp"

namespace embprobe {

// Input (W) and output (W') weight tables of a skip-gram model. In the
// Poincare geometry each row is a polar disk point (r, theta).
struct SkipGramModel {
  RowMatrix input;
  RowMatrix output;
  Geometry geometry = Geometry::euclidean;

  std::size_t vocab() const noexcept { return static_cast<std::size_t>(input.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(input.cols()); }
};

inline constexpr double kMinRadius = 1e-5;
inline constexpr double kMaxRadius = 1.0 - 1e-5;

inline SkipGramModel init_model(std::size_t vocab, std::size_t dim, Geometry geometry,
                                std::uint64_t seed) {
  if (dim == 0) throw InvalidArgument("embedding dimension must be >= 1");
  if (geometry == Geometry::poincare_polar && dim != 2)
    throw InvalidArgument("poincare_polar geometry requires d = 2");
  SkipGramModel m;
  m.geometry = geometry;
  m.input.resize(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(dim));
  m.output.resize(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(dim));
  auto fill = [&](RowMatrix& w, std::uint64_t stream_seed) {
    Rng rng(stream_seed);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      if (geometry == Geometry::euclidean) {
        const double half = 0.5 / static_cast<double>(dim);
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-half, half);
      } else {
        w(i, 0) = rng.uniform(0.01, 0.1);
        w(i, 1) = rng.uniform(0.0, 2.0 * std::numbers::pi);
      }
    }
  };
  fill(m.input, derive_seed(seed, "skipgram-input"));
  fill(m.output, derive_seed(seed, "skipgram-output"));
  return m;
}

namespace detail {

inline void check_radius(double r) {
  if (!(r >= 0.0 && r < 1.0))
    throw DomainError("poincare radius " + std::to_string(r) + " outside [0, 1)");
}

// Similarity between two raw rows of the given geometry.
inline double row_similarity(Geometry geometry, const double* a, const double* b,
                             std::size_t dim) {
  if (geometry == Geometry::euclidean) {
    double s = 0;
    for (std::size_t k = 0; k < dim; ++k) s += a[k] * b[k];
    return s;
  }
  check_radius(a[0]);
  check_radius(b[0]);
  return 4.0 * (std::atanh(a[0]) * std::atanh(b[0])) * std::cos(a[1] - b[1]);
}

// Adds scale * d sim(a, b) / da into grad_a and scale * d sim / db into grad_b.
inline void add_similarity_gradient(Geometry geometry, const double* a, const double* b,
                                    std::size_t dim, double scale, double* grad_a,
                                    double* grad_b) {
  if (geometry == Geometry::euclidean) {
    for (std::size_t k = 0; k < dim; ++k) {
      grad_a[k] += scale * b[k];
      grad_b[k] += scale * a[k];
    }
    return;
  }
  const double ta = std::atanh(a[0]);
  const double tb = std::atanh(b[0]);
  const double c = std::cos(a[1] - b[1]);
  const double s = std::sin(a[1] - b[1]);
  grad_a[0] += scale * 4.0 * tb * c / (1.0 - a[0] * a[0]);
  grad_b[0] += scale * 4.0 * ta * c / (1.0 - b[0] * b[0]);
  grad_a[1] += scale * -4.0 * ta * tb * s;
  grad_b[1] += scale * 4.0 * ta * tb * s;
}

// -log sigmoid(x), stable for large |x|.
inline double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

// sim(u, v): u always reads the input table; v reads the output table
// when use_output_side is set, otherwise the input table as well.
// Euclidean: dot product. Poincare: 4 atanh(r_u) atanh(r_v) cos(theta_u - theta_v).
inline double similarity(const SkipGramModel& m, VertexId u, VertexId v, bool use_output_side) {
  const RowMatrix& other = use_output_side ? m.output : m.input;
  return detail::row_similarity(m.geometry, m.input.row(u).data(), other.row(v).data(), m.dim());
}

// Loss and gradients of one training pair. Only touched rows carry a
// gradient: the center's input row and the output rows listed in
// output_rows (context first, then each sampled row in order).
struct PairGradients {
  double loss = 0;
  VertexId center = 0;
  std::vector<double> center_grad;
  std::vector<VertexId> output_rows;
  std::vector<double> output_grads;  // output_rows.size() x dim, row-major

  std::span<double> output_grad(std::size_t i, std::size_t dim) {
    return {output_grads.data() + i * dim, dim};
  }
  std::span<const double> output_grad(std::size_t i, std::size_t dim) const {
    return {output_grads.data() + i * dim, dim};
  }

  void reset(VertexId c, std::size_t rows, std::size_t dim) {
    loss = 0;
    center = c;
    center_grad.assign(dim, 0.0);
    output_rows.clear();
    output_grads.assign(rows * dim, 0.0);
  }
};

// Negative-sampling objective for one (center, context) pair:
//   -log sig(sim(c, ctx)) - sum_n log sig(-sim(c, n))
inline void pair_loss_and_grads(const SkipGramModel& m, VertexId center, VertexId context,
                                std::span<const VertexId> negatives, PairGradients& out) {
  const std::size_t d = m.dim();
  out.reset(center, negatives.size() + 1, d);
  const double* c = m.input.row(center).data();
  auto term = [&](VertexId row, bool positive) {
    const double* o = m.output.row(row).data();
    const double s = detail::row_similarity(m.geometry, c, o, d);
    // d/ds of -log sig(s) is sig(s) - 1; of -log sig(-s) is sig(s).
    out.loss += positive ? detail::neg_log_sigmoid(s) : detail::neg_log_sigmoid(-s);
    const double g = positive ? detail::sigmoid(s) - 1.0 : detail::sigmoid(s);
    const std::size_t slot = out.output_rows.size();
    out.output_rows.push_back(row);
    detail::add_similarity_gradient(m.geometry, c, o, d, g, out.center_grad.data(),
                                    out.output_grads.data() + slot * d);
  };
  term(context, true);
  for (VertexId n : negatives) {
    if (n == context) throw InvalidArgument("negative sample equals the context vertex");
    term(n, false);
  }
  if (!std::isfinite(out.loss))
    throw DivergenceError("non-finite loss on pair (" + std::to_string(center) + ", " +
                              std::to_string(context) + ")",
                          0);
}

inline PairGradients pair_loss_and_grads(const SkipGramModel& m, VertexId center,
                                         VertexId context, std::span<const VertexId> negatives) {
  PairGradients g;
  pair_loss_and_grads(m, center, context, negatives, g);
  return g;
}

// Softmax over all output rows: P(v | center) for every v. Shifted by the
// max logit before exponentiating.
inline std::vector<double> full_softmax_distribution(const SkipGramModel& m, VertexId center) {
  const std::size_t n = m.vocab();
  std::vector<double> p(n);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (VertexId v = 0; v < n; ++v) {
    p[v] = similarity(m, center, v, true);
    max_logit = std::max(max_logit, p[v]);
  }
  double z = 0;
  for (double& x : p) {
    x = std::exp(x - max_logit);
    z += x;
  }
  for (double& x : p) x /= z;
  return p;
}

inline double full_softmax_prob(const SkipGramModel& m, VertexId center, VertexId target) {
  return full_softmax_distribution(m, center).at(target);
}

// Exact objective -log P(target | center) with gradients on every output row.
inline void softmax_loss_and_grads(const SkipGramModel& m, VertexId center, VertexId target,
                                   PairGradients& out) {
  const std::size_t n = m.vocab();
  const std::size_t d = m.dim();
  out.reset(center, n, d);
  const auto p = full_softmax_distribution(m, center);
  out.loss = -std::log(p[target]);
  const double* c = m.input.row(center).data();
  for (VertexId v = 0; v < n; ++v) {
    out.output_rows.push_back(v);
    const double g = p[v] - (v == target ? 1.0 : 0.0);
    detail::add_similarity_gradient(m.geometry, c, m.output.row(v).data(), d, g,
                                    out.center_grad.data(), out.output_grads.data() + v * d);
  }
  if (!std::isfinite(out.loss))
    throw DivergenceError("non-finite loss on pair (" + std::to_string(center) + ", " +
                              std::to_string(target) + ")",
                          0);
}

namespace detail {

inline void project_polar_row(double* row) {
  row[0] = std::clamp(row[0], kMinRadius, kMaxRadius);
  row[1] = std::fmod(row[1], 2.0 * std::numbers::pi);
  if (row[1] < 0) row[1] += 2.0 * std::numbers::pi;
  if (row[1] >= 2.0 * std::numbers::pi) row[1] = 0.0;
}

}  // namespace detail

// Plain SGD step. Poincare rows are clipped to r in [1e-5, 1-1e-5] and
// theta wrapped into [0, 2pi) right after the step.
inline void apply_gradients(SkipGramModel& m, const PairGradients& g, double lr) {
  const std::size_t d = m.dim();
  double* c = m.input.row(g.center).data();
  for (std::size_t k = 0; k < d; ++k) c[k] -= lr * g.center_grad[k];
  if (m.geometry == Geometry::poincare_polar) detail::project_polar_row(c);
  for (std::size_t i = 0; i < g.output_rows.size(); ++i) {
    double* o = m.output.row(g.output_rows[i]).data();
    const auto grad = g.output_grad(i, d);
    for (std::size_t k = 0; k < d; ++k) o[k] -= lr * grad[k];
    if (m.geometry == Geometry::poincare_polar) detail::project_polar_row(o);
  }
}

// Fused negative-sampling SGD step for Euclidean models: each output row
// is updated as soon as its term is evaluated, the center row once at the
// end. With distinct negatives this is the same step as
// pair_loss_and_grads + apply_gradients; it skips the gradient buffers.
// Returns the pair loss.
inline double sgd_pair_step(SkipGramModel& m, VertexId center, VertexId context,
                            std::span<const VertexId> negatives, double lr,
                            std::vector<double>& scratch) {
  using Vec = Eigen::Map<Eigen::VectorXd>;
  const auto d = static_cast<Eigen::Index>(m.dim());
  Vec c(m.input.row(center).data(), d);
  Vec acc(scratch.data(), d);
  acc.setZero();
  double loss = 0;
  auto term = [&](VertexId row, bool positive) {
    Vec o(m.output.row(row).data(), d);
    const double s = c.dot(o);
    // One exp and one log1p give both the loss and sigmoid(s).
    const double e = std::exp(-std::abs(s));
    const double sig = s >= 0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    loss += std::log1p(e) + ((s < 0) == positive ? std::abs(s) : 0.0);
    const double g = (positive ? sig - 1.0 : sig) * lr;
    acc += g * o;
    o -= g * c;
  };
  term(context, true);
  for (VertexId n : negatives) {
    if (n == context) throw InvalidArgument("negative sample equals the context vertex");
    term(n, false);
  }
  c -= acc;
  if (!std::isfinite(loss))
    throw DivergenceError("non-finite loss on pair (" + std::to_string(center) + ", " +
                              std::to_string(context) + ")",
                          0);
  return loss;
}

enum class SoftmaxMode { negative_sampling, exact_softmax };

inline std::string_view softmax_mode_name(SoftmaxMode m) {
  return m == SoftmaxMode::negative_sampling ? "negative_sampling" : "exact_softmax";
}

struct SkipGramConfig {
  std::size_t dim = 128;
  double lr = 0.1;
  std::size_t epochs = 15;
  std::size_t negatives = 5;
  std::size_t window = 10;
  Geometry geometry = Geometry::euclidean;
  std::uint64_t seed = 0;
  SoftmaxMode mode = SoftmaxMode::negative_sampling;
  // Called after every epoch with the 1-based epoch index.
  std::function<void(std::size_t, const SkipGramModel&)> on_epoch;
};

inline constexpr std::size_t kMaxExactSoftmaxVocab = 5000;

// Samples from counts^0.75 with Walker's alias method (O(1) per draw).
class NoiseDistribution {
 public:
  explicit NoiseDistribution(const std::vector<std::uint64_t>& counts) {
    const std::size_t n = counts.size();
    weight_.resize(n);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) total += weight_[i] = std::pow(static_cast<double>(counts[i]), 0.75);
    if (!(total > 0)) throw InvalidArgument("noise distribution has no mass");
    for (double& w : weight_) w /= total;

    // Vose's construction.
    accept_.assign(n, 1.0);
    alias_.resize(n);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weight_[i] * static_cast<double>(n);
      alias_[i] = static_cast<VertexId>(i);
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back(), l = large.back();
      small.pop_back();
      accept_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
  }

  VertexId sample(Rng& rng) const {
    const double u = rng.uniform() * static_cast<double>(accept_.size());
    const auto i = std::min(static_cast<std::size_t>(u), accept_.size() - 1);
    return u - static_cast<double>(i) < accept_[i] ? static_cast<VertexId>(i) : alias_[i];
  }

  double probability(VertexId v) const { return weight_[v]; }

 private:
  std::vector<double> weight_;
  std::vector<double> accept_;
  std::vector<VertexId> alias_;
};

struct SkipGramResult {
  SkipGramModel model;
  std::vector<double> epoch_loss;  // mean loss per pair, one entry per epoch
};

// SGD over the corpus's context pairs, visited in a fresh seeded shuffled
// order every epoch. Learning rate decays linearly from lr to lr/100 over
// all steps.
inline SkipGramResult train_skipgram(const Graph& g, const WalkCorpus& corpus,
                                     const SkipGramConfig& cfg) {
  const std::size_t n = g.vertex_count();
  if (corpus.walks.empty()) throw InvalidArgument("empty walk corpus");
  if (cfg.window == 0) throw InvalidArgument("context window must be >= 1");
  if (cfg.mode == SoftmaxMode::exact_softmax && n > kMaxExactSoftmaxVocab)
    throw InvalidArgument("exact softmax limited to |V| <= " +
                          std::to_string(kMaxExactSoftmaxVocab));

  SkipGramResult result{init_model(n, cfg.dim, cfg.geometry, cfg.seed), {}};
  SkipGramModel& m = result.model;

  std::vector<std::uint64_t> counts(n, 0);
  std::size_t pairs_per_epoch = 0;
  for (const auto& walk : corpus.walks) {
    for (VertexId v : walk) ++counts[v];
    const std::size_t len = walk.size();
    for (std::size_t i = 0; i < len; ++i)
      pairs_per_epoch += std::min(len - 1, i + cfg.window) - (i >= cfg.window ? i - cfg.window : 0);
  }
  if (pairs_per_epoch == 0) throw InvalidArgument("corpus yields no context pairs");
  const NoiseDistribution noise(counts);
  const double total_steps = static_cast<double>(pairs_per_epoch * cfg.epochs);

  PairGradients grads;
  std::vector<double> scratch(cfg.dim);
  std::vector<VertexId> negatives(cfg.negatives);
  Rng neg_rng(derive_seed(cfg.seed, "negatives"));
  std::size_t step = 0;

  // Pair slots: token t, offset slot j in [0, 2c) for offsets -c..-1, 1..c.
  // Slots falling off either end of a walk are skipped, so each epoch's
  // permutation of slots visits every context pair exactly once.
  std::vector<VertexId> tokens;
  std::vector<std::uint32_t> walk_of;
  std::vector<std::size_t> walk_start;
  for (std::size_t w = 0; w < corpus.walks.size(); ++w) {
    walk_start.push_back(tokens.size());
    tokens.insert(tokens.end(), corpus.walks[w].begin(), corpus.walks[w].end());
    walk_of.insert(walk_of.end(), corpus.walks[w].size(), static_cast<std::uint32_t>(w));
  }
  const std::uint64_t span2 = 2 * cfg.window;
  const std::uint64_t slots = tokens.size() * span2;

  auto train_pair = [&](std::size_t epoch, double& loss_sum, VertexId center, VertexId context) {
    const double lr = cfg.lr * (1.0 - 0.99 * static_cast<double>(step) / total_steps);
    ++step;
    try {
      if (cfg.mode == SoftmaxMode::exact_softmax) {
        softmax_loss_and_grads(m, center, context, grads);
      } else {
        for (auto& neg : negatives) {
          // Redraw collisions with the context; give up after a few tries
          // on degenerate noise (one dominant vertex).
          neg = noise.sample(neg_rng);
          for (int tries = 0; neg == context && tries < 64; ++tries) neg = noise.sample(neg_rng);
        }
        std::size_t kept = 0;
        for (VertexId neg : negatives)
          if (neg != context) negatives[kept++] = neg;
        const auto sampled = std::span<const VertexId>(negatives).first(kept);
        if (m.geometry == Geometry::euclidean) {
          loss_sum += sgd_pair_step(m, center, context, sampled, lr, scratch);
          return;
        }
        pair_loss_and_grads(m, center, context, sampled, grads);
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " in epoch " + std::to_string(epoch + 1),
                            epoch + 1);
    }
    loss_sum += grads.loss;
    apply_gradients(m, grads, lr);
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const IndexPermutation order(slots, derive_seed(cfg.seed, "epoch", epoch));
    double loss_sum = 0;
    for (std::uint64_t i = 0; i < slots; ++i) {
      const std::uint64_t slot = order(i);
      const std::size_t t = slot / span2;
      const auto j = static_cast<std::int64_t>(slot % span2);
      const std::int64_t offset = j < static_cast<std::int64_t>(cfg.window)
                                      ? j - static_cast<std::int64_t>(cfg.window)
                                      : j - static_cast<std::int64_t>(cfg.window) + 1;
      const std::size_t w = walk_of[t];
      const auto pos = static_cast<std::int64_t>(t - walk_start[w]) + offset;
      if (pos < 0 || pos >= static_cast<std::int64_t>(corpus.walks[w].size())) continue;
      train_pair(epoch, loss_sum, tokens[t], tokens[walk_start[w] + static_cast<std::size_t>(pos)]);
    }
    const double mean = loss_sum / static_cast<double>(pairs_per_epoch);
    if (!std::isfinite(mean))
      throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch + 1), epoch + 1);
    result.epoch_loss.push_back(mean);
    if (cfg.on_epoch) cfg.on_epoch(epoch + 1, m);
  }
  return result;
}

// The input table W is the published embedding; W' is dropped.
inline Embedding to_embedding(const SkipGramModel& m, const Graph& g, MethodTag tag) {
  return Embedding{m.input, m.geometry, tag, g.labels()};
}

// Walk and training settings of one skip-gram family method.
struct SkipGramMethod {
  MethodTag tag = MethodTag::deepwalk;
  std::size_t walks_per_vertex = 10;
  std::size_t walk_length = 80;
  WalkStrategy strategy;
  SkipGramConfig train;
};

// Defaults per method: SGD, lr 0.1, 15 epochs; node2vec_h (p=1, q=0.5),
// node2vec_s (p=0.5, q=2); poincare uses the node2vec_s walks with a 2-D
// polar disk model.
inline SkipGramMethod skipgram_method_defaults(MethodTag tag) {
  SkipGramMethod m;
  m.tag = tag;
  switch (tag) {
    case MethodTag::deepwalk:
      break;
    case MethodTag::node2vec_h:
      m.strategy = WalkStrategy::biased(1.0, 0.5);
      break;
    case MethodTag::node2vec_s:
      m.strategy = WalkStrategy::biased(0.5, 2.0);
      break;
    case MethodTag::poincare:
      m.strategy = WalkStrategy::biased(0.5, 2.0);
      m.train.geometry = Geometry::poincare_polar;
      m.train.dim = 2;
      break;
    case MethodTag::sdne:
      throw InvalidArgument("sdne is not a skip-gram method");
  }
  return m;
}

struct MethodRun {
  Embedding embedding;
  std::vector<double> epoch_loss;
};

inline MethodRun run_skipgram_method(const SkipGramMethod& method, const Graph& g,
                                     std::uint64_t seed, std::size_t workers = 1) {
  const WalkCorpus corpus = generate_corpus(g, method.walks_per_vertex, method.walk_length,
                                            method.strategy, derive_seed(seed, "corpus"), workers);
  SkipGramConfig cfg = method.train;
  cfg.seed = derive_seed(seed, "train");
  auto result = train_skipgram(g, corpus, cfg);
  return {to_embedding(result.model, g, method.tag), std::move(result.epoch_loss)};
}

inline Embedding make_method(MethodTag tag, const Graph& g, std::uint64_t seed) {
  return run_skipgram_method(skipgram_method_defaults(tag), g, seed).embedding;
}

}  // namespace embprobe
