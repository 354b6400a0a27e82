#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "embprobe/embedding.hpp"
#include "embprobe/errors.hpp"
#include "embprobe/labels.hpp"
#include "embprobe/parallel.hpp"
#include "embprobe/random.hpp"

namespace embprobe {

struct TsneConfig {
  double perplexity = 30;
  std::size_t iterations = 1000;
  double learning_rate = 200;
  double exaggeration = 12;
  std::size_t exaggeration_iters = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  double init_sigma = 1e-4;
  double perplexity_tol = 1e-4;
  std::size_t search_iters = 50;
  std::size_t kl_every = 10;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

inline constexpr std::size_t kMaxTsnePoints = 10000;

struct TsneInput {
  RowMatrix p;  // symmetric joint probabilities, sum 1
  std::vector<double> perplexity;  // achieved per-point perplexity
};

struct Projection2D {
  RowMatrix coords;  // n x 2
  std::vector<std::string> vertices;
  std::optional<MethodTag> method;
  double perplexity = 30;
  std::uint64_t seed = 0;
  double kl = 0;
  std::vector<std::pair<std::size_t, double>> kl_history;  // (iteration, KL)

  std::size_t size() const noexcept { return static_cast<std::size_t>(coords.rows()); }
};

// Pairwise squared distances from explicit differences rather than the
// Gram-matrix shortcut, which cancels badly for rows far from the origin.
inline RowMatrix squared_distances(const RowMatrix& x) {
  const Eigen::Index n = x.rows();
  RowMatrix d = RowMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).squaredNorm();
  return d;
}

// Conditional distribution of point i at precision beta; returns the
// entropy (nats). Distances are shifted by the row minimum so exp() cannot
// underflow for every neighbour at once.
inline double conditional_row(const RowMatrix& d2, Eigen::Index i, double beta, double* out) {
  const Eigen::Index n = d2.rows();
  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j)
    if (j != i) dmin = std::min(dmin, d2(i, j));
  double sum = 0, weighted = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) {
      out[j] = 0;
      continue;
    }
    const double shifted = d2(i, j) - dmin;
    out[j] = std::exp(-beta * shifted);
    sum += out[j];
    weighted += out[j] * shifted;
  }
  for (Eigen::Index j = 0; j < n; ++j) out[j] /= sum;
  return std::log(sum) + beta * weighted / sum;
}

// Per-point bisection on the Gaussian precision until exp(entropy) is
// within `tol` of the target perplexity, then P = (P_j|i + P_i|j) / 2n.
inline TsneInput tsne_input_similarities(const RowMatrix& x, double perplexity, double tol = 1e-4,
                                         std::size_t max_iters = 50, std::size_t workers = 1) {
  const Eigen::Index n = x.rows();
  const RowMatrix d2 = squared_distances(x);
  RowMatrix cond(n, n);
  TsneInput in;
  in.perplexity.assign(static_cast<std::size_t>(n), 0.0);
  const double target = std::log(perplexity);
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double h = conditional_row(d2, i, beta, cond.row(i).data());
    for (std::size_t it = 0; it < max_iters && std::abs(std::exp(h) - perplexity) > tol; ++it) {
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
      h = conditional_row(d2, i, beta, cond.row(i).data());
    }
    in.perplexity[ui] = std::exp(h);
  });
  in.p = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
  in.p /= in.p.sum();
  return in;
}

// KL(P || Q) for the Student-t Q of embedding y.
inline double tsne_kl(const RowMatrix& p, const RowMatrix& y) {
  const RowMatrix d2 = squared_distances(y);
  const Eigen::Index n = y.rows();
  double z = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) z += 1.0 / (1.0 + d2(i, j));
  double kl = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && p(i, j) > 0) kl += p(i, j) * std::log(p(i, j) * z * (1.0 + d2(i, j)));
  return kl;
}

// Exact t-SNE of the rows of x into 2D: gradient descent with momentum and
// per-parameter gains, early exaggeration, Gaussian init.
inline Projection2D tsne(const RowMatrix& x, const TsneConfig& cfg = {}) {
  const Eigen::Index n = x.rows();
  if (static_cast<double>(n) < 3 * cfg.perplexity)
    throw InvalidArgument("t-SNE needs at least 3 * perplexity points, got " + std::to_string(n));
  if (static_cast<std::size_t>(n) > kMaxTsnePoints)
    throw InvalidArgument("exact t-SNE is limited to " + std::to_string(kMaxTsnePoints) +
                          " points; subsample first");
  const TsneInput in =
      tsne_input_similarities(x, cfg.perplexity, cfg.perplexity_tol, cfg.search_iters, cfg.workers);

  Projection2D out;
  out.perplexity = cfg.perplexity;
  out.seed = cfg.seed;
  RowMatrix& y = out.coords;
  y.resize(n, 2);
  Rng rng(derive_seed(cfg.seed, "tsne-init"));
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = cfg.init_sigma * rng.normal();

  RowMatrix velocity = RowMatrix::Zero(n, 2);
  RowMatrix gains = RowMatrix::Ones(n, 2);
  RowMatrix grad(n, 2);
  RowMatrix num(n, n);
  std::vector<double> row_sums(static_cast<std::size_t>(n));
  const std::size_t workers = cfg.workers;

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const double exag = it < cfg.exaggeration_iters ? cfg.exaggeration : 1.0;
    const double momentum = it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;

    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t ui) {
      const auto i = static_cast<Eigen::Index>(ui);
      double s = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
          num(i, j) = 0;
          continue;
        }
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
        s += num(i, j);
      }
      row_sums[ui] = s;
    });
    double z = 0;
    for (double s : row_sums) z += s;

    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t ui) {
      const auto i = static_cast<Eigen::Index>(ui);
      double gx = 0, gy = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double m = (exag * in.p(i, j) - num(i, j) / z) * num(i, j);
        gx += m * (y(i, 0) - y(j, 0));
        gy += m * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4 * gx;
      grad(i, 1) = 4 * gy;
    });

    for (Eigen::Index k = 0; k < y.size(); ++k) {
      double& g = gains.data()[k];
      const bool same_sign = (grad.data()[k] > 0) == (velocity.data()[k] > 0);
      g = same_sign ? std::max(0.01, g * 0.8) : g + 0.2;
      velocity.data()[k] = momentum * velocity.data()[k] - cfg.learning_rate * g * grad.data()[k];
      y.data()[k] += velocity.data()[k];
    }
    y.rowwise() -= y.colwise().mean();

    if ((cfg.kl_every && (it + 1) % cfg.kl_every == 0) || it + 1 == cfg.iterations) {
      const double kl = tsne_kl(in.p, y);
      if (!std::isfinite(kl)) throw DivergenceError("t-SNE KL divergence is not finite", it);
      out.kl_history.emplace_back(it + 1, kl);
    }
  }
  out.kl = out.kl_history.empty() ? tsne_kl(in.p, y) : out.kl_history.back().second;
  return out;
}

// t-SNE of an embedding; Poincare rows are mapped to Cartesian disk
// coordinates first.
inline Projection2D tsne(const Embedding& e, const TsneConfig& cfg = {}) {
  const RowMatrix x = e.geometry == Geometry::poincare_polar ? cartesian_coordinates(e) : e.matrix;
  Projection2D out = tsne(x, cfg);
  out.vertices = e.vertices;
  out.method = e.method;
  return out;
}

// At most `max_items` indices, sampled per label in proportion to label
// counts (every present label keeps at least one item). Sorted.
inline std::vector<std::size_t> stratified_subsample(const std::vector<Label>& labels,
                                                     std::size_t max_items, std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (labels.size() <= max_items) {
    out.resize(labels.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  const auto groups = detail::shuffled_groups(labels, derive_seed(seed, "subsample"));
  const double ratio = static_cast<double>(max_items) / static_cast<double>(labels.size());
  for (const auto& [label, members] : groups) {
    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(ratio * static_cast<double>(members.size()))));
    out.insert(out.end(), members.begin(), members.begin() + std::min(keep, members.size()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Mean silhouette coefficient of `points` grouped by `labels`, Euclidean
// distance. Points in singleton groups score 0. Needs at least 2 labels.
inline double silhouette(const RowMatrix& points, const std::vector<Label>& labels,
                         std::size_t workers = 1) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (labels.size() != n) throw InvalidArgument("silhouette: label count mismatch");
  std::map<Label, std::size_t> index;
  for (Label l : labels) index.emplace(l, 0);
  if (index.size() < 2) throw InvalidArgument("silhouette needs at least two labels");
  std::size_t k = 0;
  for (auto& [label, idx] : index) idx = k++;
  std::vector<std::size_t> group(n), group_size(k, 0);
  for (std::size_t i = 0; i < n; ++i) ++group_size[group[i] = index[labels[i]]];

  std::vector<double> score(n);
  parallel_for(n, workers, [&](std::size_t i) {
    std::vector<double> sums(k, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        sums[group[j]] += (points.row(static_cast<Eigen::Index>(i)) -
                           points.row(static_cast<Eigen::Index>(j)))
                              .norm();
    const std::size_t own = group[i];
    if (group_size[own] < 2) {
      score[i] = 0;
      return;
    }
    const double a = sums[own] / static_cast<double>(group_size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(group_size[c]));
    const double m = std::max(a, b);
    score[i] = m > 0 ? (b - a) / m : 0.0;
  });
  double total = 0;
  for (double s : score) total += s;
  return total / static_cast<double>(n);
}

struct ProjectionRow {
  std::string vertex;
  double x = 0, y = 0;
  Label label = 0;

  bool operator==(const ProjectionRow&) const = default;
};

inline std::vector<ProjectionRow> export_projection(const Projection2D& p,
                                                    const std::vector<Label>& labels) {
  if (labels.size() != p.size() || p.vertices.size() != p.size())
    throw InvalidArgument("projection has " + std::to_string(p.size()) + " points but " +
                          std::to_string(labels.size()) + " labels");
  std::vector<ProjectionRow> rows;
  for (std::size_t i = 0; i < p.size(); ++i)
    rows.push_back({p.vertices[i], p.coords(static_cast<Eigen::Index>(i), 0),
                    p.coords(static_cast<Eigen::Index>(i), 1), labels[i]});
  return rows;
}

inline void write_projection_csv(const std::vector<ProjectionRow>& rows, std::ostream& out) {
  out << "vertex,x,y,label\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.vertex << ',' << r.x << ',' << r.y << ',' << r.label << '\n';
}

inline std::vector<ProjectionRow> read_projection_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "vertex,x,y,label")
    throw ParseError(1, "expected header vertex,x,y,label");
  std::vector<ProjectionRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) throw ParseError(line_no, "expected 4 columns");
    try {
      rows.push_back({cells[0], std::stod(cells[1]), std::stod(cells[2]), std::stoi(cells[3])});
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "bad number in '" + line + "'");
    }
  }
  return rows;
}

}  // namespace embprobe
