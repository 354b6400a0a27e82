#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "embprobe/errors.hpp"

namespace embprobe {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Geometry { euclidean, poincare_polar };

enum class MethodTag { deepwalk, node2vec_h, node2vec_s, poincare, sdne };

inline std::string_view geometry_name(Geometry g) {
  return g == Geometry::euclidean ? "euclidean" : "poincare_polar";
}

inline std::optional<Geometry> parse_geometry(std::string_view s) {
  if (s == "euclidean") return Geometry::euclidean;
  if (s == "poincare_polar") return Geometry::poincare_polar;
  return std::nullopt;
}

inline std::string_view method_name(MethodTag m) {
  switch (m) {
    case MethodTag::deepwalk: return "deepwalk";
    case MethodTag::node2vec_h: return "node2vec_h";
    case MethodTag::node2vec_s: return "node2vec_s";
    case MethodTag::poincare: return "poincare";
    case MethodTag::sdne: return "sdne";
  }
  return "?";
}

inline std::optional<MethodTag> parse_method(std::string_view s) {
  for (auto m : {MethodTag::deepwalk, MethodTag::node2vec_h, MethodTag::node2vec_s,
                 MethodTag::poincare, MethodTag::sdne})
    if (method_name(m) == s) return m;
  return std::nullopt;
}

// |V| x d matrix, one row per vertex, rows aligned with `vertices`.
// poincare_polar rows are (r, theta) with r in [0, 1) and theta in [0, 2pi).
struct Embedding {
  RowMatrix matrix;
  Geometry geometry = Geometry::euclidean;
  std::optional<MethodTag> method;
  std::vector<std::string> vertices;

  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix.cols()); }
};

// Euclidean coordinates for downstream models: the matrix itself, or the
// disk point (r cos theta, r sin theta) for polar rows.
inline RowMatrix cartesian_coordinates(const Embedding& e) {
  if (e.geometry == Geometry::euclidean) return e.matrix;
  RowMatrix out(e.matrix.rows(), 2);
  for (Eigen::Index i = 0; i < e.matrix.rows(); ++i) {
    out(i, 0) = e.matrix(i, 0) * std::cos(e.matrix(i, 1));
    out(i, 1) = e.matrix(i, 0) * std::sin(e.matrix(i, 1));
  }
  return out;
}

// Text format: "<|V|> <d> <geometry> [<method>]" then "<label> x_1 .. x_d"
// per row.
// max_digits10 keeps doubles lossless.
inline void write_embedding(const Embedding& e, std::ostream& out) {
  out << e.size() << ' ' << e.dim() << ' ' << geometry_name(e.geometry);
  if (e.method) out << ' ' << method_name(*e.method);
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < e.size(); ++i) {
    out << e.vertices[i];
    for (std::size_t j = 0; j < e.dim(); ++j) out << ' ' << e.matrix(i, j);
    out << '\n';
  }
}

inline Embedding read_embedding(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty embedding file");
  std::istringstream header(line);
  std::size_t n = 0, d = 0;
  std::string geometry;
  if (!(header >> n >> d >> geometry)) throw ParseError(1, "bad embedding header '" + line + "'");
  auto geo = parse_geometry(geometry);
  if (!geo) throw ParseError(1, "unknown geometry '" + geometry + "'");
  Embedding e;
  e.geometry = *geo;
  if (std::string method; header >> method) {
    e.method = parse_method(method);
    if (!e.method) throw ParseError(1, "unknown method tag '" + method + "'");
  }
  e.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  e.vertices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ParseError(i + 2, "missing embedding row");
    std::istringstream row(line);
    std::string label;
    row >> label;
    for (std::size_t j = 0; j < d; ++j) {
      std::string token;
      if (!(row >> token)) throw ParseError(i + 2, "short embedding row");
      try {
        e.matrix(i, j) = std::stod(token);
      } catch (const std::logic_error&) {
        throw ParseError(i + 2, "bad number '" + token + "'");
      }
    }
    std::string extra;
    if (row >> extra) throw ParseError(i + 2, "too many values in embedding row");
    e.vertices.push_back(label);
  }
  return e;
}

inline void write_embedding_file(const Embedding& e, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  write_embedding(e, out);
}

inline Embedding read_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open embedding file '" + path + "'");
  return read_embedding(in);
}

}  // namespace embprobe
