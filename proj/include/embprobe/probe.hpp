#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "embprobe/classifiers.hpp"
#include "embprobe/embedding.hpp"
#include "embprobe/errors.hpp"
#include "embprobe/features.hpp"
#include "embprobe/labels.hpp"
#include "embprobe/metrics.hpp"
#include "embprobe/parallel.hpp"
#include "embprobe/random.hpp"

namespace embprobe {

inline constexpr std::string_view kCodeVersion = "embprobe 0.1.0";

// kfold: stratified k-fold cross validation; the fraction column holds
// (k-1)/k. fraction_sweep: for every labelled fraction, k independent
// stratified splits with that fraction in train.
enum class ProbeProtocol { kfold, fraction_sweep };

inline std::string_view protocol_name(ProbeProtocol p) {
  return p == ProbeProtocol::kfold ? "kfold" : "fraction_sweep";
}

inline std::optional<ProbeProtocol> parse_protocol(std::string_view s) {
  if (s == "kfold") return ProbeProtocol::kfold;
  if (s == "fraction_sweep") return ProbeProtocol::fraction_sweep;
  return std::nullopt;
}

struct ProbeConfig {
  std::vector<Feature> features{kAllFeatures.begin(), kAllFeatures.end()};
  ProbeProtocol protocol = ProbeProtocol::kfold;
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t k = 5;
  ProbeKind kind = ProbeKind::mlp1;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int bins = 6;
  bool weighted = true;
  ProbeTrainConfig train;  // train.seed is replaced per cell
  std::size_t workers = 1;
};

inline constexpr std::array<Baseline, 3> kBaselines = {Baseline::uniform, Baseline::stratified,
                                                      Baseline::frequent};

// Percent improvement of `score` over `baseline`; NaN when the baseline is 0.
inline double lift_percent(double score, double baseline) {
  if (baseline == 0) return std::numeric_limits<double>::quiet_NaN();
  return (score - baseline) / baseline * 100.0;
}

struct ProbeRow {
  std::string method;
  Feature feature = Feature::DG;
  double fraction = 0;
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  double micro_f1 = 0;
  double macro_f1 = 0;
  std::array<double, 3> base_micro{};  // uniform, stratified, frequent
  std::array<double, 3> base_macro{};
  std::array<double, 3> lift{};  // micro-F1 lift over base_micro, percent
  ConfusionMatrix confusion;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  bool constant_predictor = false;
};

struct MeanStd {
  double mean = 0;
  double std = 0;  // population standard deviation
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  for (double x : xs) r.std += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(r.std / static_cast<double>(xs.size()));
  return r;
}

// Aggregate over folds and seeds of one (feature, fraction) cell.
struct ProbeSummary {
  Feature feature = Feature::DG;
  double fraction = 0;
  std::size_t runs = 0;
  MeanStd micro_f1, macro_f1;
  std::array<MeanStd, 3> base_micro, base_macro, lift;
};

struct ProbeReport {
  std::string method;
  std::vector<ProbeRow> rows;
  std::vector<ProbeSummary> summaries;
  std::map<std::string, std::vector<double>> bin_edges;  // per feature
  nlohmann::ordered_json metadata;
};

// Feature matrix handed to the probe: Euclidean rows as is, Poincare rows
// as Cartesian disk coordinates.
inline RowMatrix probe_inputs(const Embedding& e) {
  return e.geometry == Geometry::poincare_polar ? cartesian_coordinates(e) : e.matrix;
}

// Row of `e` for each vertex of `features`, or VertexMismatchError listing
// labels present on only one side.
inline std::vector<std::size_t> align_vertices(const Embedding& e, const FeatureTable& features) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < e.vertices.size(); ++i) row_of.emplace(e.vertices[i], i);
  std::vector<std::string> no_row, no_features;
  std::vector<std::size_t> rows;
  std::unordered_map<std::string, bool> seen;
  for (const auto& v : features.vertices) {
    auto it = row_of.find(v);
    if (it == row_of.end()) {
      no_row.push_back(v);
    } else {
      rows.push_back(it->second);
      seen[v] = true;
    }
  }
  for (const auto& v : e.vertices)
    if (!seen.count(v)) no_features.push_back(v);
  if (!no_row.empty() || !no_features.empty()) {
    auto list = [](const std::vector<std::string>& labels) {
      std::string out;
      for (std::size_t i = 0; i < labels.size() && i < 20; ++i) out += " " + labels[i];
      if (labels.size() > 20) out += " ... (" + std::to_string(labels.size()) + " total)";
      return out;
    };
    std::string msg = "embedding and feature table disagree on vertices";
    if (!no_row.empty()) msg += "; not in embedding:" + list(no_row);
    if (!no_features.empty()) msg += "; not in feature table:" + list(no_features);
    std::vector<std::string> missing = no_row;
    missing.insert(missing.end(), no_features.begin(), no_features.end());
    throw VertexMismatchError(msg, missing);
  }
  return rows;
}

namespace detail {

inline RowMatrix gather_rows(const RowMatrix& x, const std::vector<std::size_t>& idx) {
  RowMatrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

inline std::vector<Label> gather(const std::vector<Label>& y, const std::vector<std::size_t>& idx) {
  std::vector<Label> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(y[i]);
  return out;
}

}  // namespace detail

// Trains and scores one probe on one split, with all three baselines on
// the same split.
inline ProbeRow score_split(const RowMatrix& x, const std::vector<Label>& labels, int bins,
                            const Split& split, ProbeKind kind, bool weighted,
                            ProbeTrainConfig train, std::uint64_t cell_seed) {
  ProbeRow row;
  const auto y_train = detail::gather(labels, split.train);
  const auto y_test = detail::gather(labels, split.test);
  train.seed = derive_seed(cell_seed, "probe");
  const auto weights = weighted ? class_weights(y_train, bins) : std::vector<double>{};
  const ProbeModel model =
      train_probe(kind, detail::gather_rows(x, split.train), y_train, bins, weights, train);
  const auto pred = predict(model, detail::gather_rows(x, split.test));
  row.confusion = confusion_matrix(y_test, pred, bins);
  row.micro_f1 = micro_f1(row.confusion);
  row.macro_f1 = macro_f1(row.confusion);
  for (std::size_t b = 0; b < kBaselines.size(); ++b) {
    const auto base = baseline_predict(kBaselines[b], y_train, y_test.size(),
                                       derive_seed(cell_seed, baseline_name(kBaselines[b])));
    const auto cm = confusion_matrix(y_test, base, bins);
    row.base_micro[b] = micro_f1(cm);
    row.base_macro[b] = macro_f1(cm);
    row.lift[b] = lift_percent(row.micro_f1, row.base_micro[b]);
  }
  row.train_size = split.train.size();
  row.test_size = split.test.size();
  row.constant_predictor = model.warning;
  return row;
}

inline nlohmann::ordered_json probe_config_json(const ProbeConfig& cfg) {
  nlohmann::ordered_json j;
  std::vector<std::string> features;
  for (Feature f : cfg.features) features.emplace_back(feature_name(f));
  j["features"] = features;
  j["protocol"] = protocol_name(cfg.protocol);
  if (cfg.protocol == ProbeProtocol::fraction_sweep) j["fractions"] = cfg.fractions;
  j["k"] = cfg.k;
  j["probe"] = probe_kind_name(cfg.kind);
  j["seeds"] = cfg.seeds;
  j["bins"] = cfg.bins;
  j["class_weights"] = cfg.weighted ? "balanced" : "none";
  j["train_epochs"] = cfg.train.epochs;
  j["train_lr"] = cfg.train.lr;
  j["train_l2"] = cfg.train.l2;
  j["train_batch"] = cfg.train.batch;
  return j;
}

// Full factorial over features x fractions x folds x seeds. Cells run on
// `cfg.workers` threads; rows come out in canonical order.
inline ProbeReport run_probe_experiment(const Embedding& embedding, const FeatureTable& features,
                                        const ProbeConfig& cfg, std::string method = {}) {
  if (cfg.seeds.empty()) throw InvalidArgument("probe experiment needs at least one seed");
  if (cfg.features.empty()) throw InvalidArgument("probe experiment needs at least one feature");
  if (cfg.protocol == ProbeProtocol::fraction_sweep && cfg.fractions.empty())
    throw InvalidArgument("fraction sweep needs at least one fraction");
  if (method.empty() && embedding.method) method = std::string(method_name(*embedding.method));

  const auto rows_of = align_vertices(embedding, features);
  const RowMatrix x = detail::gather_rows(probe_inputs(embedding), rows_of);

  ProbeReport report;
  report.method = method;
  std::vector<LabelVector> labels;
  for (Feature f : cfg.features) {
    labels.push_back(log_bin_labels(features.column(f), cfg.bins, std::string(feature_name(f))));
    report.bin_edges[std::string(feature_name(f))] = labels.back().edges;
  }

  const std::vector<double> fractions =
      cfg.protocol == ProbeProtocol::kfold
          ? std::vector<double>{static_cast<double>(cfg.k - 1) / static_cast<double>(cfg.k)}
          : cfg.fractions;

  struct Cell {
    std::size_t feature, fraction, seed, fold;
  };
  std::vector<Cell> cells;
  for (std::size_t f = 0; f < cfg.features.size(); ++f)
    for (std::size_t r = 0; r < fractions.size(); ++r)
      for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
        for (std::size_t k = 0; k < cfg.k; ++k) cells.push_back({f, r, s, k});

  // Splits depend only on (feature, fraction, seed); k-fold partitions are
  // built once per (feature, seed).
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Split>> folds;
  if (cfg.protocol == ProbeProtocol::kfold)
    for (std::size_t f = 0; f < cfg.features.size(); ++f)
      for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
        folds[{f, s}] = kfold_splits(labels[f].labels, cfg.k,
                                     derive_seed(cfg.seeds[s], "kfold", feature_name(cfg.features[f])));

  report.rows.resize(cells.size());
  parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
    const Cell& c = cells[i];
    const Feature feature = cfg.features[c.feature];
    const std::uint64_t seed = cfg.seeds[c.seed];
    const std::uint64_t cell_seed =
        derive_seed(seed, "cell", feature_name(feature), c.fraction, c.fold);
    const Split split =
        cfg.protocol == ProbeProtocol::kfold
            ? folds.at({c.feature, c.seed})[c.fold]
            : split_labelled_fraction(labels[c.feature].labels, fractions[c.fraction],
                                      derive_seed(cell_seed, "split"));
    ProbeRow row = score_split(x, labels[c.feature].labels, cfg.bins, split, cfg.kind, cfg.weighted,
                               cfg.train, cell_seed);
    row.method = method;
    row.feature = feature;
    row.fraction = fractions[c.fraction];
    row.fold = c.fold;
    row.seed = seed;
    report.rows[i] = std::move(row);
  });

  const std::size_t per_cell = cfg.seeds.size() * cfg.k;
  for (std::size_t start = 0; start < report.rows.size(); start += per_cell) {
    ProbeSummary s;
    s.feature = report.rows[start].feature;
    s.fraction = report.rows[start].fraction;
    s.runs = per_cell;
    auto collect = [&](auto get) {
      std::vector<double> xs;
      for (std::size_t i = start; i < start + per_cell; ++i) xs.push_back(get(report.rows[i]));
      return mean_std(xs);
    };
    s.micro_f1 = collect([](const ProbeRow& r) { return r.micro_f1; });
    s.macro_f1 = collect([](const ProbeRow& r) { return r.macro_f1; });
    for (std::size_t b = 0; b < 3; ++b) {
      s.base_micro[b] = collect([b](const ProbeRow& r) { return r.base_micro[b]; });
      s.base_macro[b] = collect([b](const ProbeRow& r) { return r.base_macro[b]; });
      s.lift[b] = collect([b](const ProbeRow& r) { return r.lift[b]; });
    }
    report.summaries.push_back(s);
  }

  auto& meta = report.metadata;
  meta["version"] = kCodeVersion;
  meta["method"] = method;
  meta["vertices"] = x.rows();
  meta["dim"] = x.cols();
  meta["geometry"] = geometry_name(embedding.geometry);
  meta["probe_input"] = embedding.geometry == Geometry::poincare_polar ? "cartesian_disk" : "raw";
  meta["config"] = probe_config_json(cfg);
  meta["lift_definition"] = "100 * (micro_f1 - baseline micro_f1) / baseline micro_f1, same split";
  std::size_t constant = 0;
  for (const auto& r : report.rows) constant += r.constant_predictor;
  meta["constant_predictor_cells"] = constant;
  return report;
}

namespace detail {

inline nlohmann::ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json mean_std_json(const MeanStd& m) {
  return {{"mean", finite_or_null(m.mean)}, {"std", finite_or_null(m.std)}};
}

}  // namespace detail

inline void write_probe_csv(const ProbeReport& r, std::ostream& out) {
  out << "method,feature,fraction,fold,seed,micro_f1,macro_f1,base_uniform,base_strat,base_freq,"
         "lift_uniform,lift_strat,lift_freq\n";
  out << std::setprecision(17);
  for (const auto& row : r.rows) {
    out << row.method << ',' << feature_name(row.feature) << ',' << row.fraction << ',' << row.fold
        << ',' << row.seed << ',' << row.micro_f1 << ',' << row.macro_f1;
    for (double b : row.base_micro) out << ',' << b;
    for (double l : row.lift) out << ',' << l;
    out << '\n';
  }
}

inline nlohmann::ordered_json probe_report_json(const ProbeReport& r) {
  nlohmann::ordered_json j;
  j["metadata"] = r.metadata;
  nlohmann::ordered_json edges;
  for (const auto& [name, e] : r.bin_edges) edges[name] = e;
  j["bin_edges"] = edges;
  auto names = [](auto f) {
    nlohmann::ordered_json o;
    for (std::size_t b = 0; b < kBaselines.size(); ++b) o[std::string(baseline_name(kBaselines[b]))] = f(b);
    return o;
  };
  nlohmann::ordered_json summaries = nlohmann::ordered_json::array();
  for (const auto& s : r.summaries) {
    summaries.push_back({{"feature", feature_name(s.feature)},
                         {"fraction", s.fraction},
                         {"runs", s.runs},
                         {"micro_f1", detail::mean_std_json(s.micro_f1)},
                         {"macro_f1", detail::mean_std_json(s.macro_f1)},
                         {"baseline_micro_f1", names([&](std::size_t b) { return detail::mean_std_json(s.base_micro[b]); })},
                         {"baseline_macro_f1", names([&](std::size_t b) { return detail::mean_std_json(s.base_macro[b]); })},
                         {"lift_percent", names([&](std::size_t b) { return detail::mean_std_json(s.lift[b]); })}});
  }
  j["summaries"] = summaries;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    std::vector<std::vector<std::size_t>> cm(static_cast<std::size_t>(row.confusion.classes));
    for (int t = 0; t < row.confusion.classes; ++t)
      for (int p = 0; p < row.confusion.classes; ++p) cm[static_cast<std::size_t>(t)].push_back(row.confusion.at(t, p));
    rows.push_back({{"feature", feature_name(row.feature)},
                    {"fraction", row.fraction},
                    {"fold", row.fold},
                    {"seed", row.seed},
                    {"train_size", row.train_size},
                    {"test_size", row.test_size},
                    {"micro_f1", row.micro_f1},
                    {"macro_f1", row.macro_f1},
                    {"baseline_micro_f1", names([&](std::size_t b) { return row.base_micro[b]; })},
                    {"baseline_macro_f1", names([&](std::size_t b) { return row.base_macro[b]; })},
                    {"lift_percent", names([&](std::size_t b) { return detail::finite_or_null(row.lift[b]); })},
                    {"constant_predictor", row.constant_predictor},
                    {"confusion", cm}});
  }
  j["rows"] = rows;
  return j;
}

}  // namespace embprobe
