#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "embprobe/features.hpp"
#include "embprobe/generators.hpp"
#include "embprobe/probe.hpp"

using namespace embprobe;

namespace {

// One-hot encoding of every feature's bin label.
Embedding oracle_embedding(const FeatureTable& t, int bins = 6) {
  Embedding e;
  e.vertices = t.vertices;
  e.matrix = RowMatrix::Zero(static_cast<Eigen::Index>(t.size()), 7 * bins);
  for (std::size_t f = 0; f < kAllFeatures.size(); ++f) {
    const auto lv = log_bin_labels(t.column(kAllFeatures[f]), bins);
    for (std::size_t i = 0; i < t.size(); ++i)
      e.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f) * bins + lv.labels[i]) = 1;
  }
  return e;
}

// Indicator columns of a single feature's bin label.
Embedding one_feature_oracle(const FeatureTable& t, Feature f, int bins = 6) {
  Embedding e;
  e.vertices = t.vertices;
  e.matrix = RowMatrix::Zero(static_cast<Eigen::Index>(t.size()), bins);
  const auto lv = log_bin_labels(t.column(f), bins);
  for (std::size_t i = 0; i < t.size(); ++i) e.matrix(static_cast<Eigen::Index>(i), lv.labels[i]) = 1;
  return e;
}

ProbeConfig quick_config() {
  ProbeConfig cfg;
  cfg.kind = ProbeKind::logreg;
  cfg.seeds = {0, 1};
  cfg.k = 3;
  return cfg;
}

}  // namespace

// Karate has singleton bins, which no split can score perfectly; this
// graph has at least two vertices in every bin of every feature.
TEST(Probe, OracleEmbeddingIsPerfect) {
  const auto t = compute_all(generators::stochastic_block_model({300, 300}, 0.05, 0.005, 0));
  ProbeConfig cfg = quick_config();
  for (Feature f : kAllFeatures) {
    cfg.features = {f};
    const auto r = run_probe_experiment(one_feature_oracle(t, f), t, cfg, "oracle");
    EXPECT_EQ(r.summaries.front().micro_f1.mean, 1.0) << feature_name(f);
  }
}

TEST(Probe, ReportShape) {
  const auto t = compute_all(generators::karate_club());
  ProbeConfig cfg = quick_config();
  cfg.features = {Feature::DG, Feature::BC};
  const auto r = run_probe_experiment(oracle_embedding(t), t, cfg);
  EXPECT_EQ(r.rows.size(), 2u * 2u * 3u);
  EXPECT_EQ(r.summaries.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_DOUBLE_EQ(row.fraction, 2.0 / 3.0);
    EXPECT_EQ(row.train_size + row.test_size, 34u);
    EXPECT_EQ(row.confusion.total(), row.test_size);
    EXPECT_GE(row.micro_f1, 0.0);
    EXPECT_LE(row.macro_f1, 1.0);
    for (std::size_t b = 0; b < 3; ++b)
      if (row.base_micro[b] > 0)
        EXPECT_NEAR(row.lift[b], 100 * (row.micro_f1 - row.base_micro[b]) / row.base_micro[b], 1e-9);
  }
  EXPECT_EQ(r.summaries[0].runs, 6u);
  EXPECT_EQ(r.bin_edges.at("DG").size(), 7u);
}

TEST(Probe, FractionSweepRows) {
  const auto t = compute_all(generators::karate_club());
  ProbeConfig cfg = quick_config();
  cfg.protocol = ProbeProtocol::fraction_sweep;
  cfg.fractions = {0.2, 0.5};
  cfg.features = {Feature::EC};
  cfg.seeds = {3};
  cfg.k = 2;
  const auto r = run_probe_experiment(oracle_embedding(t), t, cfg);
  ASSERT_EQ(r.summaries.size(), 2u);
  EXPECT_DOUBLE_EQ(r.summaries[0].fraction, 0.2);
  EXPECT_DOUBLE_EQ(r.summaries[1].fraction, 0.5);
  EXPECT_LT(r.rows[0].train_size, r.rows[2].train_size);
}

TEST(Probe, DeterministicAcrossWorkers) {
  const auto t = compute_all(generators::karate_club());
  ProbeConfig cfg = quick_config();
  cfg.kind = ProbeKind::mlp1;
  cfg.train.epochs = 20;
  const auto e = oracle_embedding(t);
  auto csv = [&](std::size_t workers) {
    cfg.workers = workers;
    std::ostringstream out;
    write_probe_csv(run_probe_experiment(e, t, cfg, "x"), out);
    return out.str();
  };
  EXPECT_EQ(csv(1), csv(3));
}

TEST(Probe, MismatchListsMissingVertices) {
  const auto t = compute_all(generators::karate_club());
  Embedding e = oracle_embedding(t);
  e.vertices[3] = "ghost";
  try {
    run_probe_experiment(e, t, quick_config());
    FAIL();
  } catch (const VertexMismatchError& err) {
    EXPECT_EQ(err.missing(), (std::vector<std::string>{"3", "ghost"}));
    EXPECT_NE(std::string(err.what()).find("ghost"), std::string::npos);
  }
}

TEST(Probe, PoincareInputsAreCartesian) {
  Embedding e;
  e.geometry = Geometry::poincare_polar;
  e.matrix.resize(2, 2);
  e.matrix << 0.5, 0.0, 0.25, std::numbers::pi / 2;
  const RowMatrix x = probe_inputs(e);
  EXPECT_NEAR(x(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(x(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(x(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(x(1, 1), 0.25, 1e-15);
}

TEST(Probe, CsvAndJsonOutputs) {
  const auto t = compute_all(generators::karate_club());
  ProbeConfig cfg = quick_config();
  cfg.features = {Feature::TC};
  const auto r = run_probe_experiment(oracle_embedding(t), t, cfg, "oracle");
  std::ostringstream out;
  write_probe_csv(r, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "method,feature,fraction,fold,seed,micro_f1,macro_f1,base_uniform,base_strat,base_freq,"
            "lift_uniform,lift_strat,lift_freq");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, r.rows.size());

  const auto j = probe_report_json(r);
  EXPECT_EQ(j["rows"].size(), r.rows.size());
  EXPECT_EQ(j["rows"][0]["confusion"].size(), 6u);
  EXPECT_EQ(j["metadata"]["method"], "oracle");
  EXPECT_TRUE(j["summaries"][0].contains("micro_f1"));
}

TEST(Probe, LiftIsUndefinedForAZeroBaseline) {
  EXPECT_TRUE(std::isnan(lift_percent(0.5, 0.0)));
  EXPECT_DOUBLE_EQ(lift_percent(0.6, 0.4), 50.0);
  const auto ms = mean_std({1.0, 3.0});
  EXPECT_DOUBLE_EQ(ms.mean, 2.0);
  EXPECT_DOUBLE_EQ(ms.std, 1.0);
}

TEST(Probe, RejectsEmptyConfig) {
  const auto t = compute_all(generators::karate_club());
  ProbeConfig cfg = quick_config();
  cfg.seeds.clear();
  EXPECT_THROW(run_probe_experiment(oracle_embedding(t), t, cfg), InvalidArgument);
}
