// embprobe command-line front end.
//
//   embprobe features GRAPH -o features.csv
//   embprobe embed GRAPH --method deepwalk -o emb.txt [--set key=value]...
//   embprobe probe EMBEDDING FEATURES -o report [--features DG,EC] ...
//   embprobe project EMBEDDING [--features FEATURES --color EC] -o tsne.csv
//   embprobe run CONFIG
//
// Exit status: 0 success, 1 computation or cell failure, 2 usage or I/O
// error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "embprobe/embedding.hpp"
#include "embprobe/errors.hpp"
#include "embprobe/experiment.hpp"
#include "embprobe/features.hpp"
#include "embprobe/graph.hpp"
#include "embprobe/methods.hpp"
#include "embprobe/probe.hpp"
#include "embprobe/tsne.hpp"

namespace {

using namespace embprobe;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  out << text;
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

FeatureTable read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open feature file '" + path + "'");
  return read_feature_csv(in);
}

std::vector<Feature> parse_features(const std::string& list) {
  std::vector<Feature> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    auto f = parse_feature(item);
    if (!f) throw InvalidArgument("unknown feature '" + item + "'");
    out.push_back(*f);
  }
  if (out.empty()) throw InvalidArgument("empty feature list");
  return out;
}

int cmd_features(const std::string& graph_path, const std::string& out_path, std::size_t workers) {
  const auto loaded = load_edge_list_file(graph_path);
  FeatureOptions opt;
  opt.workers = workers;
  const FeatureTable t = compute_all(loaded.graph, opt);
  std::ostringstream csv;
  write_feature_csv(t, csv);
  write_file(out_path, csv.str());
  write_file(out_path + ".meta.json",
             json_text({{"version", kCodeVersion},
                        {"graph", std::filesystem::path(graph_path).filename().string()},
                        {"vertices", loaded.graph.vertex_count()},
                        {"edges", loaded.graph.edge_count()},
                        {"self_loops_dropped", loaded.report.self_loops_dropped},
                        {"duplicates_dropped", loaded.report.duplicates_dropped},
                        {"damping", opt.damping},
                        {"tol", opt.iteration.tol},
                        {"max_iter", opt.iteration.max_iter}}));
  std::cout << loaded.graph.vertex_count() << " vertices, " << loaded.graph.edge_count()
            << " edges\n";
  std::cout << std::left << std::setw(5) << "feat" << std::setw(14) << "min" << std::setw(14)
            << "max"
            << "zeros\n";
  for (Feature f : kAllFeatures) {
    const auto col = t.column(f);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    const auto zeros = std::count(col.begin(), col.end(), 0.0);
    std::cout << std::setw(5) << feature_name(f) << std::setw(14) << *lo << std::setw(14) << *hi
              << zeros << "\n";
  }
  return 0;
}

int cmd_embed(const std::string& graph_path, const std::string& method, std::uint64_t seed,
              const std::vector<std::string>& sets, const std::string& out_path,
              std::size_t workers) {
  const auto tag = parse_method(method);
  if (!tag) throw InvalidArgument("unknown method '" + method + "'");
  MethodParams params = method_defaults(*tag);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
    apply_override(params, kv.substr(0, eq), kv.substr(eq + 1));
  }
  const auto loaded = load_edge_list_file(graph_path);
  const MethodOutput out = run_method(params, loaded.graph, seed, workers);
  write_embedding_file(out.embedding, out_path);
  write_file(out_path + ".meta.json",
             json_text({{"version", kCodeVersion},
                        {"graph", std::filesystem::path(graph_path).filename().string()},
                        {"seed", seed},
                        {"config", method_params_json(params)},
                        {"training", out.training}}));
  std::cout << "wrote " << out.embedding.size() << " x " << out.embedding.dim() << " "
            << geometry_name(out.embedding.geometry) << " embedding to " << out_path << "\n";
  return 0;
}

int cmd_probe(const std::string& embedding_path, const std::string& features_path,
              const ProbeConfig& cfg, const std::string& method, const std::string& prefix) {
  const Embedding e = read_embedding_file(embedding_path);
  const FeatureTable t = read_features(features_path);
  const ProbeReport r = run_probe_experiment(e, t, cfg, method);
  std::ostringstream csv;
  write_probe_csv(r, csv);
  write_file(prefix + ".csv", csv.str());
  write_file(prefix + ".csv.meta.json",
             json_text({{"version", kCodeVersion}, {"config", r.metadata["config"]}}));
  write_file(prefix + ".json", json_text(probe_report_json(r)));
  std::cout << std::left << std::setw(5) << "feat" << std::setw(10) << "fraction" << std::setw(18)
            << "micro_f1" << std::setw(18) << "macro_f1"
            << "lift_freq%\n";
  std::cout << std::fixed << std::setprecision(3);
  for (const auto& s : r.summaries)
    std::cout << std::setw(5) << feature_name(s.feature) << std::setw(10) << s.fraction
              << s.micro_f1.mean << " +- " << std::setw(9) << s.micro_f1.std << s.macro_f1.mean
              << " +- " << std::setw(9) << s.macro_f1.std << s.lift[2].mean << "\n";
  return 0;
}

int cmd_project(const std::string& embedding_path, const std::string& features_path,
                const std::string& color, int bins, const TsneConfig& cfg,
                const std::string& out_path) {
  Embedding e = read_embedding_file(embedding_path);
  std::vector<Label> labels(e.size(), 0);
  const bool coloured = !features_path.empty();
  if (coloured) {
    const FeatureTable t = read_features(features_path);
    const auto f = parse_feature(color);
    if (!f) throw InvalidArgument("unknown feature '" + color + "'");
    const auto rows = align_vertices(e, t);
    const auto lv = log_bin_labels(t.column(*f), bins);
    for (std::size_t i = 0; i < rows.size(); ++i) labels[rows[i]] = lv.labels[i];
  }
  const auto keep = stratified_subsample(labels, kMaxTsnePoints, cfg.seed);
  if (keep.size() < e.size()) {
    std::cout << "subsampling " << keep.size() << " of " << e.size() << " vertices\n";
    Embedding sub = e;
    sub.matrix = detail::gather_rows(e.matrix, keep);
    sub.vertices.clear();
    std::vector<Label> sub_labels;
    for (std::size_t i : keep) {
      sub.vertices.push_back(e.vertices[i]);
      sub_labels.push_back(labels[i]);
    }
    e = std::move(sub);
    labels = std::move(sub_labels);
  }
  const Projection2D p = tsne(e, cfg);
  std::ostringstream csv;
  write_projection_csv(export_projection(p, labels), csv);
  write_file(out_path, csv.str());
  nlohmann::ordered_json meta = {{"version", kCodeVersion},
                                 {"points", p.size()},
                                 {"perplexity", cfg.perplexity},
                                 {"iterations", cfg.iterations},
                                 {"learning_rate", cfg.learning_rate},
                                 {"early_exaggeration", cfg.exaggeration},
                                 {"exaggeration_iterations", cfg.exaggeration_iters},
                                 {"momentum", {cfg.initial_momentum, cfg.final_momentum}},
                                 {"init_sigma", cfg.init_sigma},
                                 {"seed", cfg.seed},
                                 {"kl", p.kl}};
  if (e.method) meta["method"] = method_name(*e.method);
  if (coloured) {
    meta["color"] = color;
    const std::set<Label> distinct(labels.begin(), labels.end());
    meta["silhouette"] = distinct.size() >= 2
                             ? nlohmann::ordered_json(silhouette(p.coords, labels, cfg.workers))
                             : nlohmann::ordered_json(nullptr);
  }
  write_file(out_path + ".meta.json", json_text(meta));
  std::cout << "KL " << p.kl;
  if (meta.contains("silhouette") && !meta["silhouette"].is_null())
    std::cout << ", silhouette " << meta["silhouette"].get<double>();
  std::cout << "\n";
  return 0;
}

int cmd_run(const std::string& config_path) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  // Validate every method's overrides before any work.
  for (MethodTag m : cfg.methods) effective_method(cfg, m);
  const RunSummary s = run_experiment(cfg);
  std::cout << s.cells << " cells: " << s.computed << " computed, " << s.skipped << " skipped, "
            << s.failed << " failed\n";
  return s.failed ? kExitFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph embeddings, topological features and probe classifiers"};
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t workers = 1;
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string graph_path, out_path;
  auto* features = app.add_subcommand("features", "Compute the seven topological features");
  features->add_option("graph", graph_path, "Edge list")->required();
  features->add_option("-o,--output", out_path, "Output CSV")->required();

  std::string method = "deepwalk";
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  auto* embed = app.add_subcommand("embed", "Train an embedding");
  embed->add_option("graph", graph_path, "Edge list")->required();
  embed->add_option("-m,--method", method, "deepwalk|node2vec_h|node2vec_s|poincare|sdne");
  embed->add_option("-s,--seed", seed, "Root seed");
  embed->add_option("--set", sets, "Hyperparameter override key=value (repeatable)");
  embed->add_option("-o,--output", out_path, "Output embedding file")->required();

  std::string embedding_path, features_path, feature_list = "DG,DC,TC,CLU,EC,PR,BC";
  std::string probe_kind = "mlp1", protocol = "kfold", method_label;
  ProbeConfig probe_cfg;
  bool unweighted = false;
  auto* probe = app.add_subcommand("probe", "Train probe classifiers on an embedding");
  probe->add_option("embedding", embedding_path, "Embedding file")->required();
  probe->add_option("feature_csv", features_path, "Feature CSV")->required();
  probe->add_option("--features", feature_list, "Comma-separated feature tags");
  probe->add_option("--probe", probe_kind, "logreg|linear_svm|mlp1|mlp2");
  probe->add_option("--protocol", protocol, "kfold|fraction_sweep");
  probe->add_option("--fractions", probe_cfg.fractions, "Labelled fractions")->delimiter(',');
  probe->add_option("-k,--folds", probe_cfg.k, "Folds (or splits per fraction)");
  probe->add_option("--seeds", probe_cfg.seeds, "Seeds")->delimiter(',');
  probe->add_option("--bins", probe_cfg.bins, "Label bins");
  probe->add_option("--epochs", probe_cfg.train.epochs, "Probe training epochs (0 = default)");
  probe->add_option("--lr", probe_cfg.train.lr, "Probe learning rate (0 = default)");
  probe->add_flag("--unweighted", unweighted, "Disable balanced class weights");
  probe->add_option("--method", method_label, "Method name for the report");
  probe->add_option("-o,--output", out_path, "Output prefix (.csv, .json)")->required();

  std::string color = "EC";
  TsneConfig tsne_cfg;
  int bins = 6;
  auto* project = app.add_subcommand("project", "t-SNE projection of an embedding");
  project->add_option("embedding", embedding_path, "Embedding file")->required();
  project->add_option("--features", features_path, "Feature CSV for colouring");
  project->add_option("--color", color, "Feature used for labels");
  project->add_option("--bins", bins, "Label bins");
  project->add_option("--perplexity", tsne_cfg.perplexity, "Perplexity");
  project->add_option("--iterations", tsne_cfg.iterations, "Iterations");
  project->add_option("--seed", tsne_cfg.seed, "Seed");
  project->add_option("-o,--output", out_path, "Output CSV")->required();

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a full experiment from a config file");
  run->add_option("config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*features) return cmd_features(graph_path, out_path, workers);
    if (*embed) return cmd_embed(graph_path, method, seed, sets, out_path, workers);
    if (*probe) {
      probe_cfg.features = parse_features(feature_list);
      auto kind = parse_probe_kind(probe_kind);
      if (!kind) throw InvalidArgument("unknown probe '" + probe_kind + "'");
      probe_cfg.kind = *kind;
      auto proto = parse_protocol(protocol);
      if (!proto) throw InvalidArgument("unknown protocol '" + protocol + "'");
      probe_cfg.protocol = *proto;
      probe_cfg.weighted = !unweighted;
      probe_cfg.workers = workers;
      return cmd_probe(embedding_path, features_path, probe_cfg, method_label, out_path);
    }
    if (*project) {
      tsne_cfg.workers = workers;
      return cmd_project(embedding_path, features_path, color, bins, tsne_cfg, out_path);
    }
    if (*run) return cmd_run(config_path);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const VertexMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
