#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "embprobe/errors.hpp"
#include "embprobe/features.hpp"
#include "embprobe/graph.hpp"
#include "embprobe/methods.hpp"
#include "embprobe/probe.hpp"
#include "embprobe/random.hpp"
#include "embprobe/tsne.hpp"

namespace embprobe {

namespace fs = std::filesystem;

struct ExperimentConfig {
  std::string dataset;
  std::vector<MethodTag> methods{MethodTag::deepwalk};
  std::map<MethodTag, std::vector<std::pair<std::string, std::string>>> overrides;
  ProbeConfig probe;
  std::string output = "out";
  bool tsne = false;
  TsneConfig tsne_config;
  std::size_t workers = 1;
};

class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : Error(line ? "config line " + std::to_string(line) + ": " + what : what), line_(line) {}

  // 1-based line of the offending entry, 0 when not tied to one line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw InvalidArgument("'" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace detail

// INI-style config:
//
//   [experiment]          dataset, methods, features, bins, protocol,
//                         fractions, k, probe, seeds, output, workers,
//                         weighted, tsne
//   [probe]               epochs, lr, l2, batch
//   [tsne]                perplexity, iterations, learning_rate
//   [deepwalk] ... [sdne] per-method overrides (see method_override_keys)
//
// '#' and ';' start comments. Unknown sections and keys are errors.
inline ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "probe" && section != "tsne" && !parse_method(section))
        throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(line_no, "key '" + key + "' outside any section");
    if (seen.count(section + "." + key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
    seen[section + "." + key] = line_no;

    try {
      if (section == "experiment") {
        auto& p = cfg.probe;
        if (key == "dataset") cfg.dataset = value;
        else if (key == "output") cfg.output = value;
        else if (key == "methods") {
          cfg.methods.clear();
          for (const auto& m : detail::split_list(value)) {
            auto tag = parse_method(m);
            if (!tag) throw InvalidArgument("unknown method '" + m + "'");
            cfg.methods.push_back(*tag);
          }
        } else if (key == "features") {
          p.features.clear();
          for (const auto& f : detail::split_list(value)) {
            auto feature = parse_feature(f);
            if (!feature) throw InvalidArgument("unknown feature '" + f + "'");
            p.features.push_back(*feature);
          }
        } else if (key == "bins") p.bins = static_cast<int>(detail::parse_count(key, value));
        else if (key == "protocol") {
          auto proto = parse_protocol(value);
          if (!proto) throw InvalidArgument("protocol must be kfold or fraction_sweep");
          p.protocol = *proto;
        } else if (key == "fractions") {
          p.fractions.clear();
          for (const auto& f : detail::split_list(value)) p.fractions.push_back(detail::parse_real(key, f));
        } else if (key == "k") p.k = detail::parse_count(key, value);
        else if (key == "probe") {
          auto kind = parse_probe_kind(value);
          if (!kind) throw InvalidArgument("unknown probe '" + value + "'");
          p.kind = *kind;
        } else if (key == "seeds") {
          p.seeds.clear();
          for (const auto& s : detail::split_list(value)) p.seeds.push_back(detail::parse_count(key, s));
        } else if (key == "workers") cfg.workers = detail::parse_count(key, value);
        else if (key == "weighted") p.weighted = detail::parse_bool(key, value);
        else if (key == "tsne") cfg.tsne = detail::parse_bool(key, value);
        else throw InvalidArgument("unknown key '" + key + "' in [experiment]");
      } else if (section == "probe") {
        auto& t = cfg.probe.train;
        if (key == "epochs") t.epochs = detail::parse_count(key, value);
        else if (key == "lr") t.lr = detail::parse_real(key, value);
        else if (key == "l2") t.l2 = detail::parse_real(key, value);
        else if (key == "batch") t.batch = detail::parse_count(key, value);
        else throw InvalidArgument("unknown key '" + key + "' in [probe]");
      } else if (section == "tsne") {
        auto& t = cfg.tsne_config;
        if (key == "perplexity") t.perplexity = detail::parse_real(key, value);
        else if (key == "iterations") t.iterations = detail::parse_count(key, value);
        else if (key == "learning_rate") t.learning_rate = detail::parse_real(key, value);
        else throw InvalidArgument("unknown key '" + key + "' in [tsne]");
      } else {
        const MethodTag tag = *parse_method(section);
        MethodParams probe = method_defaults(tag);
        apply_override(probe, key, value);  // validates key and value now
        cfg.overrides[tag].emplace_back(key, value);
      }
    } catch (const InvalidArgument& e) {
      throw ConfigError(line_no, e.what());
    }
  }

  if (cfg.dataset.empty()) throw ConfigError(0, "[experiment] dataset is required");
  if (cfg.methods.empty()) throw ConfigError(0, "no methods configured");
  if (cfg.probe.features.empty()) throw ConfigError(0, "no features configured");
  if (cfg.probe.seeds.empty()) throw ConfigError(0, "seeds must be nonempty");
  if (cfg.probe.k < 2) throw ConfigError(0, "k must be >= 2");
  if (cfg.probe.bins < 1) throw ConfigError(0, "bins must be >= 1");
  for (double f : cfg.probe.fractions)
    if (!(f > 0 && f < 1)) throw ConfigError(0, "fractions must lie in (0, 1)");
  cfg.probe.workers = cfg.workers;
  cfg.tsne_config.workers = cfg.workers;
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
  ExperimentConfig cfg = parse_experiment_config(in);
  // Relative paths are relative to the config file.
  const fs::path base = fs::path(path).parent_path();
  if (fs::path(cfg.dataset).is_relative()) cfg.dataset = (base / cfg.dataset).lexically_normal().string();
  if (fs::path(cfg.output).is_relative()) cfg.output = (base / cfg.output).lexically_normal().string();
  return cfg;
}

inline MethodParams effective_method(const ExperimentConfig& cfg, MethodTag tag) {
  MethodParams p = method_defaults(tag);
  if (auto it = cfg.overrides.find(tag); it != cfg.overrides.end())
    for (const auto& [k, v] : it->second) apply_override(p, k, v);
  return p;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

inline std::string config_hash(const nlohmann::ordered_json& j) { return hex64(fnv1a(j.dump())); }

inline nlohmann::ordered_json experiment_config_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["dataset"] = fs::path(cfg.dataset).filename().string();
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  for (MethodTag m : cfg.methods) methods.push_back(method_params_json(effective_method(cfg, m)));
  j["methods"] = methods;
  j["probe"] = probe_config_json(cfg.probe);
  j["tsne"] = cfg.tsne;
  if (cfg.tsne) {
    j["tsne_perplexity"] = cfg.tsne_config.perplexity;
    j["tsne_iterations"] = cfg.tsne_config.iterations;
    j["tsne_learning_rate"] = cfg.tsne_config.learning_rate;
  }
  return j;
}

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::ios_base::failure("failed writing '" + path.string() + "'");
}

inline std::optional<nlohmann::json> read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

inline std::string dump_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

struct RunSummary {
  std::size_t cells = 0;
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

// Runs every (method, feature) cell. Embeddings are trained once per
// (method, seed) and cached next to the reports; a cell whose report
// sidecar carries the same hash is reused. Writes <output>/manifest.json.
// The manifest and all outputs depend only on the config and data.
inline RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
  const fs::path root(cfg.output);
  fs::create_directories(root);
  const LoadedGraph loaded = load_edge_list_file(cfg.dataset);
  const Graph& g = loaded.graph;
  log << "loaded " << cfg.dataset << ": " << g.vertex_count() << " vertices, " << g.edge_count()
      << " edges\n";

  const nlohmann::ordered_json effective = experiment_config_json(cfg);
  const nlohmann::ordered_json stamp = {{"version", kCodeVersion}};

  // Features, shared by all cells.
  const fs::path features_path = root / "features.csv";
  FeatureTable features;
  const nlohmann::ordered_json features_meta = {
      {"version", kCodeVersion}, {"dataset", effective["dataset"]}, {"vertices", g.vertex_count()},
      {"edges", g.edge_count()}, {"damping", 0.85}, {"tol", 1e-8}};
  const std::string features_hash = config_hash(features_meta);
  if (auto meta = detail::read_json(features_path.string() + ".meta.json");
      meta && meta->value("hash", "") == features_hash && fs::exists(features_path)) {
    std::ifstream in(features_path);
    features = read_feature_csv(in);
  } else {
    FeatureOptions fo;
    fo.workers = cfg.workers;
    features = compute_all(g, fo);
    std::ostringstream csv;
    write_feature_csv(features, csv);
    detail::write_text(features_path, csv.str());
    auto m = features_meta;
    m["hash"] = features_hash;
    detail::write_text(features_path.string() + ".meta.json", detail::dump_json(m));
  }

  RunSummary summary;
  nlohmann::ordered_json manifest;
  manifest["version"] = kCodeVersion;
  manifest["config_hash"] = config_hash(effective);
  manifest["config"] = effective;
  manifest["artifacts"] = {"features.csv", "features.csv.meta.json"};
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();

  for (MethodTag tag : cfg.methods) {
    const MethodParams params = effective_method(cfg, tag);
    const std::string name(method_name(tag));
    const fs::path dir = root / name;
    fs::create_directories(dir);
    const nlohmann::ordered_json method_json = method_params_json(params);

    // Per-feature cell hashes decide what needs computing.
    std::vector<std::string> hashes;
    std::vector<bool> done;
    for (Feature f : cfg.probe.features) {
      ProbeConfig one = cfg.probe;
      one.features = {f};
      nlohmann::ordered_json cell = {{"dataset", effective["dataset"]},
                                     {"method", method_json},
                                     {"probe", probe_config_json(one)},
                                     {"tsne", effective["tsne"]},
                                     {"version", kCodeVersion}};
      if (cfg.tsne) cell["tsne_config"] = {effective["tsne_perplexity"], effective["tsne_iterations"],
                                           effective["tsne_learning_rate"]};
      hashes.push_back(config_hash(cell));
      const std::string stem = std::string(feature_name(f));
      auto meta = detail::read_json(dir / (stem + ".json"));
      done.push_back(meta && meta->contains("metadata") &&
                     (*meta)["metadata"].value("cell_hash", "") == hashes.back() &&
                     fs::exists(dir / (stem + ".csv")));
    }

    std::vector<Embedding> embeddings;
    std::string method_error;
    const bool need_work = std::find(done.begin(), done.end(), false) != done.end();
    if (need_work) {
      try {
        for (std::uint64_t seed : cfg.probe.seeds) {
          const std::string stem = "embedding_seed" + std::to_string(seed);
          const fs::path emb_path = dir / (stem + ".txt");
          const fs::path meta_path = dir / (stem + ".txt.meta.json");
          nlohmann::ordered_json meta = {{"version", kCodeVersion},
                                         {"dataset", effective["dataset"]},
                                         {"seed", seed},
                                         {"config", method_json}};
          const std::string h = config_hash(meta);
          if (auto old = detail::read_json(meta_path); old && old->value("hash", "") == h && fs::exists(emb_path)) {
            embeddings.push_back(read_embedding_file(emb_path.string()));
            continue;
          }
          log << "training " << name << " (seed " << seed << ")\n";
          MethodOutput out = run_method(params, g, seed, cfg.workers);
          std::ostringstream text;
          write_embedding(out.embedding, text);
          detail::write_text(emb_path, text.str());
          meta["hash"] = h;
          meta["training"] = out.training;
          detail::write_text(meta_path, detail::dump_json(meta));
          embeddings.push_back(std::move(out.embedding));
        }
      } catch (const std::exception& e) {
        method_error = e.what();
      }
    }

    for (std::size_t fi = 0; fi < cfg.probe.features.size(); ++fi) {
      const Feature f = cfg.probe.features[fi];
      const std::string stem(feature_name(f));
      nlohmann::ordered_json cell = {{"method", name}, {"feature", stem}, {"hash", hashes[fi]}};
      std::vector<std::string> artifacts{name + "/" + stem + ".csv", name + "/" + stem + ".csv.meta.json",
                                         name + "/" + stem + ".json"};
      ++summary.cells;
      if (done[fi]) {
        ++summary.skipped;
        log << "skip " << name << "/" << stem << " (up to date)\n";
      } else {
        try {
          if (!method_error.empty()) throw Error(method_error);
          // One report over all seeds: seed s probes the embedding of seed s.
          ProbeReport merged;
          for (std::size_t s = 0; s < cfg.probe.seeds.size(); ++s) {
            ProbeConfig one = cfg.probe;
            one.features = {f};
            one.seeds = {cfg.probe.seeds[s]};
            ProbeReport r = run_probe_experiment(embeddings[s], features, one, name);
            if (s == 0) {
              merged = std::move(r);
            } else {
              merged.rows.insert(merged.rows.end(), r.rows.begin(), r.rows.end());
            }
          }
          // Summaries over every (seed, fold) row of each fraction.
          merged.summaries.clear();
          std::map<double, std::vector<const ProbeRow*>> by_fraction;
          for (const auto& row : merged.rows) by_fraction[row.fraction].push_back(&row);
          for (const auto& [fraction, rows] : by_fraction) {
            ProbeSummary ps;
            ps.feature = f;
            ps.fraction = fraction;
            ps.runs = rows.size();
            auto collect = [&](auto get) {
              std::vector<double> xs;
              for (const ProbeRow* r : rows) xs.push_back(get(*r));
              return mean_std(xs);
            };
            ps.micro_f1 = collect([](const ProbeRow& r) { return r.micro_f1; });
            ps.macro_f1 = collect([](const ProbeRow& r) { return r.macro_f1; });
            for (std::size_t b = 0; b < 3; ++b) {
              ps.base_micro[b] = collect([b](const ProbeRow& r) { return r.base_micro[b]; });
              ps.base_macro[b] = collect([b](const ProbeRow& r) { return r.base_macro[b]; });
              ps.lift[b] = collect([b](const ProbeRow& r) { return r.lift[b]; });
            }
            merged.summaries.push_back(ps);
          }
          merged.metadata["config"] = probe_config_json(cfg.probe);
          merged.metadata["config"]["features"] = {stem};
          merged.metadata["method_config"] = method_json;
          merged.metadata["dataset"] = effective["dataset"];
          if (tag == MethodTag::sdne)
            merged.metadata["deviations"] = {"sdne initialized with Glorot-uniform weights instead of deep belief network pretraining"};
          merged.metadata["cell_hash"] = hashes[fi];

          nlohmann::ordered_json report = probe_report_json(merged);
          if (cfg.tsne) {
            // Projection of the first seed's embedding, coloured by this
            // feature's labels.
            const Embedding& e = embeddings.front();
            const auto rows_of = align_vertices(e, features);
            const auto labels = log_bin_labels(features.column(f), cfg.probe.bins).labels;
            std::vector<Label> aligned(e.size());
            for (std::size_t i = 0; i < rows_of.size(); ++i) aligned[rows_of[i]] = labels[i];
            const auto keep = stratified_subsample(aligned, kMaxTsnePoints, cfg.probe.seeds.front());
            Embedding sub = e;
            sub.matrix = detail::gather_rows(e.matrix, keep);
            sub.vertices.clear();
            std::vector<Label> sub_labels;
            for (std::size_t i : keep) {
              sub.vertices.push_back(e.vertices[i]);
              sub_labels.push_back(aligned[i]);
            }
            TsneConfig tc = cfg.tsne_config;
            tc.seed = derive_seed(cfg.probe.seeds.front(), "tsne");
            const Projection2D proj = tsne(sub, tc);
            std::ostringstream csv;
            write_projection_csv(export_projection(proj, sub_labels), csv);
            detail::write_text(dir / ("tsne_" + stem + ".csv"), csv.str());
            artifacts.push_back(name + "/tsne_" + stem + ".csv");
            std::set<Label> distinct(sub_labels.begin(), sub_labels.end());
            report["projection"] = {
                {"file", "tsne_" + stem + ".csv"},
                {"points", proj.size()},
                {"perplexity", proj.perplexity},
                {"iterations", tc.iterations},
                {"learning_rate", tc.learning_rate},
                {"early_exaggeration", tc.exaggeration},
                {"kl", proj.kl},
                {"silhouette", distinct.size() >= 2
                                   ? nlohmann::ordered_json(silhouette(proj.coords, sub_labels, cfg.workers))
                                   : nlohmann::ordered_json(nullptr)}};
          }
          std::ostringstream csv;
          write_probe_csv(merged, csv);
          detail::write_text(dir / (stem + ".csv"), csv.str());
          detail::write_text(dir / (stem + ".csv.meta.json"),
                             detail::dump_json({{"version", kCodeVersion},
                                                {"cell_hash", hashes[fi]},
                                                {"config", merged.metadata["config"]},
                                                {"method_config", method_json}}));
          detail::write_text(dir / (stem + ".json"), detail::dump_json(report));
          ++summary.computed;
          log << "done " << name << "/" << stem << "\n";
        } catch (const std::exception& e) {
          ++summary.failed;
          cell["status"] = "failed";
          cell["error"] = e.what();
          log << "FAILED " << name << "/" << stem << ": " << e.what() << "\n";
          cells.push_back(cell);
          continue;
        }
      }
      if (cfg.tsne) {
        const std::string t = name + "/tsne_" + stem + ".csv";
        if (std::find(artifacts.begin(), artifacts.end(), t) == artifacts.end()) artifacts.push_back(t);
      }
      cell["status"] = "ok";
      cell["artifacts"] = artifacts;
      cells.push_back(cell);
    }
    nlohmann::ordered_json embeddings_list = nlohmann::ordered_json::array();
    for (std::uint64_t seed : cfg.probe.seeds) {
      const std::string stem = name + "/embedding_seed" + std::to_string(seed) + ".txt";
      if (fs::exists(root / stem)) embeddings_list.push_back({stem, stem + ".meta.json"});
    }
    manifest["artifacts"].push_back({{"method", name}, {"embeddings", embeddings_list}});
  }
  manifest["cells"] = cells;
  detail::write_text(root / "manifest.json", detail::dump_json(manifest));
  return summary;
}

}  // namespace embprobe
