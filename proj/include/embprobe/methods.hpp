#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "embprobe/embedding.hpp"
#include "embprobe/errors.hpp"
#include "embprobe/graph.hpp"
#include "embprobe/sdne.hpp"
#include "embprobe/skipgram.hpp"

namespace embprobe {

// Effective hyperparameters of one embedding method. Only the part
// matching the tag is used.
struct MethodParams {
  MethodTag tag = MethodTag::deepwalk;
  SkipGramMethod skipgram;
  SdneConfig sdne;
};

inline MethodParams method_defaults(MethodTag tag) {
  MethodParams p;
  p.tag = tag;
  if (tag != MethodTag::sdne) p.skipgram = skipgram_method_defaults(tag);
  return p;
}

namespace detail {

inline double parse_real(std::string_view key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used != value.size() || value.empty())
    throw InvalidArgument("'" + std::string(key) + "' expects a number, got '" + value + "'");
  return v;
}

inline std::size_t parse_count(std::string_view key, const std::string& value) {
  const double v = parse_real(key, value);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw InvalidArgument("'" + std::string(key) + "' expects a non-negative integer, got '" +
                          value + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline std::vector<std::string> method_override_keys(MethodTag tag) {
  if (tag == MethodTag::sdne)
    return {"dim", "hidden", "alpha", "beta", "lr", "epochs", "batch", "rho", "eps"};
  std::vector<std::string> keys{"dim", "lr", "epochs", "negatives", "window", "walks_per_vertex",
                                "walk_length", "mode"};
  if (tag != MethodTag::deepwalk) {
    keys.push_back("p");
    keys.push_back("q");
  }
  return keys;
}

// Applies one "key=value" override; unknown keys are rejected.
inline void apply_override(MethodParams& p, const std::string& key, const std::string& value) {
  using detail::parse_count;
  using detail::parse_real;
  if (p.tag == MethodTag::sdne) {
    auto& c = p.sdne;
    if (key == "dim") c.dim = parse_count(key, value);
    else if (key == "hidden") c.hidden = parse_count(key, value);
    else if (key == "alpha") c.alpha = parse_real(key, value);
    else if (key == "beta") c.beta = parse_real(key, value);
    else if (key == "lr") c.lr = parse_real(key, value);
    else if (key == "epochs") c.epochs = parse_count(key, value);
    else if (key == "batch") c.batch = parse_count(key, value);
    else if (key == "rho") c.rho = parse_real(key, value);
    else if (key == "eps") c.eps = parse_real(key, value);
    else throw InvalidArgument("unknown sdne setting '" + key + "'");
    return;
  }
  auto& m = p.skipgram;
  auto& t = m.train;
  const bool biased = p.tag != MethodTag::deepwalk;
  if (key == "dim") {
    t.dim = parse_count(key, value);
    if (p.tag == MethodTag::poincare && t.dim != 2)
      throw InvalidArgument("poincare embeddings are 2-dimensional");
  } else if (key == "lr") t.lr = parse_real(key, value);
  else if (key == "epochs") t.epochs = parse_count(key, value);
  else if (key == "negatives") t.negatives = parse_count(key, value);
  else if (key == "window") t.window = parse_count(key, value);
  else if (key == "walks_per_vertex") m.walks_per_vertex = parse_count(key, value);
  else if (key == "walk_length") m.walk_length = parse_count(key, value);
  else if (key == "mode") {
    if (value == "negative_sampling") t.mode = SoftmaxMode::negative_sampling;
    else if (value == "exact_softmax") t.mode = SoftmaxMode::exact_softmax;
    else throw InvalidArgument("mode must be negative_sampling or exact_softmax");
  } else if (biased && key == "p") m.strategy.p = parse_real(key, value);
  else if (biased && key == "q") m.strategy.q = parse_real(key, value);
  else throw InvalidArgument("unknown " + std::string(method_name(p.tag)) + " setting '" + key + "'");
}

inline nlohmann::ordered_json method_params_json(const MethodParams& p) {
  nlohmann::ordered_json j;
  j["method"] = method_name(p.tag);
  if (p.tag == MethodTag::sdne) {
    const auto& c = p.sdne;
    j["hidden"] = c.hidden;
    j["dim"] = c.dim;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["optimizer"] = "rmsprop";
    j["lr"] = c.lr;
    j["rho"] = c.rho;
    j["eps"] = c.eps;
    j["epochs"] = c.epochs;
    j["batch"] = c.batch;
    j["init"] = "glorot_uniform (no deep belief network pretraining)";
    return j;
  }
  const auto& m = p.skipgram;
  j["dim"] = m.train.dim;
  j["geometry"] = geometry_name(m.train.geometry);
  j["walks_per_vertex"] = m.walks_per_vertex;
  j["walk_length"] = m.walk_length;
  j["walk"] = m.strategy.kind == WalkStrategy::Kind::uniform ? "uniform" : "biased";
  if (m.strategy.kind == WalkStrategy::Kind::biased) {
    j["p"] = m.strategy.p;
    j["q"] = m.strategy.q;
  }
  j["window"] = m.train.window;
  j["optimizer"] = "sgd";
  j["lr"] = m.train.lr;
  j["lr_final"] = m.train.lr / 100;
  j["epochs"] = m.train.epochs;
  j["mode"] = softmax_mode_name(m.train.mode);
  if (m.train.mode == SoftmaxMode::negative_sampling) j["negatives"] = m.train.negatives;
  return j;
}

struct MethodOutput {
  Embedding embedding;
  nlohmann::ordered_json training;  // per-epoch loss record
};

// Trains one method on g. All randomness derives from `seed`.
inline MethodOutput run_method(const MethodParams& p, const Graph& g, std::uint64_t seed,
                               std::size_t workers = 1) {
  MethodOutput out;
  if (p.tag == MethodTag::sdne) {
    SdneConfig cfg = p.sdne;
    cfg.seed = derive_seed(seed, "sdne");
    auto r = train_sdne(g, cfg);
    nlohmann::ordered_json losses = nlohmann::ordered_json::array();
    for (const auto& l : r.epoch_loss)
      losses.push_back({{"reconstruction", l.reconstruction}, {"proximity", l.proximity}, {"total", l.total}});
    out.training["epoch_loss"] = losses;
    out.embedding = std::move(r.embedding);
    return out;
  }
  auto r = run_skipgram_method(p.skipgram, g, seed, workers);
  out.training["epoch_loss"] = r.epoch_loss;
  out.embedding = std::move(r.embedding);
  return out;
}

}  // namespace embprobe
