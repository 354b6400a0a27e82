#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "embprobe/errors.hpp"
#include "embprobe/labels.hpp"
#include "embprobe/random.hpp"

namespace embprobe {

// counts[i * classes + j] = items of true class i predicted as j.
struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::size_t> counts;

  std::size_t at(int truth, int pred) const {
    return counts[static_cast<std::size_t>(truth * classes + pred)];
  }
  std::size_t row_sum(int truth) const {
    std::size_t s = 0;
    for (int j = 0; j < classes; ++j) s += at(truth, j);
    return s;
  }
  std::size_t col_sum(int pred) const {
    std::size_t s = 0;
    for (int i = 0; i < classes; ++i) s += at(i, pred);
    return s;
  }
  std::size_t total() const {
    std::size_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
  std::size_t trace() const {
    std::size_t s = 0;
    for (int i = 0; i < classes; ++i) s += at(i, i);
    return s;
  }
};

inline ConfusionMatrix confusion_matrix(const std::vector<Label>& truth,
                                        const std::vector<Label>& pred, int classes) {
  if (truth.size() != pred.size()) throw InvalidArgument("label vectors differ in length");
  ConfusionMatrix cm{classes, std::vector<std::size_t>(static_cast<std::size_t>(classes * classes), 0)};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= classes || pred[i] < 0 || pred[i] >= classes)
      throw InvalidArgument("label out of range for " + std::to_string(classes) + " classes");
    ++cm.counts[static_cast<std::size_t>(truth[i] * classes + pred[i])];
  }
  return cm;
}

// Pooled TP/FP/FN over all labels, then F1 of the pooled precision and
// recall.
inline double micro_f1(const ConfusionMatrix& cm) {
  double tp = 0, fp = 0, fn = 0;
  for (int l = 0; l < cm.classes; ++l) {
    const double t = static_cast<double>(cm.at(l, l));
    tp += t;
    fp += static_cast<double>(cm.col_sum(l)) - t;
    fn += static_cast<double>(cm.row_sum(l)) - t;
  }
  if (tp == 0) return 0.0;
  const double p = tp / (tp + fp);
  const double r = tp / (tp + fn);
  // Single-label data always has P == R (== accuracy); return it as is.
  if (p == r) return p;
  return 2 * p * r / (p + r);
}

// Per-label F1 (0 when P + R = 0) averaged over all `classes` labels,
// including labels absent from both vectors.
inline double macro_f1(const ConfusionMatrix& cm) {
  double sum = 0;
  for (int l = 0; l < cm.classes; ++l) {
    const double tp = static_cast<double>(cm.at(l, l));
    const double pred = static_cast<double>(cm.col_sum(l));
    const double actual = static_cast<double>(cm.row_sum(l));
    const double p = pred > 0 ? tp / pred : 0.0;
    const double r = actual > 0 ? tp / actual : 0.0;
    sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return sum / cm.classes;
}

inline double micro_f1(const std::vector<Label>& truth, const std::vector<Label>& pred,
                       int classes) {
  if (truth.empty()) throw InvalidArgument("micro-F1 of empty input");
  return micro_f1(confusion_matrix(truth, pred, classes));
}

inline double macro_f1(const std::vector<Label>& truth, const std::vector<Label>& pred,
                       int classes) {
  if (truth.empty()) throw InvalidArgument("macro-F1 of empty input");
  return macro_f1(confusion_matrix(truth, pred, classes));
}

enum class Baseline { uniform, stratified, frequent };

inline std::string_view baseline_name(Baseline b) {
  switch (b) {
    case Baseline::uniform: return "uniform";
    case Baseline::stratified: return "stratified";
    case Baseline::frequent: return "frequent";
  }
  return "?";
}

// Rule-based predictors fitted on train labels only:
//   uniform    - iid uniform over classes seen in train
//   stratified - iid from the train class distribution
//   frequent   - the majority train class (ties to the lower label)
inline std::vector<Label> baseline_predict(Baseline kind, const std::vector<Label>& train_labels,
                                           std::size_t test_size, std::uint64_t seed) {
  if (train_labels.empty()) throw InvalidArgument("baseline needs train labels");
  const Label max_label = *std::max_element(train_labels.begin(), train_labels.end());
  std::vector<std::size_t> counts(static_cast<std::size_t>(max_label) + 1, 0);
  for (Label y : train_labels) ++counts[static_cast<std::size_t>(y)];
  std::vector<Label> present;
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c]) present.push_back(static_cast<Label>(c));

  std::vector<Label> out(test_size);
  Rng rng(seed);
  switch (kind) {
    case Baseline::uniform:
      for (auto& y : out) y = present[rng.below(present.size())];
      break;
    case Baseline::stratified:
      for (auto& y : out) y = train_labels[rng.below(train_labels.size())];
      break;
    case Baseline::frequent: {
      const auto top = std::max_element(counts.begin(), counts.end()) - counts.begin();
      std::fill(out.begin(), out.end(), static_cast<Label>(top));
      break;
    }
  }
  return out;
}

}  // namespace embprobe
