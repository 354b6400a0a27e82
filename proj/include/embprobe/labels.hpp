#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "embprobe/errors.hpp"
#include "embprobe/random.hpp"

namespace embprobe {

using Label = int;

// Class labels of one feature. `edges` are the B+1 bin boundaries in
// log10 space.
struct LabelVector {
  std::vector<Label> labels;
  std::vector<double> edges;
  int bins = 6;
  std::string feature;

  std::size_t size() const noexcept { return labels.size(); }
};

// Order-of-magnitude labels: positive values are binned by log10 into B
// equal-width bins spanning [min, max] of the positive logs, the maximum
// falling in the last bin. Zeros get label 0. If all positive logs are
// equal every label is 0.
inline LabelVector log_bin_labels(const std::vector<double>& values, int bins = 6,
                                  std::string feature = {}) {
  if (bins < 1) throw InvalidArgument("bin count must be >= 1");
  LabelVector out;
  out.bins = bins;
  out.feature = std::move(feature);
  out.labels.assign(values.size(), 0);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("feature value is not finite");
    if (v < 0) throw InvalidArgument("feature value is negative: " + std::to_string(v));
    if (v > 0) {
      lo = std::min(lo, std::log10(v));
      hi = std::max(hi, std::log10(v));
    }
  }
  if (!(hi > lo)) {
    const double base = std::isfinite(lo) ? lo : 0.0;
    for (int i = 0; i <= bins; ++i) out.edges.push_back(base + i);
    return out;
  }
  const double width = (hi - lo) / bins;
  for (int i = 0; i <= bins; ++i) out.edges.push_back(lo + width * i);
  out.edges.back() = hi;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0) continue;
    const double x = std::log10(values[i]);
    const auto bin = static_cast<Label>(std::floor((x - lo) / width));
    out.labels[i] = std::clamp(bin, 0, bins - 1);
  }
  return out;
}

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

namespace detail {

// Item indices grouped by label, each group shuffled with the given seed.
inline std::map<Label, std::vector<std::size_t>> shuffled_groups(const std::vector<Label>& labels,
                                                                 std::uint64_t seed) {
  std::map<Label, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  Rng rng(seed);
  for (auto& [label, members] : groups) rng.shuffle(std::span(members));
  return groups;
}

}  // namespace detail

// Stratified split with `fraction` of each class in train. A class with
// n >= 2 members puts between 1 and n-1 of them in train; a singleton
// class goes to train.
inline Split split_labelled_fraction(const std::vector<Label>& labels, double fraction,
                                     std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) throw InvalidArgument("fraction must be in (0, 1)");
  Split split;
  for (auto& [label, members] : detail::shuffled_groups(labels, seed)) {
    const std::size_t n = members.size();
    std::size_t n_train = n;
    if (n >= 2) {
      const auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
      n_train = std::clamp<std::size_t>(want, 1, n - 1);
    }
    split.train.insert(split.train.end(), members.begin(), members.begin() + n_train);
    split.test.insert(split.test.end(), members.begin() + n_train, members.end());
  }
  if (split.train.empty() || split.test.empty())
    throw InvalidArgument("labelled fraction leaves an empty train or test set");
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

// Stratified k-fold. Members of each class are dealt round-robin, with the
// starting fold carried over from the previous class, so every item is in
// exactly one test fold and fold sizes differ by at most one, per class and
// overall.
inline std::vector<Split> kfold_splits(const std::vector<Label>& labels, std::size_t k,
                                       std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k-fold needs k >= 2");
  if (k > labels.size()) throw InvalidArgument("k-fold needs k <= number of items");
  std::vector<std::size_t> fold_of(labels.size());
  std::size_t next = 0;
  for (auto& [label, members] : detail::shuffled_groups(labels, seed))
    for (std::size_t i : members) {
      fold_of[i] = next;
      next = (next + 1) % k;
    }
  std::vector<Split> folds(k);
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t f = 0; f < k; ++f) (f == fold_of[i] ? folds[f].test : folds[f].train).push_back(i);
  return folds;
}

// Balanced weights N / (present_classes * count_c); 0 for absent classes.
inline std::vector<double> class_weights(const std::vector<Label>& labels, int num_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (Label y : labels) {
    if (y < 0 || y >= num_classes) throw InvalidArgument("label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  const auto present = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
  std::vector<double> w(counts.size(), 0.0);
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] > 0)
      w[c] = static_cast<double>(labels.size()) /
             (static_cast<double>(present) * static_cast<double>(counts[c]));
  return w;
}

}  // namespace embprobe
