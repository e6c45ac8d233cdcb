#include "energytwin/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "energytwin/errors.hpp"

namespace energytwin {

void ForestConfig::validate() const {
  if (tree_count < 2) throw InvalidParameter("forecast treeCount must be at least 2");
  if (max_depth < 1) throw InvalidParameter("forecast maxDepth must be at least 1");
  if (min_leaf_size < 1) throw InvalidParameter("forecast minLeafSize must be at least 1");
  if (!(feature_subsample_fraction > 0.0 && feature_subsample_fraction <= 1.0))
    throw InvalidParameter("forecast featureSubsampleFraction must be in (0,1]");
}

int ForestConfig::features_per_split(std::size_t feature_count) const {
  const int k = static_cast<int>(std::lround(feature_subsample_fraction * static_cast<double>(feature_count)));
  return std::clamp(k, 1, static_cast<int>(feature_count));
}

void Dataset::add(std::span<const double> features, double target) {
  if (features.size() != width_) throw InvalidParameter("feature row has the wrong width");
  x_.insert(x_.end(), features.begin(), features.end());
  y_.push_back(target);
}

// ---------------------------------------------------------------------------

RegressionTree RegressionTree::fit(const Dataset& data, std::vector<std::size_t> rows,
                                   const ForestConfig& config, Rng& rng) {
  RegressionTree tree;
  if (rows.empty()) throw InsufficientSamples("cannot fit a tree on zero rows");
  tree.grow(data, rows, 0, rows.size(), 0, config, rng);
  return tree;
}

int RegressionTree::grow(const Dataset& data, std::vector<std::size_t>& rows, std::size_t begin,
                         std::size_t end, int depth, const ForestConfig& config, Rng& rng) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{});
  const std::size_t n = end - begin;

  double sum = 0.0;
  bool constant = true;
  const double first = data.target(rows[begin]);
  for (std::size_t i = begin; i < end; ++i) {
    const double y = data.target(rows[i]);
    sum += y;
    constant = constant && y == first;
  }
  nodes_[index].value = constant ? first : sum / static_cast<double>(n);

  const auto min_leaf = static_cast<std::size_t>(config.min_leaf_size);
  if (constant || depth >= config.max_depth || n < 2 * min_leaf) return index;

  // Candidate features for this split: partial Fisher-Yates draw.
  const std::size_t width = data.feature_count();
  std::vector<std::size_t> features(width);
  std::iota(features.begin(), features.end(), 0);
  const auto k = static_cast<std::size_t>(config.features_per_split(width));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (width - i));
    std::swap(features[i], features[j]);
  }

  double best_score = sum * sum / static_cast<double>(n);  // parent: split must improve on it
  int best_feature = -1;
  double best_threshold = 0.0;

  std::vector<std::size_t> order(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                 rows.begin() + static_cast<std::ptrdiff_t>(end));
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t f = features[c];
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return data.feature(a, f) < data.feature(b, f);
    });
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += data.target(order[i]);
      const std::size_t nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double lo = data.feature(order[i], f), hi = data.feature(order[i + 1], f);
      if (!(lo < hi)) continue;
      const double right_sum = sum - left_sum;
      // Maximising this is equivalent to minimising the children's squared error.
      const double score = left_sum * left_sum / static_cast<double>(nl) +
                           right_sum * right_sum / static_cast<double>(nr);
      if (score > best_score + 1e-12 * std::abs(best_score)) {
        best_score = score;
        best_feature = static_cast<int>(f);
        best_threshold = 0.5 * (lo + hi);
        if (!(best_threshold < hi)) best_threshold = lo;  // adjacent doubles
      }
    }
  }
  if (best_feature < 0) return index;

  const auto mid = std::stable_partition(
      rows.begin() + static_cast<std::ptrdiff_t>(begin), rows.begin() + static_cast<std::ptrdiff_t>(end),
      [&](std::size_t r) { return data.feature(r, static_cast<std::size_t>(best_feature)) <= best_threshold; });
  const auto split = static_cast<std::size_t>(mid - rows.begin());
  if (split == begin || split == end) return index;

  nodes_[index].feature = best_feature;
  nodes_[index].threshold = best_threshold;
  const int left = grow(data, rows, begin, split, depth + 1, config, rng);
  const int right = grow(data, rows, split, end, depth + 1, config, rng);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) throw UntrainedModel("tree has no nodes");
  int i = 0;
  while (nodes_[i].feature >= 0)
    i = x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  return nodes_[i].value;
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  // Nodes are stored in pre-order; walk with an explicit stack.
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[i].feature >= 0) {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return deepest;
}

// ---------------------------------------------------------------------------

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptySeries("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RandomForest RandomForest::train(const Dataset& data, const ForestConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t n = data.size();
  if (n < 2 * static_cast<std::size_t>(config.min_leaf_size))
    throw InsufficientSamples("random forest needs at least 2*minLeafSize samples, got " + std::to_string(n));

  RandomForest forest;
  forest.trees_.reserve(static_cast<std::size_t>(config.tree_count));
  for (int t = 0; t < config.tree_count; ++t) {
    Rng rng{splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(t) + 1))};
    std::vector<std::size_t> rows(n);
    for (std::size_t& r : rows) r = static_cast<std::size_t>(rng() % n);
    forest.trees_.push_back(RegressionTree::fit(data, std::move(rows), config, rng));
  }
  return forest;
}

std::vector<double> RandomForest::tree_predictions(std::span<const double> x) const {
  if (!trained()) throw UntrainedModel("random forest has not been trained");
  std::vector<double> out;
  out.reserve(trees_.size());
  for (const auto& tree : trees_) out.push_back(tree.predict(x));
  return out;
}

double RandomForest::predict_mean(std::span<const double> x) const {
  const auto preds = tree_predictions(x);
  return std::accumulate(preds.begin(), preds.end(), 0.0) / static_cast<double>(preds.size());
}

Quantiles RandomForest::predict_quantiles(std::span<const double> x, bool non_negative) const {
  auto preds = tree_predictions(x);
  std::sort(preds.begin(), preds.end());
  Quantiles q{empirical_quantile(preds, 0.05), empirical_quantile(preds, 0.50), empirical_quantile(preds, 0.95)};
  if (non_negative) {
    q.q05 = std::max(0.0, q.q05);
    q.q50 = std::max(0.0, q.q50);
    q.q95 = std::max(0.0, q.q95);
  }
  return q;
}

}  // namespace energytwin
