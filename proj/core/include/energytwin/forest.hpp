#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "energytwin/random.hpp"

namespace energytwin {

struct ForestConfig {
  int tree_count = 100;
  int max_depth = 8;
  int min_leaf_size = 5;
  double feature_subsample_fraction = 1.0 / 3.0;

  void validate() const;
  int features_per_split(std::size_t feature_count) const;
};

/// Row-major design matrix with one target per row.
class Dataset {
 public:
  explicit Dataset(std::size_t feature_count) : width_(feature_count) {}

  void add(std::span<const double> features, double target);

  std::size_t size() const { return y_.size(); }
  std::size_t feature_count() const { return width_; }
  double feature(std::size_t row, std::size_t f) const { return x_[row * width_ + f]; }
  std::span<const double> row(std::size_t r) const { return {x_.data() + r * width_, width_}; }
  double target(std::size_t row) const { return y_[row]; }

 private:
  std::size_t width_;
  std::vector<double> x_;
  std::vector<double> y_;
};

/// CART regression tree with variance-reduction splits.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    friend bool operator==(const Node&, const Node&) = default;
  };

  /// Fits on the given rows (duplicates allowed, as produced by bootstrapping).
  static RegressionTree fit(const Dataset& data, std::vector<std::size_t> rows,
                            const ForestConfig& config, Rng& rng);

  double predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  int grow(const Dataset& data, std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
           int depth, const ForestConfig& config, Rng& rng);

  std::vector<Node> nodes_;
};

struct Quantiles {
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

/// Empirical quantile of sorted data with linear interpolation between order
/// statistics (position p*(n-1)).
double empirical_quantile(std::span<const double> sorted, double p);

class RandomForest {
 public:
  /// Bootstrap aggregation of `config.tree_count` trees. Each tree's bootstrap
  /// draw and split RNG come from (seed, tree index), so results do not depend
  /// on fitting order. Throws InsufficientSamples.
  static RandomForest train(const Dataset& data, const ForestConfig& config, std::uint64_t seed);

  bool trained() const { return !trees_.empty(); }
  std::size_t tree_count() const { return trees_.size(); }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  /// One prediction per tree. Throws UntrainedModel.
  std::vector<double> tree_predictions(std::span<const double> x) const;

  double predict_mean(std::span<const double> x) const;

  /// q05/q50/q95 of the per-tree predictions; negatives clamped to zero when
  /// `non_negative` is set.
  Quantiles predict_quantiles(std::span<const double> x, bool non_negative = true) const;

  friend bool operator==(const RandomForest&, const RandomForest&) = default;

 private:
  std::vector<RegressionTree> trees_;
};

}  // namespace energytwin
