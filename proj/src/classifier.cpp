#include "entroscan/classifier.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "entroscan/error.hpp"
#include "entroscan/rng.hpp"

namespace entroscan {

namespace {

double gini(double n, double positives) {
  if (n <= 0.0) return 0.0;
  const double p = positives / n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const double> rows, std::size_t dim, std::span<const Label> labels,
              const ForestConfig& config, std::uint64_t seed)
      : rows_(rows), dim_(dim), labels_(labels), config_(config), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = labels_.size();
    std::vector<std::size_t> sample(n);
    if (config_.bootstrap) {
      for (auto& s : sample) s = rng_.below(n);
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  double value(std::size_t row, std::size_t feature) const { return rows_[row * dim_ + feature]; }
  bool positive(std::size_t row) const { return labels_[row] == Label::Malicious; }

  std::int32_t grow(std::vector<std::size_t>& sample, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    const double n = static_cast<double>(sample.size());
    const auto pos = static_cast<double>(
        std::count_if(sample.begin(), sample.end(), [&](std::size_t r) { return positive(r); }));
    const bool pure = pos == 0.0 || pos == n;
    if (pure || depth >= config_.max_depth || sample.size() < config_.min_samples_split) {
      tree_.nodes[id].leaf = pos / n;
      return id;
    }

    const Split split = best_split(sample, pos);
    if (split.feature < 0) {
      tree_.nodes[id].leaf = pos / n;
      return id;
    }
    assert(split.impurity <= gini(n, pos) + 1e-12);

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : sample) {
      (value(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
    }
    sample.clear();
    sample.shrink_to_fit();

    tree_.nodes[id].feature = split.feature;
    tree_.nodes[id].threshold = split.threshold;
    tree_.nodes[id].leaf = pos / n;
    const std::int32_t l = grow(left, depth + 1);
    const std::int32_t r = grow(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  // Draws candidate features without replacement; keeps drawing past
  // features_per_split until at least one feature can split the node.
  Split best_split(const std::vector<std::size_t>& sample, double pos) {
    std::vector<std::size_t> pool(dim_);
    std::iota(pool.begin(), pool.end(), 0);
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, bool>> column(sample.size());

    for (std::size_t drawn = 0; drawn < dim_; ++drawn) {
      if (drawn >= config_.features_per_split && best.feature >= 0) break;
      std::swap(pool[drawn], pool[drawn + rng_.below(dim_ - drawn)]);
      const std::size_t f = pool[drawn];

      for (std::size_t i = 0; i < sample.size(); ++i) {
        column[i] = {value(sample[i], f), positive(sample[i])};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      const double total = static_cast<double>(column.size());
      double left_n = 0.0;
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_n += 1.0;
        if (column[i].second) left_pos += 1.0;
        if (!(column[i].first < column[i + 1].first)) continue;
        const double right_n = total - left_n;
        const double impurity =
            (left_n * gini(left_n, left_pos) + right_n * gini(right_n, pos - left_pos)) / total;
        if (impurity < best.impurity) {
          const double lo = column[i].first;
          const double hi = column[i + 1].first;
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = {static_cast<std::int32_t>(f), mid, impurity};
        }
      }
    }
    return best;
  }

  std::span<const double> rows_;
  std::size_t dim_;
  std::span<const Label> labels_;
  const ForestConfig& config_;
  Rng rng_;
  DecisionTree tree_;
};

}  // namespace

const TreeNode& DecisionTree::leaf_for(std::span<const double> row) const noexcept {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(
        row[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

std::size_t DecisionTree::depth() const noexcept {
  if (nodes.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const TreeNode& node = nodes[static_cast<std::size_t>(id)];
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

double Forest::score(std::span<const double> row) const noexcept {
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.route(row);
  return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

Forest train_forest(std::span<const double> rows, std::size_t dim, std::span<const Label> labels,
                    ForestConfig& config) {
  if (dim == 0 || rows.size() != labels.size() * dim) {
    throw Error(ErrorCode::ShapeError, "training matrix does not match label count");
  }
  if (labels.size() < 2) throw Error(ErrorCode::DegenerateLabels, "need at least two samples");
  const bool has_pos = std::any_of(labels.begin(), labels.end(), [](Label l) { return l == Label::Malicious; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(), [](Label l) { return l == Label::Benign; });
  if (!has_pos || !has_neg) throw Error(ErrorCode::DegenerateLabels, "training labels contain a single class");
  if (config.n_trees < 1 || config.max_depth < 1) {
    throw std::invalid_argument("forest needs n_trees >= 1 and max_depth >= 1");
  }
  if (config.features_per_split == 0) {
    config.features_per_split =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(dim))));
  }
  config.features_per_split = std::min(config.features_per_split, dim);

  Forest forest;
  forest.feature_dim = dim;
  forest.trees.resize(config.n_trees);
  const auto n_trees = static_cast<std::int64_t>(config.n_trees);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < n_trees; ++t) {
    TreeBuilder builder(rows, dim, labels, config, derive_seed(config.seed, static_cast<std::uint64_t>(t)));
    forest.trees[static_cast<std::size_t>(t)] = builder.build();
  }
  return forest;
}

TrainedModel train(std::span<const FeatureVector> samples, ForestConfig config, Codebook codebook) {
  if (samples.empty()) throw Error(ErrorCode::DegenerateLabels, "no training samples");
  const std::size_t dim = samples.front().values.size();
  std::vector<double> rows;
  std::vector<Label> labels;
  rows.reserve(samples.size() * dim);
  for (const auto& s : samples) {
    if (s.values.size() != dim) throw Error(ErrorCode::ShapeError, "feature vectors differ in length");
    if (!s.label) throw Error(ErrorCode::ShapeError, "training record '" + s.file_id + "' has no label");
    rows.insert(rows.end(), s.values.begin(), s.values.end());
    labels.push_back(*s.label);
  }
  if (codebook.k != 0 && dim != feature_dim(codebook.k)) {
    throw Error(ErrorCode::ShapeError, "feature width " + std::to_string(dim) +
                                           " does not match codebook size " + std::to_string(codebook.k));
  }
  TrainedModel model;
  model.forest = train_forest(rows, dim, labels, config);
  model.config = config;
  model.codebook = std::move(codebook);
  return model;
}

Verdict predict(const TrainedModel& model, std::span<const double> features, double threshold) {
  if (features.size() != model.feature_dim()) {
    throw Error(ErrorCode::ShapeError, "expected " + std::to_string(model.feature_dim()) +
                                           " features, got " + std::to_string(features.size()));
  }
  Verdict v;
  v.threshold = threshold;
  v.score = model.forest.score(features);
  v.label = v.score >= threshold ? Label::Malicious : Label::Benign;
  return v;
}

}  // namespace entroscan
