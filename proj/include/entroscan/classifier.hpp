#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entroscan/bow.hpp"
#include "entroscan/features.hpp"

namespace entroscan {

inline constexpr int kModelFormatVersion = 1;

struct ForestConfig {
  std::size_t n_trees = 500;
  std::size_t max_depth = 30;
  std::size_t min_samples_split = 2;
  /// Candidate features drawn per split; 0 resolves to floor(sqrt(dim)).
  std::size_t features_per_split = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

/// Internal nodes route `value <= threshold` to `left`. Leaves carry the
/// fraction of malicious training samples that reached them.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double leaf = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

/// Nodes in pre-order; node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> row) const noexcept;
  double route(std::span<const double> row) const noexcept { return leaf_for(row).leaf; }
  std::size_t depth() const noexcept;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::size_t feature_dim = 0;

  /// Mean leaf fraction over trees.
  double score(std::span<const double> row) const noexcept;
};

struct TrainedModel {
  int format_version = kModelFormatVersion;
  ForestConfig config;
  Forest forest;
  Codebook codebook;

  std::size_t feature_dim() const noexcept { return forest.feature_dim; }
};

struct Verdict {
  double score = 0.0;
  Label label = Label::Benign;
  double threshold = 0.5;
};

/// Grows the forest on a row-major matrix. Throws Error{DegenerateLabels}
/// unless both classes occur, Error{ShapeError} on inconsistent sizes.
/// Tree t draws from a generator seeded with derive_seed(seed, t), so the
/// result does not depend on how trees are scheduled across threads.
Forest train_forest(std::span<const double> rows, std::size_t dim, std::span<const Label> labels,
                    ForestConfig& config);

/// Trains on labeled feature vectors; unlabeled records are rejected with
/// Error{ShapeError}. `config.features_per_split` is resolved in the result.
TrainedModel train(std::span<const FeatureVector> samples, ForestConfig config, Codebook codebook);

/// Throws Error{ShapeError} when the row width differs from the model's.
Verdict predict(const TrainedModel& model, std::span<const double> features,
                double threshold = 0.5);

std::string serialize_model(const TrainedModel& model);
/// Throws Error{ParseError} or Error{UnsupportedVersion}.
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

/// Standalone codebook document {"format_version", "codebook"}.
std::string serialize_codebook(const Codebook& codebook);
/// Accepts a codebook document or a full model document.
Codebook parse_codebook(std::string_view text);
void save_codebook(const Codebook& codebook, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace entroscan
