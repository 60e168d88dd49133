#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entroscan/bow.hpp"
#include "entroscan/classifier.hpp"
#include "entroscan/features.hpp"

namespace entroscan {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
};

/// Set when a ratio had a zero denominator and was reported as 0.
struct DegenerateFlags {
  bool tpr = false;  // TP + FN == 0 (also covers FNR)
  bool fpr = false;  // FP + TN == 0
  bool precision = false;  // TP + FP == 0
  bool f1 = false;  // precision + recall == 0

  bool any() const noexcept { return tpr || fpr || precision || f1; }
};

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct EvalReport {
  ConfusionCounts counts;
  double tpr = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double auc = kUnset;
  /// Best TPR over thresholds whose FPR stays within HoldoutOptions::max_fpr.
  double tpr_at_max_fpr = kUnset;
  DegenerateFlags degenerate;
  std::vector<EvalReport> per_repeat;
};

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Ratios from the confusion counts; AUC left unset.
EvalReport metrics(const ConfusionCounts& counts);

/// `score >= threshold` is a malicious verdict.
ConfusionCounts confusion_at(std::span<const ScoredLabel> scores, double threshold);

/// Mann-Whitney AUC, ties counted as one half. Throws
/// Error{DegenerateLabels} unless both classes are present.
double roc_auc(std::span<const ScoredLabel> scores);

/// One point per distinct score (descending), starting at (inf, 0, 0).
std::vector<RocPoint> roc_curve(std::span<const ScoredLabel> scores);

/// Highest TPR reachable at a threshold whose FPR is <= max_fpr.
double tpr_at_fpr(std::span<const ScoredLabel> scores, double max_fpr);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per class, round(train_fraction * n_c) samples (clamped to [1, n_c - 1]
/// when n_c >= 2) go to training. Index lists are sorted.
Split stratified_split(std::span<const Label> labels, double train_fraction, std::uint64_t seed);

/// Class-stratified k folds; fold i uses partition i as its test set.
std::vector<Split> stratified_kfold(std::span<const Label> labels, std::size_t folds,
                                    std::uint64_t seed);

enum class Protocol { RepeatedHoldout, StratifiedKFold };

struct HoldoutOptions {
  std::size_t repeats = 3;  // number of folds under StratifiedKFold
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  double max_fpr = 0.05;
  Protocol protocol = Protocol::RepeatedHoldout;
};

/// Fits on `train` and returns one malicious score per `test` index.
using Scorer = std::function<std::vector<double>(std::span<const std::size_t> train,
                                                 std::span<const std::size_t> test,
                                                 std::uint64_t seed)>;

/// Per repeat r: split with derive_seed(seed, r), fit with
/// derive_seed(seed, 1'000'000 + r), score the held-out part. Reported
/// metrics are arithmetic means over repeats; `counts` are summed.
EvalReport repeated_holdout(std::span<const Label> labels, const Scorer& scorer,
                            const HoldoutOptions& options);

/// Scores from the last repeated_holdout-style run, pooled for ROC export.
struct PooledScores {
  std::vector<ScoredLabel> scores;
};

/// Entropy series of one labeled file, the unit the end-to-end pipeline
/// evaluates on.
struct Sample {
  std::vector<double> ets;
  Label label = Label::Benign;
  std::string file_id;
};

struct PipelineConfig {
  std::size_t segment_length = kDefaultSegmentLength;
  std::size_t codebook_size = kDefaultCodebookSize;
  double sample_fraction = kDefaultSampleFraction;
  ForestConfig forest;
  unsigned families = kAllFamilies;
};

/// Scorer that builds the codebook from training files only, extracts
/// feature vectors restricted to `config.families`, trains the forest and
/// scores the test files. When `pooled` is given, test scores are appended.
Scorer make_pipeline_scorer(std::span<const Sample> samples, const PipelineConfig& config,
                            PooledScores* pooled = nullptr);

struct GridPoint {
  std::size_t n_trees = 500;
  std::size_t max_depth = 30;
  std::size_t segment_length = kDefaultSegmentLength;
  std::size_t codebook_size = kDefaultCodebookSize;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct GridResult {
  GridPoint point;
  double auc = kUnset;  // NaN when evaluation failed
  std::string error;
  EvalReport report;
};

/// Cartesian product of the listed values per axis.
struct ParamGrid {
  std::vector<std::size_t> n_trees{500};
  std::vector<std::size_t> max_depth{30};
  std::vector<std::size_t> segment_length{kDefaultSegmentLength};
  std::vector<std::size_t> codebook_size{kDefaultCodebookSize};

  /// Points in axis order with duplicates removed (first occurrence kept).
  std::vector<GridPoint> points() const;
};

/// JSON object whose optional keys n_trees, max_depth, segment_length and
/// codebook_size each hold an integer, an array of integers, or
/// {"start", "stop", "step"} (inclusive stop). Throws Error{ParseError}.
ParamGrid parse_grid(std::string_view text);

/// Runs `evaluate` on every distinct point with the same master seed, so all
/// points see identical splits. Successful points are sorted by AUC
/// descending, ties by fewer trees then shallower depth; failed points follow
/// in evaluation order.
std::vector<GridResult> grid_search(std::span<const GridPoint> grid,
                                    const std::function<EvalReport(const GridPoint&)>& evaluate);

/// grid_search over the end-to-end pipeline.
std::vector<GridResult> grid_search(std::span<const Sample> samples, std::span<const GridPoint> grid,
                                    const PipelineConfig& base, const HoldoutOptions& options);

}  // namespace entroscan
