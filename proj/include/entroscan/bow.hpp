#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace entroscan {

inline constexpr std::size_t kDefaultSegmentLength = 6;
inline constexpr std::size_t kDefaultCodebookSize = 250;
inline constexpr double kDefaultSampleFraction = 0.2;

/// Dense row-major matrix of local features.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t rows() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(data).subspan(i * dim, dim);
  }
  void append(std::span<const double> r) { data.insert(data.end(), r.begin(), r.end()); }
};

/// K-means centroids over segment descriptors (row-major, k x dim).
struct Codebook {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::size_t segment_length = kDefaultSegmentLength;
  std::uint64_t seed = 0;
  std::vector<double> centroids;

  std::span<const double> centroid(std::size_t i) const noexcept {
    return std::span<const double>(centroids).subspan(i * dim, dim);
  }
  /// Throws Error{ShapeError} when the invariants do not hold (k >= 2,
  /// finite and pairwise distinct centroids, dim matching segment_length).
  void validate() const;
};

/// Normalized codeword histogram; all zeros when the series had no segment.
struct BowHistogram {
  std::vector<double> weights;
};

/// Descriptor width for a segment length: the segment is zero-padded to the
/// next power of two P and every approximation level is kept, P - 1 values.
std::size_t descriptor_dim(std::size_t segment_length);

/// Non-overlapping slices of exactly `segment_length` values; a trailing
/// partial slice is dropped. segment_length must be >= 2.
std::vector<std::span<const double>> segment(std::span<const double> ets,
                                             std::size_t segment_length);

/// Haar approximation coefficients of the zero-padded segment, finest level
/// first. For length 6: 4 + 2 + 1 = 7 values.
std::vector<double> describe_segment(std::span<const double> segment);

/// Descriptors of every segment of `ets`.
FeatureMatrix local_features(std::span<const double> ets, std::size_t segment_length);

struct KMeansOptions {
  std::size_t k = kDefaultCodebookSize;
  double sample_fraction = kDefaultSampleFraction;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;
};

/// Run diagnostics. `objective` holds the within-cluster sum of squared
/// distances after each assignment step, ending with the returned centroids.
struct KMeansTrace {
  std::vector<double> objective;
  std::size_t sample_size = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Samples ceil(sample_fraction * n) descriptors without replacement, then
/// runs k-means++ seeded Lloyd iterations. Falls back to the full corpus when
/// the sample holds fewer than k distinct rows; throws
/// Error{InsufficientData} when the corpus itself does.
Codebook build_codebook(const FeatureMatrix& corpus, std::size_t segment_length,
                        const KMeansOptions& options, KMeansTrace* trace = nullptr);

/// Nearest-codeword histogram of the series' segments, L1-normalized.
BowHistogram encode(std::span<const double> ets, const Codebook& codebook);

}  // namespace entroscan
