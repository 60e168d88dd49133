#pragma once

// Data-parallel hot loops. Every kernel has a serial reference kept for tests
// and the benchmark; both variants must produce identical results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace entroscan {

struct Forest;

namespace serial {

/// Entropy of each window; `out.size()` windows are read, the last one
/// zero-padded when the stream ends early.
void window_entropies(std::span<const std::uint8_t> stream, std::size_t window_size,
                      std::span<double> out);

/// Index of the nearest centroid (squared Euclidean, lowest index on ties)
/// for each row of `points`. Both matrices are row-major with `dim` columns.
void assign_nearest(std::span<const double> points, std::span<const double> centroids,
                    std::size_t dim, std::span<std::uint32_t> labels,
                    std::span<double> distances);

/// Forest score for each row of `rows`.
void score_rows(const Forest& forest, std::span<const double> rows, std::span<double> out);

}  // namespace serial

namespace parallel {

void window_entropies(std::span<const std::uint8_t> stream, std::size_t window_size,
                      std::span<double> out);

void assign_nearest(std::span<const double> points, std::span<const double> centroids,
                    std::size_t dim, std::span<std::uint32_t> labels,
                    std::span<double> distances);

void score_rows(const Forest& forest, std::span<const double> rows, std::span<double> out);

}  // namespace parallel

/// Squared Euclidean distance between equal-length vectors.
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace entroscan
