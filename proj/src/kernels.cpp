#include "entroscan/kernels.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "entroscan/classifier.hpp"
#include "entroscan/entropy.hpp"

namespace entroscan {

namespace {

double padded_window_entropy(std::span<const std::uint8_t> stream, std::size_t window_size,
                             std::size_t w) {
  const std::size_t start = w * window_size;
  if (start + window_size <= stream.size()) {
    return window_entropy(stream.subspan(start, window_size));
  }
  std::vector<std::uint8_t> padded(window_size, 0x00);
  std::copy(stream.begin() + static_cast<std::ptrdiff_t>(start), stream.end(), padded.begin());
  return window_entropy(padded);
}

std::pair<std::uint32_t, double> nearest(std::span<const double> point,
                                         std::span<const double> centroids, std::size_t dim) {
  const std::size_t k = centroids.size() / dim;
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(point, centroids.subspan(c * dim, dim));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return {best, best_d};
}

void check_assign_shapes(std::span<const double> points, std::span<const double> centroids,
                         std::size_t dim, std::span<std::uint32_t> labels,
                         std::span<double> distances) {
  if (dim == 0 || centroids.empty() || centroids.size() % dim != 0 ||
      points.size() != labels.size() * dim || distances.size() != labels.size()) {
    throw std::invalid_argument("assign_nearest: inconsistent shapes");
  }
}

void check_score_shapes(const Forest& forest, std::span<const double> rows, std::span<double> out) {
  if (rows.size() != out.size() * forest.feature_dim) {
    throw std::invalid_argument("score_rows: inconsistent shapes");
  }
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

namespace serial {

void window_entropies(std::span<const std::uint8_t> stream, std::size_t window_size,
                      std::span<double> out) {
  for (std::size_t w = 0; w < out.size(); ++w) out[w] = padded_window_entropy(stream, window_size, w);
}

void assign_nearest(std::span<const double> points, std::span<const double> centroids,
                    std::size_t dim, std::span<std::uint32_t> labels, std::span<double> distances) {
  check_assign_shapes(points, centroids, dim, labels, distances);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::tie(labels[i], distances[i]) = nearest(points.subspan(i * dim, dim), centroids, dim);
  }
}

void score_rows(const Forest& forest, std::span<const double> rows, std::span<double> out) {
  check_score_shapes(forest, rows, out);
  const std::size_t dim = forest.feature_dim;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forest.score(rows.subspan(i * dim, dim));
}

}  // namespace serial

namespace parallel {

void window_entropies(std::span<const std::uint8_t> stream, std::size_t window_size,
                      std::span<double> out) {
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t w = 0; w < n; ++w) {
    out[static_cast<std::size_t>(w)] =
        padded_window_entropy(stream, window_size, static_cast<std::size_t>(w));
  }
}

void assign_nearest(std::span<const double> points, std::span<const double> centroids,
                    std::size_t dim, std::span<std::uint32_t> labels, std::span<double> distances) {
  check_assign_shapes(points, centroids, dim, labels, distances);
  const auto n = static_cast<std::int64_t>(labels.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    std::tie(labels[u], distances[u]) = nearest(points.subspan(u * dim, dim), centroids, dim);
  }
}

void score_rows(const Forest& forest, std::span<const double> rows, std::span<double> out) {
  check_score_shapes(forest, rows, out);
  const std::size_t dim = forest.feature_dim;
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = forest.score(rows.subspan(u * dim, dim));
  }
}

}  // namespace parallel

}  // namespace entroscan
