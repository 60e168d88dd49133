#include "entroscan/bow.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "entroscan/error.hpp"
#include "entroscan/kernels.hpp"
#include "entroscan/rng.hpp"
#include "entroscan/wavelet.hpp"

namespace entroscan {

namespace {

bool rows_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::size_t count_distinct(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rows_less(m.row(a), m.row(b)); });
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || rows_less(m.row(order[i - 1]), m.row(order[i]))) ++distinct;
  }
  return distinct;
}

FeatureMatrix gather(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.dim = m.dim;
  out.data.reserve(rows.size() * m.dim);
  for (std::size_t r : rows) out.append(m.row(r));
  return out;
}

std::vector<double> kmeans_plus_plus(const FeatureMatrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.dim;
  std::vector<double> centroids;
  centroids.reserve(k * dim);
  const auto first = points.row(rng.below(n));
  centroids.insert(centroids.end(), first.begin(), first.end());

  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points.row(i), first);

  while (centroids.size() < k * dim) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    // total > 0 because the caller guarantees at least k distinct rows.
    const double target = rng.uniform() * total;
    std::size_t pick = n;
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      running += nearest[i];
      if (nearest[i] > 0.0 && running > target) {
        pick = i;
        break;
      }
    }
    if (pick == n) {
      // Rounding left target at the very top of the range.
      for (std::size_t i = n; i-- > 0;) {
        if (nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    const auto chosen = points.row(pick);
    centroids.insert(centroids.end(), chosen.begin(), chosen.end());
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), chosen));
    }
  }
  return centroids;
}

// Reseeds every flagged centroid with the point farthest from all retained
// centroids. The replaced centroids were empty or duplicated another one, so
// the objective cannot increase.
void reseed(const FeatureMatrix& points, std::vector<double>& centroids, std::size_t k,
            std::vector<bool>& invalid) {
  const std::size_t dim = points.dim;
  const std::size_t n = points.rows();
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  auto centroid = [&](std::size_t c) {
    return std::span<const double>(centroids).subspan(c * dim, dim);
  };
  for (std::size_t c = 0; c < k; ++c) {
    if (invalid[c]) continue;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centroid(c)));
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!invalid[c]) continue;
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (nearest[i] > nearest[far]) far = i;
    }
    std::copy_n(points.row(far).begin(), dim, centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    invalid[c] = false;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centroid(c)));
    }
  }
}

}  // namespace

void Codebook::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::ShapeError, "codebook: " + why); };
  if (k < 2) fail("k must be >= 2");
  if (segment_length < 2) fail("segment_length must be >= 2");
  if (dim != descriptor_dim(segment_length)) fail("dimension does not match segment_length");
  if (centroids.size() != k * dim) fail("centroid matrix is not k x dim");
  for (double v : centroids) {
    if (!std::isfinite(v)) fail("non-finite centroid");
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rows_less(centroid(a), centroid(b)); });
  for (std::size_t i = 1; i < k; ++i) {
    if (!rows_less(centroid(order[i - 1]), centroid(order[i]))) fail("duplicate centroids");
  }
}

std::size_t descriptor_dim(std::size_t segment_length) {
  if (segment_length < 2) throw std::invalid_argument("segment_length must be >= 2");
  return next_power_of_two(segment_length) - 1;
}

std::vector<std::span<const double>> segment(std::span<const double> ets,
                                             std::size_t segment_length) {
  if (segment_length < 2) throw std::invalid_argument("segment_length must be >= 2");
  std::vector<std::span<const double>> out;
  out.reserve(ets.size() / segment_length);
  for (std::size_t start = 0; start + segment_length <= ets.size(); start += segment_length) {
    out.push_back(ets.subspan(start, segment_length));
  }
  return out;
}

std::vector<double> describe_segment(std::span<const double> seg) {
  std::vector<double> padded(next_power_of_two(std::max<std::size_t>(seg.size(), 2)), 0.0);
  std::copy(seg.begin(), seg.end(), padded.begin());
  const HaarDecomposition dwt = haar_dwt(padded);
  std::vector<double> feature;
  feature.reserve(padded.size() - 1);
  for (const auto& level : dwt.approx) feature.insert(feature.end(), level.begin(), level.end());
  return feature;
}

FeatureMatrix local_features(std::span<const double> ets, std::size_t segment_length) {
  FeatureMatrix m;
  m.dim = descriptor_dim(segment_length);
  for (const auto& seg : segment(ets, segment_length)) m.append(describe_segment(seg));
  return m;
}

Codebook build_codebook(const FeatureMatrix& corpus, std::size_t segment_length,
                        const KMeansOptions& options, KMeansTrace* trace) {
  const std::size_t k = options.k;
  if (k < 2) throw std::invalid_argument("build_codebook: k must be >= 2");
  if (corpus.dim != descriptor_dim(segment_length)) {
    throw Error(ErrorCode::ShapeError, "build_codebook: descriptor width does not match segment length");
  }
  const std::size_t n = corpus.rows();
  Rng rng(options.seed);

  const auto wanted = static_cast<std::size_t>(
      std::ceil(std::clamp(options.sample_fraction, 0.0, 1.0) * static_cast<double>(n)));
  std::vector<std::size_t> chosen = rng.sample_without_replacement(n, wanted);
  if (count_distinct(corpus, chosen) < k) {
    chosen.resize(n);
    std::iota(chosen.begin(), chosen.end(), 0);
    if (count_distinct(corpus, chosen) < k) {
      throw Error(ErrorCode::InsufficientData,
                  "fewer than " + std::to_string(k) + " distinct local features in " +
                      std::to_string(n) + " segments");
    }
  }
  const FeatureMatrix points = gather(corpus, chosen);
  const std::size_t dim = points.dim;
  const std::size_t m = points.rows();

  std::vector<double> centroids = kmeans_plus_plus(points, k, rng);
  std::vector<std::uint32_t> labels(m);
  std::vector<double> dist(m);
  KMeansTrace local;
  local.sample_size = m;

  auto assign = [&] {
    parallel::assign_nearest(points.data, centroids, dim, labels, dist);
    const double sse = std::accumulate(dist.begin(), dist.end(), 0.0);
    assert(local.objective.empty() || sse <= local.objective.back() * (1 + 1e-12));
    local.objective.push_back(sse);
  };

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    assign();
    ++local.iterations;

    std::vector<double> next(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    // Running means: a cluster of identical points reproduces the point exactly.
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = points.row(i);
      double* dst = next.data() + labels[i] * dim;
      const double count = static_cast<double>(++counts[labels[i]]);
      for (std::size_t j = 0; j < dim; ++j) dst[j] += (row[j] - dst[j]) / count;
    }
    std::vector<bool> invalid(k, false);
    bool any_invalid = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) invalid[c] = any_invalid = true;
    }
    // Two non-empty clusters can share a mean; keep the first copy.
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < k; ++c) {
      if (!invalid[c]) order.push_back(c);
    }
    auto cview = [&](std::size_t c) { return std::span<const double>(next).subspan(c * dim, dim); };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows_less(cview(a), cview(b)); });
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (!rows_less(cview(order[i - 1]), cview(order[i]))) {
        invalid[std::max(order[i - 1], order[i])] = any_invalid = true;
      }
    }
    if (any_invalid) reseed(points, next, k, invalid);

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, squared_distance(cview(c), std::span<const double>(centroids).subspan(c * dim, dim)));
    }
    centroids = std::move(next);
    if (std::sqrt(shift) < options.tolerance) {
      local.converged = true;
      break;
    }
  }
  assign();

  if (trace) *trace = std::move(local);

  Codebook book;
  book.k = k;
  book.dim = dim;
  book.segment_length = segment_length;
  book.seed = options.seed;
  book.centroids = std::move(centroids);
  return book;
}

BowHistogram encode(std::span<const double> ets, const Codebook& codebook) {
  BowHistogram hist;
  hist.weights.assign(codebook.k, 0.0);
  const FeatureMatrix features = local_features(ets, codebook.segment_length);
  const std::size_t n = features.rows();
  if (n == 0) return hist;
  if (features.dim != codebook.dim) {
    throw Error(ErrorCode::ShapeError, "encode: descriptor width does not match codebook");
  }
  std::vector<std::uint32_t> labels(n);
  std::vector<double> dist(n);
  serial::assign_nearest(features.data, codebook.centroids, codebook.dim, labels, dist);
  for (std::uint32_t c : labels) hist.weights[c] += 1.0;
  for (double& w : hist.weights) w /= static_cast<double>(n);
  return hist;
}

}  // namespace entroscan
