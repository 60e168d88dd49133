#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "entroscan/bow.hpp"
#include "entroscan/error.hpp"
#include "entroscan/kernels.hpp"
#include "support.hpp"

using namespace entroscan;
using namespace testsupport;

namespace {

Codebook manual_codebook(std::vector<std::vector<double>> rows, std::size_t segment_length = 6) {
  Codebook book;
  book.k = rows.size();
  book.segment_length = segment_length;
  book.dim = descriptor_dim(segment_length);
  for (const auto& r : rows) book.centroids.insert(book.centroids.end(), r.begin(), r.end());
  return book;
}

}  // namespace

TEST_CASE("segment drops the trailing partial slice") {
  std::vector<double> ets(25);
  std::iota(ets.begin(), ets.end(), 0.0);
  const auto segs = segment(ets, 6);
  REQUIRE(segs.size() == 4);
  CHECK(segs[3][0] == 18.0);
  CHECK(segment(std::span<const double>(ets).first(6), 6).size() == 1);
  CHECK(segment(std::span<const double>(ets).first(5), 6).empty());
  CHECK_THROWS_AS(segment(ets, 1), std::invalid_argument);
}

TEST_CASE("describe_segment uses every approximation level of the padded segment") {
  CHECK(descriptor_dim(6) == 7);
  CHECK(descriptor_dim(8) == 7);
  CHECK(descriptor_dim(4) == 3);
  CHECK(descriptor_dim(22) == 31);

  const std::vector<double> zeros(6, 0.0);
  CHECK(describe_segment(zeros) == std::vector<double>(7, 0.0));

  const double r2 = std::sqrt(2.0);
  const std::vector<double> ones(6, 1.0);
  const auto f = describe_segment(ones);
  const std::vector<double> frozen{r2, r2, r2, 0.0, 2.0, 1.0, 3.0 / r2};
  REQUIRE(f.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) CHECK(f[i] == doctest::Approx(frozen[i]).epsilon(1e-15));

  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> seg(6);
    for (auto& v : seg) v = static_cast<double>(gen() % 800) / 100.0;
    std::vector<double> padded = seg;
    padded.resize(8, 0.0);
    const auto d = describe_segment(seg);
    std::size_t i = 0;
    for (std::size_t level = 1; level <= 3; ++level) {
      for (std::size_t k = 0; k < (8u >> level); ++k, ++i) {
        CHECK(std::abs(d[i] - haar_approx_oracle(padded, level, k)) < 1e-12);
      }
    }
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(d[k] - (padded[2 * k] + padded[2 * k + 1]) / r2) < 1e-12);
    }
  }
}

TEST_CASE("two-point corpus clusters to exactly those points") {
  FeatureMatrix corpus;
  corpus.dim = 7;
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const std::vector<double> q{7.1, 6.2, 5.3, 4.4, 3.5, 2.6, 1.7};
  for (int i = 0; i < 100; ++i) {
    corpus.append(p);
    corpus.append(q);
  }
  KMeansOptions opt;
  opt.k = 2;
  opt.sample_fraction = 1.0;
  opt.seed = 17;
  const Codebook book = build_codebook(corpus, 6, opt);
  std::set<std::vector<double>> got{{book.centroid(0).begin(), book.centroid(0).end()},
                                    {book.centroid(1).begin(), book.centroid(1).end()}};
  CHECK(got == std::set<std::vector<double>>{p, q});
  CHECK_NOTHROW(book.validate());
}

TEST_CASE("too few distinct points is InsufficientData") {
  FeatureMatrix corpus;
  corpus.dim = 7;
  for (int i = 0; i < 50; ++i) corpus.append(std::vector<double>(7, static_cast<double>(i % 3)));
  KMeansOptions opt;
  opt.k = 4;
  try {
    build_codebook(corpus, 6, opt);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
  opt.k = 3;
  CHECK_NOTHROW(build_codebook(corpus, 6, opt));
}

TEST_CASE("sample expands to the full corpus when it lacks k distinct rows") {
  FeatureMatrix corpus;
  corpus.dim = 3;
  for (int i = 0; i < 10; ++i) corpus.append(std::vector<double>{double(i), 0, 0});
  KMeansOptions opt;
  opt.k = 8;
  opt.sample_fraction = 0.2;  // 2 rows sampled, fewer than k
  KMeansTrace trace;
  const auto book = build_codebook(corpus, 4, opt, &trace);
  CHECK(trace.sample_size == 10);
  CHECK(book.k == 8);
}

TEST_CASE("k-means is deterministic and its objective never increases") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> noise(0.0, 0.4);
  FeatureMatrix corpus;
  corpus.dim = 7;
  for (int i = 0; i < 3000; ++i) {
    const double center = static_cast<double>(gen() % 9);
    std::vector<double> row(7);
    for (auto& v : row) v = center + noise(gen);
    corpus.append(row);
  }
  KMeansOptions opt;
  opt.k = 25;
  opt.seed = 5;
  KMeansTrace trace;
  const Codebook a = build_codebook(corpus, 6, opt, &trace);
  const Codebook b = build_codebook(corpus, 6, opt);
  CHECK(a.centroids == b.centroids);
  CHECK(trace.sample_size == 600);
  REQUIRE(trace.objective.size() >= 2);
  for (std::size_t i = 1; i < trace.objective.size(); ++i) {
    CHECK(trace.objective[i] <= trace.objective[i - 1]);
  }
  CHECK_NOTHROW(a.validate());

  opt.seed = 6;
  CHECK(build_codebook(corpus, 6, opt).centroids != a.centroids);
}

TEST_CASE("encode histogram contracts") {
  // Two codewords: all-zero segment vs all-eight segment.
  const auto low = describe_segment(std::vector<double>(6, 0.0));
  const auto high = describe_segment(std::vector<double>(6, 8.0));
  const Codebook book = manual_codebook({low, high});

  SUBCASE("split 6/4") {
    std::vector<double> ets;
    for (int i = 0; i < 6; ++i) ets.insert(ets.end(), 6, 0.0);
    for (int i = 0; i < 4; ++i) ets.insert(ets.end(), 6, 8.0);
    const auto h = encode(ets, book);
    CHECK(h.weights == std::vector<double>{0.6, 0.4});
  }
  SUBCASE("too short") {
    const auto h = encode(std::vector<double>(5, 3.0), book);
    CHECK(h.weights == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("segment order does not matter") {
    std::vector<double> ets;
    for (int i = 0; i < 3; ++i) ets.insert(ets.end(), 6, 8.0);
    for (int i = 0; i < 2; ++i) ets.insert(ets.end(), 6, 0.0);
    std::vector<double> reversed;
    for (int i = 4; i >= 0; --i) reversed.insert(reversed.end(), ets.begin() + i * 6, ets.begin() + i * 6 + 6);
    CHECK(encode(ets, book).weights == encode(reversed, book).weights);
  }
}

TEST_CASE("encode puts all mass on the nearest codeword, lowest index on ties") {
  std::vector<std::vector<double>> rows;
  for (int c = 0; c < 10; ++c) rows.push_back(describe_segment(std::vector<double>(6, c * 0.5)));
  const Codebook book = manual_codebook(rows);
  std::vector<double> ets(24, 3.5);  // four segments equal to codeword 7
  const auto h = encode(ets, book);
  for (std::size_t i = 0; i < 10; ++i) CHECK(h.weights[i] == (i == 7 ? 1.0 : 0.0));

  const Codebook tied = manual_codebook({std::vector<double>(7, 1.0), std::vector<double>(7, 1.0)});
  CHECK(encode(std::vector<double>(6, 0.0), tied).weights == std::vector<double>{1.0, 0.0});
}

TEST_CASE("nearest-centroid assignment matches a brute-force scan") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + gen() % 8;
    const std::size_t k = 1 + gen() % 250;
    std::vector<double> centroids(k * dim);
    for (auto& v : centroids) v = u(gen);
    std::vector<double> p(dim);
    for (auto& v : p) v = u(gen);
    std::vector<std::uint32_t> label(1);
    std::vector<double> dist(1);
    serial::assign_nearest(p, centroids, dim, label, dist);
    CHECK(label[0] == brute_nearest(p, centroids, dim));
  }
}

TEST_CASE("histograms sum to one whenever a segment exists") {
  std::mt19937_64 gen(41);
  std::vector<std::vector<double>> rows;
  for (int c = 0; c < 12; ++c) {
    std::vector<double> r(7);
    for (auto& v : r) v = static_cast<double>(gen() % 1000) / 100.0;
    rows.push_back(r);
  }
  const Codebook book = manual_codebook(rows);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> ets(gen() % 200);
    for (auto& v : ets) v = static_cast<double>(gen() % 800) / 100.0;
    const auto h = encode(ets, book);
    const double sum = std::accumulate(h.weights.begin(), h.weights.end(), 0.0);
    if (ets.size() >= 6) {
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    } else {
      CHECK(sum == 0.0);
    }
    for (double w : h.weights) CHECK(w >= 0.0);
  }
}

TEST_CASE("Codebook::validate rejects broken codebooks") {
  Codebook ok = manual_codebook({std::vector<double>(7, 0.0), std::vector<double>(7, 1.0)});
  CHECK_NOTHROW(ok.validate());
  Codebook dup = manual_codebook({std::vector<double>(7, 1.0), std::vector<double>(7, 1.0)});
  CHECK_THROWS_AS(dup.validate(), Error);
  Codebook single = manual_codebook({std::vector<double>(7, 1.0)});
  CHECK_THROWS_AS(single.validate(), Error);
  Codebook nan = ok;
  nan.centroids[3] = std::nan("");
  CHECK_THROWS_AS(nan.validate(), Error);
}
