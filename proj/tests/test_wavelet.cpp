#include <cmath>
#include <random>

#include "doctest.h"
#include "entroscan/error.hpp"
#include "entroscan/wavelet.hpp"
#include "support.hpp"

using namespace entroscan;
using namespace testsupport;

TEST_CASE("haar_dwt worked examples") {
  SUBCASE("constant series") {
    const std::vector<double> x{1, 1, 1, 1};
    const auto dwt = haar_dwt(x);
    REQUIRE(dwt.levels() == 2);
    for (const auto& level : dwt.detail) {
      for (double d : level) CHECK(d == 0.0);
    }
    CHECK(dwt.approx.back() == std::vector<double>{2.0});
  }
  SUBCASE("alternating pair") {
    const std::vector<double> x{1, -1};
    const auto dwt = haar_dwt(x);
    CHECK(dwt.detail[0][0] == doctest::Approx(haar_detail_oracle(x, 1, 0)).epsilon(1e-15));
    CHECK(dwt.detail[0][0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(dwt.approx[0][0] == 0.0);
  }
  SUBCASE("step series") {
    const std::vector<double> x{4, 4, 2, 2};
    const auto dwt = haar_dwt(x);
    CHECK(dwt.detail[0] == std::vector<double>{0.0, 0.0});
    CHECK(dwt.detail[1] == std::vector<double>{2.0});
    CHECK(dwt.approx[1] == std::vector<double>{6.0});
    const double energy = dwt.detail[0][0] * dwt.detail[0][0] + dwt.detail[0][1] * dwt.detail[0][1] +
                          dwt.detail[1][0] * dwt.detail[1][0] + dwt.approx[1][0] * dwt.approx[1][0];
    CHECK(energy == 40.0);
  }
}

TEST_CASE("haar_dwt matches direct inner products with shifted Haar functions") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (std::size_t n : {2u, 4u, 8u, 32u, 128u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = u(gen);
    const auto dwt = haar_dwt(x);
    for (std::size_t l = 0; l < dwt.levels(); ++l) {
      REQUIRE(dwt.detail[l].size() == n >> (l + 1));
      REQUIRE(dwt.approx[l].size() == n >> (l + 1));
      for (std::size_t k = 0; k < dwt.detail[l].size(); ++k) {
        CHECK(std::abs(dwt.detail[l][k] - haar_detail_oracle(x, l + 1, k)) < 1e-12);
        CHECK(std::abs(dwt.approx[l][k] - haar_approx_oracle(x, l + 1, k)) < 1e-12);
      }
    }
  }
}

TEST_CASE("Parseval and reconstruction on random dyadic series") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::size_t{1} << (1 + gen() % 10);
    std::vector<double> x(n);
    for (auto& v : x) v = u(gen);
    const auto dwt = haar_dwt(x);
    double coeff_energy = dwt.approx.back()[0] * dwt.approx.back()[0];
    for (const auto& level : dwt.detail) {
      for (double d : level) coeff_energy += d * d;
    }
    double signal_energy = 0.0;
    for (double v : x) signal_energy += v * v;
    CHECK(std::abs(coeff_energy - signal_energy) <= 1e-6 * signal_energy);

    const auto back = haar_reconstruct(dwt.detail, dwt.approx.back()[0]);
    REQUIRE(back.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - x[i]) <= 1e-9);
  }
}

TEST_CASE("haar_dwt rejects non-dyadic input") {
  CHECK_THROWS_AS(haar_dwt(std::vector<double>{1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(haar_dwt(std::vector<double>{1}), std::invalid_argument);
  CHECK_THROWS_AS(haar_dwt(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("energy_spectrum contract") {
  const auto s = energy_spectrum(std::vector<double>{4, 4, 2, 2});
  CHECK(s.energies[0] == 0.0);
  CHECK(s.energies[1] == 4.0);
  for (std::size_t i = 2; i < kSpectrumLevels; ++i) CHECK(s.energies[i] == 0.0);

  for (std::size_t n : {2u, 8u, 64u, 1024u}) {
    const auto flat = energy_spectrum(std::vector<double>(n, 5.5));
    for (double e : flat.energies) CHECK(e == 0.0);
  }

  // [a, b, c] is padded to [a, b, c, 0]
  const auto padded = energy_spectrum(std::vector<double>{3, 1, 2});
  const auto explicit_pad = energy_spectrum(std::vector<double>{3, 1, 2, 0});
  CHECK(padded.energies == explicit_pad.energies);
  CHECK(padded.energies[0] == doctest::Approx((4.0 + 4.0) / 2.0));

  const auto single = energy_spectrum(std::vector<double>{6});
  CHECK(single.energies[0] == 18.0);

  CHECK_THROWS_AS(energy_spectrum(std::vector<double>{}), Error);
}

TEST_CASE("energy spectrum keeps the 20 finest levels of very long series") {
  std::mt19937_64 gen(9);
  std::vector<double> x((std::size_t{1} << 21) + 3);
  for (auto& v : x) v = static_cast<double>(gen() % 9);
  const auto s = energy_spectrum(x);
  // finest level of the padded series, computed directly
  std::vector<double> padded(std::size_t{1} << 22, 0.0);
  std::copy(x.begin(), x.end(), padded.begin());
  double e1 = 0.0;
  for (std::size_t k = 0; k < padded.size() / 2; ++k) {
    const double d = (padded[2 * k] - padded[2 * k + 1]);
    e1 += d * d / 2.0;
  }
  CHECK(s.energies[0] == doctest::Approx(e1).epsilon(1e-12));
  for (double e : s.energies) CHECK(e >= 0.0);
}

TEST_CASE("energies are sign invariant") {
  const auto a = energy_spectrum(std::vector<double>{7.5, 1.25});
  const auto b = energy_spectrum(std::vector<double>{1.25, 7.5});
  CHECK(a.energies == b.energies);
}
