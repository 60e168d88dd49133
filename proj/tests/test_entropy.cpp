#include <array>
#include <numeric>
#include <random>

#include "doctest.h"
#include "entroscan/entropy.hpp"
#include "entroscan/error.hpp"
#include "support.hpp"

using namespace entroscan;
using namespace testsupport;

TEST_CASE("block_entropy reference values") {
  std::array<std::uint8_t, 256> block{};
  block.fill(0x41);
  CHECK(block_entropy(block) == 0.0);

  std::iota(block.begin(), block.end(), 0);
  CHECK(block_entropy(block) == 8.0);

  std::fill(block.begin(), block.begin() + 128, 0x00);
  std::fill(block.begin() + 128, block.end(), 0xFF);
  CHECK(block_entropy(block) == 1.0);
}

TEST_CASE("block_entropy agrees with the counting oracle") {
  std::mt19937_64 gen(1);
  for (int i = 0; i < 1000; ++i) {
    Bytes block = random_bytes(gen, 256);
    // Vary the alphabet so low-entropy blocks are covered too.
    const unsigned alphabet = 1 + static_cast<unsigned>(gen() % 256);
    for (auto& b : block) b = static_cast<std::uint8_t>(b % alphabet);
    const double h = block_entropy(std::span<const std::uint8_t, 256>(block.data(), 256));
    CHECK(std::abs(h - entropy_oracle(block)) <= 1e-9);
    CHECK(h >= 0.0);
    CHECK(h <= 8.0);
  }
}

TEST_CASE("window_count follows the half-window rule") {
  CHECK(window_count(256) == 1);
  CHECK(window_count(384) == 1);
  CHECK(window_count(385) == 2);
  CHECK(window_count(400) == 2);
  CHECK(window_count(128) == 0);
  CHECK(window_count(129) == 1);
  CHECK(window_count(512) == 2);
}

TEST_CASE("compute_ets windowing and zero padding") {
  std::mt19937_64 gen(2);
  const Bytes s384 = random_bytes(gen, 384);
  CHECK(compute_ets(s384).size() == 1);

  const Bytes s400 = random_bytes(gen, 400);
  const auto ets = compute_ets(s400);
  REQUIRE(ets.size() == 2);
  Bytes tail(s400.begin() + 256, s400.end());
  tail.resize(256, 0x00);
  CHECK(ets.values[1] == doctest::Approx(entropy_oracle(tail)).epsilon(1e-12));
}

TEST_CASE("uniform random windows have high entropy") {
  std::mt19937_64 gen(3);
  int above = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto ets = compute_ets(random_bytes(gen, 512));
    REQUIRE(ets.size() == 2);
    for (double v : ets.values) above += v > 7.0 && v <= 8.0;
  }
  CHECK(above >= 396);
}

TEST_CASE("short or empty streams are rejected") {
  CHECK_THROWS_AS(compute_ets(Bytes{}), Error);
  try {
    compute_ets(Bytes(128, 1));
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
  CHECK(compute_ets(Bytes(129, 1)).size() == 1);
}

TEST_CASE("entropy properties") {
  std::mt19937_64 gen(4);
  SUBCASE("permuting a window leaves its entropy unchanged") {
    for (int i = 0; i < 100; ++i) {
      Bytes block = random_bytes(gen, 256);
      for (auto& b : block) b %= static_cast<std::uint8_t>(1 + gen() % 60);
      const double before = window_entropy(block);
      std::shuffle(block.begin(), block.end(), gen);
      CHECK(window_entropy(block) == before);
    }
  }
  SUBCASE("appending a constant window appends a single zero") {
    Bytes s = random_bytes(gen, 1024);
    const auto before = compute_ets(s);
    s.insert(s.end(), 256, 0x7F);
    const auto after = compute_ets(s);
    REQUIRE(after.size() == before.size() + 1);
    CHECK(after.values.back() == 0.0);
    CHECK(std::equal(before.values.begin(), before.values.end(), after.values.begin()));
  }
}

TEST_CASE("custom window sizes") {
  const Bytes s(1000, 3);
  const auto ets = compute_ets(s, 100);
  CHECK(ets.size() == 10);
  CHECK(ets.window_size == 100);
  CHECK_THROWS_AS(compute_ets(s, 1), std::invalid_argument);
}
