#include "entroscan/entropy.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "entroscan/error.hpp"
#include "entroscan/kernels.hpp"

namespace entroscan {

namespace {

// c * log2(c) for every count a default-sized window can produce.
const std::array<double, kDefaultWindow + 1>& clogc_table() {
  static const auto table = [] {
    std::array<double, kDefaultWindow + 1> t{};
    for (std::size_t c = 1; c < t.size(); ++c) t[c] = static_cast<double>(c) * std::log2(static_cast<double>(c));
    return t;
  }();
  return table;
}

}  // namespace

double window_entropy(std::span<const std::uint8_t> block) {
  if (block.empty()) throw std::invalid_argument("window_entropy: empty block");
  std::array<std::uint32_t, 256> counts{};
  for (std::uint8_t b : block) ++counts[b];
  const double n = static_cast<double>(block.size());
  double s = 0.0;
  if (block.size() <= kDefaultWindow) {
    const auto& t = clogc_table();
    for (std::uint32_t c : counts) s += t[c];
  } else {
    for (std::uint32_t c : counts) {
      if (c > 1) s += static_cast<double>(c) * std::log2(static_cast<double>(c));
    }
  }
  const double h = std::log2(n) - s / n;
  // rounding can leave a tiny negative for single-symbol windows
  return h <= 0.0 ? 0.0 : h;
}

std::size_t window_count(std::size_t length, std::size_t window_size) noexcept {
  if (window_size == 0) return 0;
  return length / window_size + (length % window_size > window_size / 2 ? 1 : 0);
}

EntropyTimeSeries compute_ets(std::span<const std::uint8_t> stream, std::size_t window_size) {
  if (window_size < 2) throw std::invalid_argument("compute_ets: window_size must be >= 2");
  const std::size_t n = window_count(stream.size(), window_size);
  if (n == 0) {
    throw Error(ErrorCode::EmptyInput,
                "stream of " + std::to_string(stream.size()) + " bytes yields no entropy window");
  }
  EntropyTimeSeries ets;
  ets.window_size = window_size;
  ets.values.resize(n);
  parallel::window_entropies(stream, window_size, ets.values);
  return ets;
}

}  // namespace entroscan
