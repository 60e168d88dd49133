#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace entroscan {

inline constexpr std::size_t kSpectrumLevels = 20;

/// Orthonormal Haar pyramid. Index 0 is the finest level; detail[l] and
/// approx[l] both hold n / 2^(l+1) coefficients.
struct HaarDecomposition {
  std::vector<std::vector<double>> detail;
  std::vector<std::vector<double>> approx;

  std::size_t levels() const noexcept { return detail.size(); }
};

/// Per-level detail energies, finest level first, zero beyond the levels
/// the input supports.
struct EnergySpectrum {
  std::array<double, kSpectrumLevels> energies{};
};

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Full decomposition down to a single approximation coefficient.
/// `series.size()` must be a power of two >= 2 (std::invalid_argument otherwise).
HaarDecomposition haar_dwt(std::span<const double> series);

/// Tail-pads `ets` with zeros to the next power of two (minimum 2), then
/// E_j = sum_k d_{j,k}^2. Levels past the 20 finest are dropped.
/// Throws Error{EmptyInput} on an empty series.
EnergySpectrum energy_spectrum(std::span<const double> ets);

}  // namespace entroscan
