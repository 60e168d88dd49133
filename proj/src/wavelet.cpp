#include "entroscan/wavelet.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "entroscan/error.hpp"

namespace entroscan {

namespace {

// Pyramid of plain pairwise sums and differences. The orthonormal coefficient
// at level l (1-based) is the raw value times 2^(-l/2); keeping the raw values
// makes the rescaling an exact power of two on even levels and for energies.
struct RawPyramid {
  std::vector<std::vector<double>> sums;
  std::vector<std::vector<double>> diffs;
};

RawPyramid raw_pyramid(std::span<const double> series) {
  RawPyramid p;
  std::vector<double> current(series.begin(), series.end());
  while (current.size() > 1) {
    const std::size_t half = current.size() / 2;
    std::vector<double> sum(half);
    std::vector<double> diff(half);
    for (std::size_t k = 0; k < half; ++k) {
      sum[k] = current[2 * k] + current[2 * k + 1];
      diff[k] = current[2 * k] - current[2 * k + 1];
    }
    p.diffs.push_back(std::move(diff));
    p.sums.push_back(sum);
    current = std::move(sum);
  }
  return p;
}

double level_scale(std::size_t level) {
  const int half = static_cast<int>(level / 2);
  return level % 2 == 0 ? std::ldexp(1.0, -half) : std::ldexp(1.0 / std::numbers::sqrt2, -half);
}

}  // namespace

HaarDecomposition haar_dwt(std::span<const double> series) {
  if (series.size() < 2 || !is_power_of_two(series.size())) {
    throw std::invalid_argument("haar_dwt: length must be a power of two >= 2");
  }
  RawPyramid raw = raw_pyramid(series);
  HaarDecomposition out;
  for (std::size_t l = 0; l < raw.diffs.size(); ++l) {
    const double scale = level_scale(l + 1);
    for (double& v : raw.diffs[l]) v *= scale;
    for (double& v : raw.sums[l]) v *= scale;
  }
  out.detail = std::move(raw.diffs);
  out.approx = std::move(raw.sums);
  return out;
}

EnergySpectrum energy_spectrum(std::span<const double> ets) {
  if (ets.empty()) throw Error(ErrorCode::EmptyInput, "energy_spectrum: empty series");
  std::vector<double> padded(std::max<std::size_t>(2, next_power_of_two(ets.size())), 0.0);
  std::copy(ets.begin(), ets.end(), padded.begin());

  const RawPyramid raw = raw_pyramid(padded);
  EnergySpectrum spectrum;
  for (std::size_t l = 0; l < raw.diffs.size() && l < kSpectrumLevels; ++l) {
    double energy = 0.0;
    for (double d : raw.diffs[l]) energy += d * d;
    spectrum.energies[l] = std::ldexp(energy, -static_cast<int>(l + 1));
  }
  return spectrum;
}

}  // namespace entroscan
