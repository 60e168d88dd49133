#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace entroscan {

inline constexpr std::size_t kDefaultWindow = 256;

/// Shannon entropies (bits per byte) of consecutive non-overlapping windows.
struct EntropyTimeSeries {
  std::vector<double> values;
  std::size_t window_size = kDefaultWindow;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
};

/// Entropy of an arbitrary non-empty block with p(b) = count(b) / size.
double window_entropy(std::span<const std::uint8_t> block);

/// Entropy of one 256-byte window, in [0, 8].
inline double block_entropy(std::span<const std::uint8_t, kDefaultWindow> block) {
  return window_entropy(block);
}

/// Number of windows produced for a stream of `length` bytes: full windows,
/// plus one zero-padded window when the tail is longer than half a window.
std::size_t window_count(std::size_t length, std::size_t window_size = kDefaultWindow) noexcept;

/// Throws Error{EmptyInput} when the stream yields no window (fewer than
/// window_size/2 + 1 bytes).
EntropyTimeSeries compute_ets(std::span<const std::uint8_t> stream,
                              std::size_t window_size = kDefaultWindow);

}  // namespace entroscan
