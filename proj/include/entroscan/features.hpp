#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entroscan/bow.hpp"
#include "entroscan/preprocess.hpp"
#include "entroscan/wavelet.hpp"

namespace entroscan {

enum class Label : std::uint8_t { Benign = 0, Malicious = 1 };

std::string_view to_string(Label label) noexcept;
/// Accepts exactly "benign" or "malicious".
std::optional<Label> parse_label(std::string_view text) noexcept;

inline constexpr std::size_t kGlobalFeatureCount = 6;
inline constexpr double kHighEntropyCutoff = 7.0;

struct GlobalFeatures {
  double length = 0;
  double mean = 0;
  double stdev = 0;  // population
  double max_value = 0;
  double max_percentage = 0;   // fraction of values > 7.0
  double zero_percentage = 0;  // fraction of values == 0.0

  std::array<double, kGlobalFeatureCount> as_array() const noexcept {
    return {length, mean, stdev, max_value, max_percentage, zero_percentage};
  }
};

/// Feature layout is [global | DWT energies | BOW histogram].
struct FeatureVector {
  std::vector<double> values;
  std::optional<Label> label;
  std::string file_id;
};

enum FeatureFamily : unsigned {
  kGlobalFamily = 1u << 0,
  kDwtFamily = 1u << 1,
  kBowFamily = 1u << 2,
  kAllFamilies = kGlobalFamily | kDwtFamily | kBowFamily,
};

constexpr std::size_t feature_dim(std::size_t codebook_k) noexcept {
  return kGlobalFeatureCount + kSpectrumLevels + codebook_k;
}

/// Column indices of the selected families within a full feature vector.
std::vector<std::size_t> family_columns(std::size_t codebook_k, unsigned families);

/// Throws Error{EmptyInput} on an empty series.
GlobalFeatures global_features(std::span<const double> ets);

/// Feature values for an already computed entropy series.
std::vector<double> assemble_features(std::span<const double> ets, const Codebook& codebook);

/// Full pipeline: canonicalize, entropy series, global + spectrum + histogram.
/// Throws Error{EmptyInput} when the canonical stream is too short.
FeatureVector extract(ByteView bytes, const Codebook& codebook);

/// Lowercase hex SHA-256 of the content.
std::string content_id(ByteView bytes);

/// One JSON object per line: {"file_id", "label"?, "features"}.
void write_feature_record(std::ostream& out, const FeatureVector& fv);
/// Throws Error{ParseError} naming the offending line.
std::vector<FeatureVector> read_feature_records(std::istream& in);

}  // namespace entroscan
