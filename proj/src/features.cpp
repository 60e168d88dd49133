#include "entroscan/features.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include "json.hpp"
#include <ostream>

#include "entroscan/entropy.hpp"
#include "entroscan/error.hpp"

namespace entroscan {

std::string_view to_string(Label label) noexcept {
  return label == Label::Malicious ? "malicious" : "benign";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
  if (text == "benign") return Label::Benign;
  if (text == "malicious") return Label::Malicious;
  return std::nullopt;
}

std::vector<std::size_t> family_columns(std::size_t codebook_k, unsigned families) {
  std::vector<std::size_t> cols;
  auto add = [&](std::size_t from, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) cols.push_back(from + i);
  };
  if (families & kGlobalFamily) add(0, kGlobalFeatureCount);
  if (families & kDwtFamily) add(kGlobalFeatureCount, kSpectrumLevels);
  if (families & kBowFamily) add(kGlobalFeatureCount + kSpectrumLevels, codebook_k);
  return cols;
}

GlobalFeatures global_features(std::span<const double> ets) {
  if (ets.empty()) throw Error(ErrorCode::EmptyInput, "global_features: empty series");
  const double n = static_cast<double>(ets.size());
  GlobalFeatures g;
  g.length = n;
  double sum = 0.0;
  std::size_t high = 0;
  std::size_t zero = 0;
  for (double v : ets) {
    sum += v;
    g.max_value = std::max(g.max_value, v);
    if (v > kHighEntropyCutoff) ++high;
    if (v == 0.0) ++zero;
  }
  g.mean = sum / n;
  double sq = 0.0;
  for (double v : ets) sq += (v - g.mean) * (v - g.mean);
  g.stdev = std::sqrt(sq / n);
  g.max_percentage = static_cast<double>(high) / n;
  g.zero_percentage = static_cast<double>(zero) / n;
  return g;
}

std::vector<double> assemble_features(std::span<const double> ets, const Codebook& codebook) {
  std::vector<double> values;
  values.reserve(feature_dim(codebook.k));
  const auto globals = global_features(ets).as_array();
  values.insert(values.end(), globals.begin(), globals.end());
  const auto spectrum = energy_spectrum(ets);
  values.insert(values.end(), spectrum.energies.begin(), spectrum.energies.end());
  const auto hist = encode(ets, codebook);
  values.insert(values.end(), hist.weights.begin(), hist.weights.end());
  return values;
}

FeatureVector extract(ByteView bytes, const Codebook& codebook) {
  const CanonicalStream canonical = canonicalize(bytes);
  const EntropyTimeSeries ets = compute_ets(canonical.bytes);
  FeatureVector fv;
  fv.values = assemble_features(ets.values, codebook);
  fv.file_id = content_id(bytes);
  return fv;
}

std::string content_id(ByteView bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

void write_feature_record(std::ostream& out, const FeatureVector& fv) {
  nlohmann::json j;
  j["file_id"] = fv.file_id;
  if (fv.label) j["label"] = std::string(to_string(*fv.label));
  j["features"] = fv.values;
  out << j.dump() << '\n';
}

std::vector<FeatureVector> read_feature_records(std::istream& in) {
  std::vector<FeatureVector> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::ParseError, "feature record line " + std::to_string(line_no) + ": " + why);
    };
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
    FeatureVector fv;
    if (!j.contains("file_id") || !j["file_id"].is_string()) fail("missing file_id");
    fv.file_id = j["file_id"].get<std::string>();
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_string()) fail("label must be a string");
      fv.label = parse_label(j["label"].get<std::string>());
      if (!fv.label) fail("label must be benign or malicious");
    }
    if (!j.contains("features") || !j["features"].is_array()) fail("missing features array");
    for (const auto& v : j["features"]) {
      if (!v.is_number()) fail("non-numeric feature");
      fv.values.push_back(v.get<double>());
    }
    records.push_back(std::move(fv));
  }
  return records;
}

}  // namespace entroscan
