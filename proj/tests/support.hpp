#pragma once

// Test-only oracles and fixtures. Nothing here calls into the code path it
// is used to check.

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace testsupport {

using Bytes = std::vector<std::uint8_t>;

inline Bytes from_hex(std::string_view hex) {
  Bytes out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  }
  return out;
}

inline Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

// Produced by Python's zlib / zipfile modules.
inline constexpr std::string_view kFlateThousandA = "789c73741c05a360140c770000890cfde9";
inline constexpr std::string_view kZipStoredA =
    "504b030414000000000000002100f32c0c21020000000200000001000000615859504b0102140314000000000000"
    "002100f32c0c21020000000200000001000000000000000000000080010000000061504b050600000000010001002f"
    "000000210000000000";
inline constexpr std::string_view kZipMixed =
    "504b030414000000080000002100f68ae3ea140000004001000011000000776f72642f646f63756d656e742e786d6c"
    "b329b72ab0cb48cdc9c9b7d107316d46f924f101504b030414000000000000002100308930590500000005000000130000"
    "005b436f6e74656e745f54797065735d2e786d6c7479706573504b0102140314000000080000002100f68ae3ea140000"
    "0040010000110000000000000000000000800100000000776f72642f646f63756d656e742e786d6c504b010214031400"
    "00000000000021003089305905000000050000001300000000000000000000008001430000005b436f6e74656e745f54"
    "797065735d2e786d6c504b0506000000000200020080000000790000000000";

/// Minimal ZIP writer for property tests (stored or raw-deflated entries).
struct ZipEntry {
  std::string name;
  Bytes payload;
  bool deflate = false;
  std::uint16_t flags = 0;
  std::uint16_t method_override = 0xFFFF;
};

inline void put16(Bytes& b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put32(Bytes& b, std::uint32_t v) {
  put16(b, v & 0xFFFF);
  put16(b, v >> 16);
}

inline Bytes raw_deflate(const Bytes& in) {
  z_stream zs{};
  deflateInit2(&zs, 6, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
  Bytes out(deflateBound(&zs, static_cast<uLong>(in.size())) + 16);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

inline Bytes zlib_compress(const Bytes& in) {
  uLongf n = compressBound(static_cast<uLong>(in.size()));
  Bytes out(n);
  compress(out.data(), &n, in.data(), static_cast<uLong>(in.size()));
  out.resize(n);
  return out;
}

inline Bytes make_zip(const std::vector<ZipEntry>& entries) {
  Bytes zip;
  Bytes central;
  for (const auto& e : entries) {
    const Bytes data = e.deflate ? raw_deflate(e.payload) : e.payload;
    const std::uint16_t method = e.method_override != 0xFFFF ? e.method_override : (e.deflate ? 8 : 0);
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0, e.payload.data(), static_cast<uInt>(e.payload.size())));
    const auto offset = static_cast<std::uint32_t>(zip.size());
    put32(zip, 0x04034b50);
    put16(zip, 20);
    put16(zip, e.flags);
    put16(zip, method);
    put32(zip, 0);
    put32(zip, crc);
    put32(zip, static_cast<std::uint32_t>(data.size()));
    put32(zip, static_cast<std::uint32_t>(e.payload.size()));
    put16(zip, static_cast<std::uint32_t>(e.name.size()));
    put16(zip, 0);
    zip.insert(zip.end(), e.name.begin(), e.name.end());
    zip.insert(zip.end(), data.begin(), data.end());

    put32(central, 0x02014b50);
    put16(central, 20);
    put16(central, 20);
    put16(central, e.flags);
    put16(central, method);
    put32(central, 0);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(data.size()));
    put32(central, static_cast<std::uint32_t>(e.payload.size()));
    put16(central, static_cast<std::uint32_t>(e.name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central.insert(central.end(), e.name.begin(), e.name.end());
  }
  const auto cd_offset = static_cast<std::uint32_t>(zip.size());
  zip.insert(zip.end(), central.begin(), central.end());
  put32(zip, 0x06054b50);
  put16(zip, 0);
  put16(zip, 0);
  put16(zip, static_cast<std::uint32_t>(entries.size()));
  put16(zip, static_cast<std::uint32_t>(entries.size()));
  put32(zip, static_cast<std::uint32_t>(central.size()));
  put32(zip, cd_offset);
  put16(zip, 0);
  return zip;
}

/// Entropy as -sum p log2 p over a map of symbol counts.
inline double entropy_oracle(std::span<const std::uint8_t> block) {
  std::map<int, long> counts;
  for (auto b : block) ++counts[b];
  const double n = static_cast<double>(block.size());
  double h = 0.0;
  for (const auto& [value, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

/// d_{j,k} as a direct inner product with the discretized, shifted Haar
/// wavelet: +2^{-j/2} on the first half of the support, -2^{-j/2} on the second.
inline double haar_detail_oracle(std::span<const double> x, std::size_t level, std::size_t k) {
  const std::size_t width = std::size_t{1} << level;
  const double amp = std::pow(2.0, -static_cast<double>(level) / 2.0);
  double d = 0.0;
  for (std::size_t t = 0; t < width; ++t) d += x[k * width + t] * (t < width / 2 ? amp : -amp);
  return d;
}

inline double haar_approx_oracle(std::span<const double> x, std::size_t level, std::size_t k) {
  const std::size_t width = std::size_t{1} << level;
  const double amp = std::pow(2.0, -static_cast<double>(level) / 2.0);
  double a = 0.0;
  for (std::size_t t = 0; t < width; ++t) a += x[k * width + t] * amp;
  return a;
}

/// Inverse pyramid: coarse approximation plus detail refinements level by level.
inline std::vector<double> haar_reconstruct(const std::vector<std::vector<double>>& detail,
                                            double coarsest) {
  std::vector<double> current{coarsest};
  for (std::size_t l = detail.size(); l-- > 0;) {
    std::vector<double> finer(current.size() * 2);
    for (std::size_t k = 0; k < current.size(); ++k) {
      finer[2 * k] = (current[k] + detail[l][k]) / std::numbers::sqrt2;
      finer[2 * k + 1] = (current[k] - detail[l][k]) / std::numbers::sqrt2;
    }
    current = std::move(finer);
  }
  return current;
}

/// Exhaustive pairwise AUC.
inline double pairwise_auc(const std::vector<std::pair<double, bool>>& scores) {
  double wins = 0.0;
  double pairs = 0.0;
  for (const auto& [sp, pp] : scores) {
    if (!pp) continue;
    for (const auto& [sn, pn] : scores) {
      if (pn) continue;
      pairs += 1.0;
      wins += sp > sn ? 1.0 : (sp == sn ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

inline std::size_t brute_nearest(std::span<const double> p, std::span<const double> centroids,
                                 std::size_t dim) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t c = 0; c * dim < centroids.size(); ++c) {
    double d = 0.0;
    for (std::size_t j = 0; j < dim; ++j) d += (p[j] - centroids[c * dim + j]) * (p[j] - centroids[c * dim + j]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

inline Bytes random_bytes(std::mt19937_64& gen, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(gen());
  return b;
}

}  // namespace testsupport
