#include "entroscan/preprocess.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <optional>

namespace entroscan {

namespace {

// Caps keep hostile archives from exhausting memory.
constexpr std::size_t kMaxEntryOutput = std::size_t{256} << 20;
constexpr std::size_t kMaxPdfStreamOutput = std::size_t{64} << 20;

constexpr std::array<std::uint8_t, 4> kZipMagic{0x50, 0x4B, 0x03, 0x04};
constexpr std::array<std::uint8_t, 8> kOle2Magic{0xD0, 0xCF, 0x11, 0xE0, 0xA1, 0xB1, 0x1A, 0xE1};

bool starts_with(ByteView bytes, std::span<const std::uint8_t> prefix) {
  return bytes.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), bytes.begin());
}

bool starts_with(ByteView bytes, std::string_view prefix) {
  return bytes.size() >= prefix.size() &&
         std::memcmp(bytes.data(), prefix.data(), prefix.size()) == 0;
}

std::uint16_t le16(ByteView b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t le32(ByteView b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint64_t le64(ByteView b, std::size_t at) {
  return static_cast<std::uint64_t>(le32(b, at)) |
         (static_cast<std::uint64_t>(le32(b, at + 4)) << 32);
}

// ---------------------------------------------------------------------------
// ZIP

constexpr std::uint32_t kEocdSig = 0x06054b50;
constexpr std::uint32_t kZip64LocatorSig = 0x07064b50;
constexpr std::uint32_t kZip64EocdSig = 0x06064b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kLocalSig = 0x04034b50;

struct CentralEntry {
  std::uint16_t flags = 0;
  std::uint16_t method = 0;
  std::uint64_t compressed_size = 0;
  std::uint64_t uncompressed_size = 0;
  std::uint64_t local_offset = 0;
  std::size_t name_offset = 0;
  std::size_t name_length = 0;
};

struct Directory {
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
  std::uint64_t entries = 0;
};

std::optional<std::size_t> find_eocd(ByteView b) {
  if (b.size() < 22) return std::nullopt;
  // EOCD sits within the last 22 + 65535 (max comment) bytes.
  const std::size_t lowest = b.size() > 22 + 0xFFFF ? b.size() - 22 - 0xFFFF : 0;
  for (std::size_t at = b.size() - 22 + 1; at-- > lowest;) {
    if (le32(b, at) == kEocdSig) return at;
  }
  return std::nullopt;
}

std::optional<Directory> read_directory(ByteView b, std::size_t eocd) {
  Directory dir{le32(b, eocd + 16), le32(b, eocd + 12), le16(b, eocd + 10)};
  const bool needs_zip64 =
      dir.offset == 0xFFFFFFFF || dir.size == 0xFFFFFFFF || dir.entries == 0xFFFF;
  if (needs_zip64) {
    if (eocd < 20 || le32(b, eocd - 20) != kZip64LocatorSig) return std::nullopt;
    const std::uint64_t z64 = le64(b, eocd - 20 + 8);
    if (z64 > b.size() || b.size() - z64 < 56 || le32(b, z64) != kZip64EocdSig) {
      return std::nullopt;
    }
    dir.entries = le64(b, z64 + 32);
    dir.size = le64(b, z64 + 40);
    dir.offset = le64(b, z64 + 48);
  }
  if (dir.offset > b.size() || dir.size > b.size() - dir.offset) return std::nullopt;
  return dir;
}

// Fills 64-bit sizes from the ZIP64 extended-information extra field.
bool apply_zip64_extra(ByteView b, std::size_t extra, std::size_t extra_len, CentralEntry& e) {
  std::size_t at = extra;
  const std::size_t end = extra + extra_len;
  while (at + 4 <= end) {
    const std::uint16_t id = le16(b, at);
    const std::uint16_t len = le16(b, at + 2);
    at += 4;
    if (at + len > end) return false;
    if (id == 0x0001) {
      std::size_t p = at;
      auto take = [&](std::uint64_t& field) {
        if (field != 0xFFFFFFFF) return true;
        if (p + 8 > at + len) return false;
        field = le64(b, p);
        p += 8;
        return true;
      };
      return take(e.uncompressed_size) && take(e.compressed_size) && take(e.local_offset);
    }
    at += len;
  }
  return e.uncompressed_size != 0xFFFFFFFF && e.compressed_size != 0xFFFFFFFF &&
         e.local_offset != 0xFFFFFFFF;
}

std::optional<std::vector<CentralEntry>> read_central_entries(ByteView b, const Directory& dir) {
  std::vector<CentralEntry> entries;
  std::size_t at = dir.offset;
  const std::size_t end = dir.offset + dir.size;
  for (std::uint64_t i = 0; i < dir.entries; ++i) {
    if (at + 46 > end || le32(b, at) != kCentralSig) return std::nullopt;
    CentralEntry e;
    e.flags = le16(b, at + 8);
    e.method = le16(b, at + 10);
    e.compressed_size = le32(b, at + 20);
    e.uncompressed_size = le32(b, at + 24);
    const std::size_t name_len = le16(b, at + 28);
    const std::size_t extra_len = le16(b, at + 30);
    const std::size_t comment_len = le16(b, at + 32);
    e.local_offset = le32(b, at + 42);
    e.name_offset = at + 46;
    e.name_length = name_len;
    const std::size_t next = at + 46 + name_len + extra_len + comment_len;
    if (next > end) return std::nullopt;
    if (!apply_zip64_extra(b, e.name_offset + name_len, extra_len, e)) return std::nullopt;
    entries.push_back(e);
    at = next;
  }
  return entries;
}

std::optional<Bytes> canonicalize_zip(ByteView b, std::vector<std::string>& diag) {
  const auto eocd = find_eocd(b);
  if (!eocd) {
    diag.emplace_back("zip: end of central directory not found");
    return std::nullopt;
  }
  const auto dir = read_directory(b, *eocd);
  if (!dir) {
    diag.emplace_back("zip: central directory out of bounds");
    return std::nullopt;
  }
  const auto entries = read_central_entries(b, *dir);
  if (!entries) {
    diag.emplace_back("zip: malformed central directory record");
    return std::nullopt;
  }

  Bytes out;
  for (const CentralEntry& e : *entries) {
    const std::size_t lh = e.local_offset;
    if (lh > b.size() || b.size() - lh < 30 || le32(b, lh) != kLocalSig) {
      diag.emplace_back("zip: bad local header offset");
      return std::nullopt;
    }
    const std::size_t data = lh + 30 + le16(b, lh + 26) + le16(b, lh + 28);
    if (data > b.size() || e.compressed_size > b.size() - data) {
      diag.emplace_back("zip: entry data out of bounds");
      return std::nullopt;
    }
    const auto name = b.subspan(e.name_offset, e.name_length);
    const auto payload = b.subspan(data, e.compressed_size);
    out.insert(out.end(), name.begin(), name.end());

    const std::string label(name.begin(), name.end());
    const bool encrypted = (e.flags & 0x1) != 0;
    if (encrypted || (e.method != 0 && e.method != 8)) {
      diag.push_back("zip: entry '" + label + "' copied raw (encrypted or unsupported method)");
      out.insert(out.end(), payload.begin(), payload.end());
      continue;
    }
    if (e.method == 0) {
      out.insert(out.end(), payload.begin(), payload.end());
      continue;
    }
    Bytes inflated;
    if (detail::inflate(payload, true, kMaxEntryOutput, inflated)) {
      out.insert(out.end(), inflated.begin(), inflated.end());
    } else {
      diag.push_back("zip: entry '" + label + "' failed to inflate, copied raw");
      out.insert(out.end(), payload.begin(), payload.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// PDF

std::size_t find(ByteView b, std::string_view needle, std::size_t from) {
  if (needle.empty() || b.size() < needle.size()) return b.size();
  const auto it = std::search(b.begin() + static_cast<std::ptrdiff_t>(std::min(from, b.size())),
                              b.end(), needle.begin(), needle.end());
  return static_cast<std::size_t>(it - b.begin());
}

Bytes canonicalize_pdf(ByteView b, std::vector<std::string>& diag) {
  constexpr std::string_view kStream = "stream";
  constexpr std::string_view kEnd = "endstream";
  Bytes out;
  out.reserve(b.size());
  std::size_t copied = 0;
  std::size_t cursor = 0;
  while (true) {
    const std::size_t kw = find(b, kStream, cursor);
    if (kw >= b.size()) break;
    std::size_t after = kw + kStream.size();
    const bool is_end_keyword = kw >= 3 && std::memcmp(b.data() + kw - 3, "end", 3) == 0;
    if (is_end_keyword || after >= b.size() || (b[after] != '\n' && b[after] != '\r')) {
      cursor = kw + 1;
      continue;
    }
    if (b[after] == '\r' && after + 1 < b.size() && b[after + 1] == '\n') {
      after += 2;
    } else {
      after += 1;
    }
    const std::size_t end = find(b, kEnd, after);
    if (end >= b.size()) break;
    std::size_t data_end = end;
    if (data_end > after && b[data_end - 1] == '\n') --data_end;
    if (data_end > after && b[data_end - 1] == '\r') --data_end;

    Bytes inflated;
    if (detail::inflate(b.subspan(after, data_end - after), false, kMaxPdfStreamOutput, inflated)) {
      out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(copied),
                 b.begin() + static_cast<std::ptrdiff_t>(after));
      out.insert(out.end(), inflated.begin(), inflated.end());
      copied = data_end;
    } else {
      diag.push_back("pdf: stream at offset " + std::to_string(after) + " kept verbatim");
    }
    cursor = end + kEnd.size();
  }
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(copied), b.end());
  return out;
}

}  // namespace

std::string_view to_string(FileKind kind) noexcept {
  switch (kind) {
    case FileKind::Pdf: return "pdf";
    case FileKind::Ooxml: return "ooxml";
    case FileKind::Ole2: return "ole2";
    case FileKind::Rtf: return "rtf";
    case FileKind::Raw: return "raw";
  }
  return "raw";
}

FileKind detect_kind(ByteView bytes) noexcept {
  if (starts_with(bytes, std::string_view{"%PDF"})) return FileKind::Pdf;
  if (starts_with(bytes, kZipMagic)) return FileKind::Ooxml;
  if (starts_with(bytes, kOle2Magic)) return FileKind::Ole2;
  if (starts_with(bytes, std::string_view{"{\\rtf"})) return FileKind::Rtf;
  return FileKind::Raw;
}

CanonicalStream canonicalize(ByteView bytes) {
  CanonicalStream result;
  result.source_kind = detect_kind(bytes);
  switch (result.source_kind) {
    case FileKind::Ooxml:
      if (auto zip = canonicalize_zip(bytes, result.diagnostics)) {
        result.bytes = std::move(*zip);
        // An archive whose entries are all empty would otherwise erase the file.
        if (result.bytes.empty() && !bytes.empty()) {
          result.diagnostics.emplace_back("zip: archive has no content");
          result.bytes.assign(bytes.begin(), bytes.end());
          result.fallback_used = true;
        }
      } else {
        result.bytes.assign(bytes.begin(), bytes.end());
        result.fallback_used = true;
      }
      break;
    case FileKind::Pdf:
      result.bytes = canonicalize_pdf(bytes, result.diagnostics);
      break;
    case FileKind::Ole2:
    case FileKind::Rtf:
    case FileKind::Raw:
      result.bytes.assign(bytes.begin(), bytes.end());
      break;
  }
  return result;
}

namespace detail {

bool inflate(ByteView input, bool raw, std::size_t max_output, Bytes& out) {
  out.clear();
  z_stream zs{};
  if (inflateInit2(&zs, raw ? -MAX_WBITS : MAX_WBITS) != Z_OK) return false;

  std::array<std::uint8_t, 1 << 15> chunk{};
  std::size_t consumed = 0;
  int status = Z_OK;
  while (status == Z_OK) {
    if (zs.avail_in == 0 && consumed < input.size()) {
      const std::size_t n = std::min<std::size_t>(input.size() - consumed, 1u << 30);
      zs.next_in = const_cast<Bytef*>(input.data() + consumed);
      zs.avail_in = static_cast<uInt>(n);
      consumed += n;
    }
    zs.next_out = chunk.data();
    zs.avail_out = static_cast<uInt>(chunk.size());
    status = ::inflate(&zs, Z_NO_FLUSH);
    const std::size_t produced = chunk.size() - zs.avail_out;
    if (out.size() + produced > max_output) {
      status = Z_MEM_ERROR;
      break;
    }
    out.insert(out.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(produced));
    if (status == Z_BUF_ERROR && (zs.avail_in != 0 || consumed < input.size())) {
      status = Z_OK;  // output buffer was full; keep going
    }
  }
  inflateEnd(&zs);
  if (status != Z_STREAM_END) out.clear();
  return status == Z_STREAM_END;
}

}  // namespace detail

}  // namespace entroscan
