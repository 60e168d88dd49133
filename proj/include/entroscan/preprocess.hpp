#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace entroscan {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

enum class FileKind { Pdf, Ooxml, Ole2, Rtf, Raw };

std::string_view to_string(FileKind kind) noexcept;

/// Byte stream fed to the entropy stage. When a container could not be
/// parsed, `bytes` holds the original input and `fallback_used` is set.
struct CanonicalStream {
  Bytes bytes;
  FileKind source_kind = FileKind::Raw;
  bool fallback_used = false;
  /// Human-readable notes about entry-level or container-level failures.
  std::vector<std::string> diagnostics;
};

/// Magic-byte dispatch in priority order Pdf, Ooxml, Ole2, Rtf, Raw.
FileKind detect_kind(ByteView bytes) noexcept;

/// Produces the decompressed canonical form of a document. Never throws on
/// malformed input; failures degrade to passing the original bytes through.
///
/// - Ooxml: for each central-directory entry in order, the entry name followed
///   by its payload (inflated when deflated, verbatim when stored, encrypted or
///   using an unsupported method).
/// - Pdf: each `stream`..`endstream` payload that inflates as zlib data is
///   replaced by its inflated content; everything else is kept.
/// - Ole2, Rtf, Raw: unchanged.
CanonicalStream canonicalize(ByteView bytes);

namespace detail {

/// Inflates `input`. `raw` selects headerless deflate (ZIP), otherwise zlib
/// framing (PDF FlateDecode). Returns false on any error, on a stream that
/// does not reach its end marker, or when output would exceed `max_output`.
bool inflate(ByteView input, bool raw, std::size_t max_output, Bytes& out);

}  // namespace detail

}  // namespace entroscan
