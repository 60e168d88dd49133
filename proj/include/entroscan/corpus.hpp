#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entroscan/features.hpp"
#include "entroscan/preprocess.hpp"

namespace entroscan {

/// Throws Error{IoError}.
Bytes read_file(const std::filesystem::path& path);

struct CorpusEntry {
  std::filesystem::path path;
  std::string relative;  // generic-format path relative to the corpus root
  std::string file_id;
  std::optional<Label> label;
};

struct LabeledCorpus {
  std::vector<CorpusEntry> entries;  // sorted by relative path
  std::vector<std::string> warnings;
};

/// `path,label` CSV with a header row. Throws Error{ParseError} naming the
/// line for rows without a comma or with a label other than benign/malicious,
/// Error{IoError} when unreadable.
std::map<std::string, Label> read_label_csv(const std::filesystem::path& csv);

/// Recursive walk of `root`. Files with identical content collapse to the
/// first one in path order (a warning is recorded). The label CSV itself is
/// skipped when it lives under `root`. Throws Error{IoError}.
LabeledCorpus ingest(const std::filesystem::path& root,
                     const std::optional<std::filesystem::path>& labels_csv = std::nullopt);

struct SyntheticSpec {
  std::size_t n_benign = 0;
  std::size_t n_malicious = 0;
  std::size_t blob_min = 4096;
  std::size_t blob_max = 65536;
  std::size_t base_min = 50 * 1024;
  std::size_t base_max = 500 * 1024;
  std::uint64_t seed = 0;
};

struct SyntheticFile {
  std::string name;
  Bytes bytes;
  Label label = Label::Benign;
};

/// File `index` of the corpus: indices below n_benign are benign. Each file
/// depends only on (seed, index).
///
/// Benign files chain low/medium entropy blocks: templated prose, sparse
/// numeric tables and the occasional compressed-looking chunk. Malicious
/// files take a benign base and splice in, at a 256-aligned seeded offset, a
/// maximal-entropy blob (independent random permutations of all byte values,
/// one per 256 bytes) followed by a constant 0x90 run of at least 512 bytes.
SyntheticFile synthesize(const SyntheticSpec& spec, std::size_t index);

/// Writes every file plus `labels.csv` under `out_dir`. Throws Error{IoError}.
LabeledCorpus generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace entroscan
