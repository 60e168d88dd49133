#include "entroscan/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <string_view>
#include <unordered_map>

#include "entroscan/error.hpp"
#include "entroscan/rng.hpp"

namespace fs = std::filesystem;

namespace entroscan {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// ---------------------------------------------------------------------------
// Synthetic content

constexpr std::array<std::string_view, 48> kWords{
    "the",     "report",  "quarterly", "revenue", "of",      "and",      "meeting", "agenda",
    "project", "budget",  "review",    "team",    "please",  "find",     "attached", "summary",
    "for",     "with",    "results",   "section", "table",   "figure",   "analysis", "data",
    "is",      "in",      "to",        "a",       "policy",  "update",   "customer", "contract",
    "invoice", "payment", "schedule",  "office",  "draft",   "final",    "approved", "notes",
    "we",      "will",    "discuss",   "next",    "week",    "regional", "sales",    "growth"};

void append_prose(Bytes& out, std::size_t n, Rng& rng) {
  const std::size_t end = out.size() + n;
  std::size_t words_in_sentence = 0;
  while (out.size() < end) {
    const auto& w = kWords[rng.below(kWords.size())];
    out.insert(out.end(), w.begin(), w.end());
    if (++words_in_sentence > 6 + rng.below(10)) {
      out.push_back('.');
      out.push_back(rng.below(4) == 0 ? '\n' : ' ');
      words_in_sentence = 0;
    } else {
      out.push_back(' ');
    }
  }
  out.resize(end);
}

// Fixed-width little-endian records, mostly zero bytes.
void append_table(Bytes& out, std::size_t n, Rng& rng) {
  const std::size_t end = out.size() + n;
  const std::size_t record = 16 << rng.below(3);
  while (out.size() < end) {
    for (std::size_t i = 0; i < record; ++i) {
      const bool filled = i < 4 && rng.below(3) != 0;
      out.push_back(filled ? static_cast<std::uint8_t>(rng.below(24)) : 0x00);
    }
  }
  out.resize(end);
}

void append_markup(Bytes& out, std::size_t n, Rng& rng) {
  static constexpr std::array<std::string_view, 6> kTags{"w:p", "w:r", "w:t", "row", "cell", "span"};
  const std::size_t end = out.size() + n;
  while (out.size() < end) {
    const auto& tag = kTags[rng.below(kTags.size())];
    const std::string open = "<" + std::string(tag) + " id=\"" + std::to_string(rng.below(10000)) + "\">";
    out.insert(out.end(), open.begin(), open.end());
    append_prose(out, 8 + rng.below(24), rng);
    const std::string close = "</" + std::string(tag) + ">\n";
    out.insert(out.end(), close.begin(), close.end());
  }
  out.resize(end);
}

void append_noise(Bytes& out, std::size_t n, Rng& rng) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(rng.below(256)));
}

Bytes benign_body(std::size_t size, Rng& rng) {
  Bytes out;
  out.reserve(size);
  const bool has_media = rng.below(3) == 0;
  while (out.size() < size) {
    const std::size_t block = std::min<std::size_t>(size - out.size(), rng.between(1024, 16384));
    switch (rng.below(has_media ? 4 : 3)) {
      case 0: append_prose(out, block, rng); break;
      case 1: append_table(out, block, rng); break;
      case 2: append_markup(out, block, rng); break;
      default: append_noise(out, std::min<std::size_t>(block, 8192), rng); break;
    }
  }
  out.resize(size);
  return out;
}

Bytes high_entropy_blob(std::size_t windows, Rng& rng) {
  Bytes blob;
  blob.reserve(windows * 256);
  std::array<std::uint8_t, 256> perm{};
  for (std::size_t w = 0; w < windows; ++w) {
    for (std::size_t i = 0; i < 256; ++i) perm[i] = static_cast<std::uint8_t>(i);
    rng.shuffle(std::span<std::uint8_t>(perm));
    blob.insert(blob.end(), perm.begin(), perm.end());
  }
  return blob;
}

}  // namespace

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
  return bytes;
}

std::map<std::string, Label> read_label_csv(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorCode::IoError, "cannot open label file " + csv.string());
  std::map<std::string, Label> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = trim(line);
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::ParseError, csv.string() + " line " + std::to_string(line_no) + ": " + why);
    };
    if (line_no == 1) {
      if (row != "path,label") fail("expected header 'path,label'");
      continue;
    }
    if (row.empty()) continue;
    const auto comma = row.rfind(',');
    if (comma == std::string::npos || comma == 0) fail("expected 'path,label'");
    const auto label = parse_label(trim(std::string_view(row).substr(comma + 1)));
    if (!label) fail("label must be 'benign' or 'malicious'");
    labels[fs::path(trim(std::string_view(row).substr(0, comma))).lexically_normal().generic_string()] = *label;
  }
  return labels;
}

LabeledCorpus ingest(const fs::path& root, const std::optional<fs::path>& labels_csv) {
  std::error_code ec;
  if (!fs::exists(root, ec)) throw Error(ErrorCode::IoError, "no such path: " + root.string());

  std::map<std::string, Label> labels;
  std::optional<fs::path> csv_canonical;
  if (labels_csv) {
    labels = read_label_csv(*labels_csv);
    csv_canonical = fs::weakly_canonical(*labels_csv, ec);
  }

  std::vector<std::pair<std::string, fs::path>> files;
  if (fs::is_regular_file(root, ec)) {
    files.emplace_back(root.filename().generic_string(), root);
  } else {
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot read directory " + root.string() + ": " + ec.message());
    for (const auto& entry : it) {
      if (!entry.is_regular_file(ec)) continue;
      if (csv_canonical && fs::weakly_canonical(entry.path(), ec) == *csv_canonical) continue;
      files.emplace_back(entry.path().lexically_relative(root).generic_string(), entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  LabeledCorpus corpus;
  std::unordered_map<std::string, std::string> seen;
  for (auto& [relative, path] : files) {
    const std::string id = content_id(read_file(path));
    if (auto [it, inserted] = seen.emplace(id, relative); !inserted) {
      corpus.warnings.push_back("duplicate content: '" + relative + "' matches '" + it->second + "', skipped");
      continue;
    }
    CorpusEntry entry;
    entry.path = path;
    entry.relative = relative;
    entry.file_id = id;
    if (auto l = labels.find(relative); l != labels.end()) entry.label = l->second;
    corpus.entries.push_back(std::move(entry));
  }
  return corpus;
}

SyntheticFile synthesize(const SyntheticSpec& spec, std::size_t index) {
  if (index >= spec.n_benign + spec.n_malicious) {
    throw std::out_of_range("synthesize: index beyond corpus size");
  }
  Rng rng(derive_seed(spec.seed, index));
  SyntheticFile file;
  file.label = index < spec.n_benign ? Label::Benign : Label::Malicious;
  const std::size_t ordinal = file.label == Label::Benign ? index : index - spec.n_benign;
  file.name = std::string(to_string(file.label)) + "_" + std::to_string(100000 + ordinal).substr(1) + ".bin";

  const std::size_t base_size = rng.between(spec.base_min, spec.base_max);
  file.bytes = benign_body(base_size, rng);
  if (file.label == Label::Benign) return file;

  const std::size_t blob_windows = std::max<std::size_t>(1, rng.between(spec.blob_min, spec.blob_max) / 256);
  Bytes payload = high_entropy_blob(blob_windows, rng);
  const std::size_t sled = rng.between(512, 4096);
  payload.insert(payload.end(), sled, 0x90);
  const std::size_t offset = 256 * rng.below(file.bytes.size() / 256 + 1);
  file.bytes.insert(file.bytes.begin() + static_cast<std::ptrdiff_t>(offset), payload.begin(), payload.end());
  return file;
}

LabeledCorpus generate_synthetic(const SyntheticSpec& spec, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  std::ofstream csv(out_dir / "labels.csv", std::ios::trunc);
  if (!csv) throw Error(ErrorCode::IoError, "cannot write labels.csv in " + out_dir.string());
  csv << "path,label\n";

  LabeledCorpus corpus;
  for (std::size_t i = 0; i < spec.n_benign + spec.n_malicious; ++i) {
    const SyntheticFile file = synthesize(spec, i);
    const fs::path path = out_dir / file.name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(file.bytes.data()), static_cast<std::streamsize>(file.bytes.size()));
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + path.string());
    csv << file.name << ',' << to_string(file.label) << '\n';
    corpus.entries.push_back({path, file.name, content_id(file.bytes), file.label});
  }
  if (!csv.flush()) throw Error(ErrorCode::IoError, "write failed for labels.csv");
  return corpus;
}

}  // namespace entroscan
