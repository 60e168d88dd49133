#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "entroscan/corpus.hpp"
#include "entroscan/entropy.hpp"
#include "entroscan/error.hpp"
#include "entroscan/eval.hpp"

using namespace entroscan;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("entroscan_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("ingest attaches labels by relative path") {
  const fs::path dir = fresh_dir("ingest");
  write(dir / "a.txt", "alpha");
  write(dir / "sub" / "b.txt", "bravo");
  write(dir / "c.txt", "charlie");
  write(dir / "labels.csv", "path,label\na.txt,benign\nsub/b.txt,malicious\n");
  const LabeledCorpus corpus = ingest(dir, dir / "labels.csv");
  REQUIRE(corpus.entries.size() == 3);
  CHECK(corpus.entries[0].relative == "a.txt");
  CHECK(corpus.entries[0].label == Label::Benign);
  CHECK(corpus.entries[1].relative == "c.txt");
  CHECK_FALSE(corpus.entries[1].label.has_value());
  CHECK(corpus.entries[2].relative == "sub/b.txt");
  CHECK(corpus.entries[2].label == Label::Malicious);
  CHECK(corpus.entries[0].file_id.size() == 64);
}

TEST_CASE("duplicate content is collapsed with a warning") {
  const fs::path dir = fresh_dir("dupes");
  write(dir / "one.bin", "same bytes");
  write(dir / "two.bin", "same bytes");
  const LabeledCorpus corpus = ingest(dir);
  CHECK(corpus.entries.size() == 1);
  CHECK(corpus.entries[0].relative == "one.bin");
  CHECK(corpus.warnings.size() == 1);
}

TEST_CASE("label CSV errors name the line") {
  const fs::path dir = fresh_dir("badcsv");
  write(dir / "labels.csv", "path,label\na.txt,benign\nb.txt,evil\n");
  try {
    read_label_csv(dir / "labels.csv");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  write(dir / "noheader.csv", "a.txt,benign\n");
  CHECK_THROWS_AS(read_label_csv(dir / "noheader.csv"), Error);
  try {
    read_label_csv(dir / "missing.csv");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
  try {
    ingest(dir / "no_such_dir");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}

TEST_CASE("synthetic files are deterministic per seed and index") {
  SyntheticSpec spec{.n_benign = 3, .n_malicious = 3, .seed = 42};
  for (std::size_t i = 0; i < 6; ++i) {
    const SyntheticFile a = synthesize(spec, i);
    const SyntheticFile b = synthesize(spec, i);
    CHECK(a.bytes == b.bytes);
    CHECK(a.name == b.name);
    CHECK(a.label == (i < 3 ? Label::Benign : Label::Malicious));
  }
  SyntheticSpec other = spec;
  other.seed = 43;
  CHECK(synthesize(other, 0).bytes != synthesize(spec, 0).bytes);
}

TEST_CASE("malicious files carry a high-entropy blob and a constant run") {
  SyntheticSpec spec{.n_benign = 10, .n_malicious = 10, .seed = 7};
  for (std::size_t i = 0; i < 20; ++i) {
    const SyntheticFile f = synthesize(spec, i);
    CHECK(f.bytes.size() >= spec.base_min);
    const auto ets = compute_ets(f.bytes);
    const double hi = *std::max_element(ets.values.begin(), ets.values.end());
    const bool has_zero = std::find(ets.values.begin(), ets.values.end(), 0.0) != ets.values.end();
    if (f.label == Label::Malicious) {
      CHECK(hi > 7.5);
      CHECK(has_zero);
    } else {
      CHECK(hi < 7.5);
    }
  }
}

TEST_CASE("generate_synthetic writes files and labels") {
  const fs::path dir = fresh_dir("synth");
  SyntheticSpec spec{.n_benign = 2, .n_malicious = 2, .base_min = 4096, .base_max = 8192, .seed = 1};
  spec.blob_min = 1024;
  spec.blob_max = 2048;
  const LabeledCorpus written = generate_synthetic(spec, dir);
  CHECK(written.entries.size() == 4);
  const LabeledCorpus back = ingest(dir, dir / "labels.csv");
  REQUIRE(back.entries.size() == 4);
  std::vector<Label> labels;
  for (const auto& e : back.entries) {
    REQUIRE(e.label.has_value());
    labels.push_back(*e.label);
  }
  CHECK(std::count(labels.begin(), labels.end(), Label::Malicious) == 2);
}

TEST_CASE("a benign-only corpus cannot be evaluated") {
  SyntheticSpec spec{.n_benign = 6, .n_malicious = 0, .base_min = 4096, .base_max = 8192, .seed = 3};
  std::vector<Sample> samples;
  std::vector<Label> labels;
  for (std::size_t i = 0; i < 6; ++i) {
    const SyntheticFile f = synthesize(spec, i);
    samples.push_back({compute_ets(f.bytes).values, f.label, f.name});
    labels.push_back(f.label);
  }
  PipelineConfig config;
  config.codebook_size = 4;
  config.forest.n_trees = 5;
  try {
    repeated_holdout(labels, make_pipeline_scorer(samples, config), HoldoutOptions{});
    FAIL("expected DegenerateLabels");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateLabels);
  }
}
