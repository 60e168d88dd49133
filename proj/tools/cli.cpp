#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "entroscan/classifier.hpp"
#include "entroscan/corpus.hpp"
#include "entroscan/entropy.hpp"
#include "entroscan/error.hpp"
#include "entroscan/eval.hpp"
#include "entroscan/parallel_for.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace entroscan::cli {

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::UnsupportedVersion:
      return kIo;
    default:
      return kUsage;
  }
}

/// Output sink: a file when a path is given, otherwise the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::trunc);
      if (!file_) throw Error(ErrorCode::IoError, "cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }
  void close() {
    if (!stream_->flush()) throw Error(ErrorCode::IoError, "write failed");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

json report_to_json(const EvalReport& r) {
  auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  json j = {{"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
            {"tpr", r.tpr},
            {"fpr", r.fpr},
            {"fnr", r.fnr},
            {"precision", r.precision},
            {"f1", r.f1},
            {"auc", num(r.auc)},
            {"tpr_at_max_fpr", num(r.tpr_at_max_fpr)}};
  if (r.degenerate.any()) {
    json flags = json::array();
    if (r.degenerate.tpr) flags.push_back("tpr");
    if (r.degenerate.fpr) flags.push_back("fpr");
    if (r.degenerate.precision) flags.push_back("precision");
    if (r.degenerate.f1) flags.push_back("f1");
    j["degenerate"] = flags;
  }
  if (!r.per_repeat.empty()) {
    json reps = json::array();
    for (const auto& p : r.per_repeat) reps.push_back(report_to_json(p));
    j["per_repeat"] = reps;
  }
  return j;
}

unsigned parse_families(const std::string& text) {
  unsigned mask = 0;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "global") mask |= kGlobalFamily;
    else if (item == "dwt") mask |= kDwtFamily;
    else if (item == "bow") mask |= kBowFamily;
    else if (item == "all") mask |= kAllFamilies;
    else throw CLI::ValidationError("--families", "unknown family '" + item + "'");
  }
  return mask;
}

/// Labeled entropy series for every labeled file under `dataset`.
std::vector<Sample> load_samples(const std::string& dataset, const std::string& labels,
                                 std::ostream& err) {
  const LabeledCorpus corpus = ingest(dataset, fs::path(labels));
  for (const auto& w : corpus.warnings) err << "warning: " << w << '\n';
  std::vector<const CorpusEntry*> labeled;
  for (const auto& e : corpus.entries) {
    if (e.label) labeled.push_back(&e);
  }
  std::vector<std::optional<Sample>> loaded(labeled.size());
  std::vector<std::string> skipped(labeled.size());
  parallel_for(labeled.size(), [&](std::size_t i) {
    const Bytes bytes = read_file(labeled[i]->path);
    try {
      const CanonicalStream canonical = canonicalize(bytes);
      loaded[i] = Sample{compute_ets(canonical.bytes).values, *labeled[i]->label, labeled[i]->file_id};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyInput) throw;
      skipped[i] = e.what();
    }
  });
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (loaded[i]) {
      samples.push_back(std::move(*loaded[i]));
    } else {
      err << "warning: skipping " << labeled[i]->relative << " (" << skipped[i] << ")\n";
    }
  }
  return samples;
}

/// Expands directories recursively; plain files are kept as given.
std::vector<fs::path> expand_paths(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    std::error_code ec;
    if (fs::is_directory(input, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::recursive_directory_iterator(input, ec)) {
        if (entry.is_regular_file(ec)) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(input);
    }
  }
  return files;
}

// --- subcommands -----------------------------------------------------------

int cmd_entropy(const std::string& file, bool csv, std::ostream& out) {
  const Bytes bytes = read_file(file);
  const CanonicalStream canonical = canonicalize(bytes);
  const EntropyTimeSeries ets = compute_ets(canonical.bytes);
  if (csv) {
    char line[64];
    for (std::size_t i = 0; i < ets.size(); ++i) {
      std::snprintf(line, sizeof line, "%zu,%.6f\n", i, ets.values[i]);
      out << line;
    }
    return kSuccess;
  }
  json j = {{"file_id", content_id(bytes)},
            {"kind", std::string(to_string(canonical.source_kind))},
            {"fallback_used", canonical.fallback_used},
            {"window_size", ets.window_size},
            {"values", ets.values}};
  out << j.dump() << '\n';
  return kSuccess;
}

int cmd_extract(const std::vector<std::string>& inputs, const std::string& codebook_path,
                const std::string& out_path, const std::string& labels_path, std::ostream& out,
                std::ostream& err) {
  const Codebook codebook = load_codebook(codebook_path);
  std::map<std::string, Label> labels;
  if (!labels_path.empty()) labels = read_label_csv(labels_path);

  std::error_code csv_ec;
  const fs::path csv_canonical = labels_path.empty() ? fs::path() : fs::weakly_canonical(labels_path, csv_ec);

  // (path, key used for label lookup)
  std::vector<std::pair<fs::path, std::string>> files;
  for (const auto& input : inputs) {
    std::error_code ec;
    if (fs::is_directory(input, ec)) {
      for (const auto& p : expand_paths({input})) {
        if (!csv_canonical.empty() && fs::weakly_canonical(p, ec) == csv_canonical) continue;
        files.emplace_back(p, p.lexically_relative(input).generic_string());
      }
    } else {
      files.emplace_back(input, fs::path(input).lexically_normal().generic_string());
    }
  }

  std::vector<std::string> lines(files.size());
  std::vector<std::string> errors(files.size());
  std::vector<bool> io_failed(files.size(), false);
  parallel_for(files.size(), [&](std::size_t i) {
    try {
      FeatureVector fv = extract(read_file(files[i].first), codebook);
      auto label = labels.find(files[i].second);
      if (label == labels.end()) label = labels.find(files[i].first.filename().generic_string());
      if (label != labels.end()) fv.label = label->second;
      std::ostringstream line;
      write_feature_record(line, fv);
      lines[i] = line.str();
    } catch (const Error& e) {
      errors[i] = e.what();
      io_failed[i] = e.code() == ErrorCode::IoError;
    }
  });

  Sink sink(out_path, out);
  // Header record so `train` can embed the codebook in the model.
  sink.get() << serialize_codebook(codebook);
  bool any_io = false;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!errors[i].empty()) {
      err << "warning: " << files[i].first.string() << ": " << errors[i] << '\n';
      any_io = any_io || io_failed[i];
      continue;
    }
    sink.get() << lines[i];
  }
  sink.close();
  return any_io ? kIo : kSuccess;
}

int cmd_build_codebook(const std::string& dir, std::size_t segment_len, std::size_t k,
                       double sample_frac, std::uint64_t seed, const std::string& out_path,
                       std::ostream& out, std::ostream& err) {
  const LabeledCorpus corpus = ingest(dir);
  for (const auto& w : corpus.warnings) err << "warning: " << w << '\n';
  std::vector<FeatureMatrix> per_file(corpus.entries.size());
  parallel_for(corpus.entries.size(), [&](std::size_t i) {
    const Bytes bytes = read_file(corpus.entries[i].path);
    try {
      per_file[i] = local_features(compute_ets(canonicalize(bytes).bytes).values, segment_len);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyInput) throw;
    }
  });
  FeatureMatrix all;
  all.dim = descriptor_dim(segment_len);
  for (const auto& m : per_file) all.data.insert(all.data.end(), m.data.begin(), m.data.end());

  KMeansOptions options;
  options.k = k;
  options.sample_fraction = sample_frac;
  options.seed = seed;
  KMeansTrace trace;
  const Codebook codebook = build_codebook(all, segment_len, options, &trace);
  save_codebook(codebook, out_path);
  out << json{{"files", corpus.entries.size()},
              {"segments", all.rows()},
              {"sampled", trace.sample_size},
              {"iterations", trace.iterations},
              {"converged", trace.converged},
              {"objective", trace.objective.back()}}
             .dump()
      << '\n';
  return kSuccess;
}

int cmd_train(const std::string& features_path, const std::string& codebook_path,
              ForestConfig config, const std::string& out_path, std::ostream& out) {
  std::ifstream in(features_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + features_path);
  std::stringstream text;
  text << in.rdbuf();
  std::string records_text = text.str();

  std::optional<Codebook> codebook;
  const std::size_t first_end = std::min(records_text.find('\n'), records_text.size());
  const std::string first = records_text.substr(0, first_end);
  const json header = json::parse(first, nullptr, false);
  if (!header.is_discarded() && header.is_object() && header.contains("codebook")) {
    codebook = parse_codebook(first);
    records_text.erase(0, first_end);  // keeps line numbers in later errors
  }
  if (!codebook_path.empty()) codebook = load_codebook(codebook_path);
  if (!codebook) {
    throw CLI::ValidationError("--codebook", features_path + " has no codebook header; pass --codebook");
  }

  std::istringstream records_in(records_text);
  std::vector<FeatureVector> records = read_feature_records(records_in);
  std::vector<FeatureVector> labeled;
  for (auto& r : records) {
    if (r.label) labeled.push_back(std::move(r));
  }
  const TrainedModel model = train(labeled, config, std::move(*codebook));
  save_model(model, out_path);
  out << json{{"samples", labeled.size()},
              {"feature_dim", model.feature_dim()},
              {"trees", model.forest.trees.size()}}
             .dump()
      << '\n';
  return kSuccess;
}

int cmd_scan(const std::vector<std::string>& inputs, const std::string& model_path, double threshold,
             std::ostream& out) {
  const TrainedModel model = load_model(model_path);
  const std::vector<fs::path> files = expand_paths(inputs);
  std::vector<std::string> lines(files.size());
  std::vector<bool> io_failed(files.size(), false);
  parallel_for(files.size(), [&](std::size_t i) {
    json record;
    record["path"] = files[i].string();
    try {
      const FeatureVector fv = extract(read_file(files[i]), model.codebook);
      const Verdict v = predict(model, fv.values, threshold);
      record = {{"file_id", fv.file_id},
                {"path", files[i].string()},
                {"score", v.score},
                {"label", std::string(to_string(v.label))}};
    } catch (const Error& e) {
      record["error"] = std::string(to_string(e.code()));
      record["message"] = e.what();
      io_failed[i] = e.code() == ErrorCode::IoError;
    }
    lines[i] = record.dump();
  });
  bool any_io = false;
  for (std::size_t i = 0; i < files.size(); ++i) {
    out << lines[i] << '\n';
    any_io = any_io || io_failed[i];
  }
  return any_io ? kIo : kSuccess;
}

void write_roc(const std::string& path, std::span<const ScoredLabel> scores) {
  std::ofstream csv(path, std::ios::trunc);
  if (!csv) throw Error(ErrorCode::IoError, "cannot write " + path);
  csv << "threshold,fpr,tpr\n";
  char line[96];
  for (const auto& p : roc_curve(scores)) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.threshold, p.fpr, p.tpr);
    csv << line;
  }
  if (!csv.flush()) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy-signal malicious document detector", "entroscan"};
  app.require_subcommand(1);

  // entropy
  std::string entropy_file;
  bool entropy_csv = false;
  auto* entropy = app.add_subcommand("entropy", "Dump the entropy time series of a file");
  entropy->add_option("file", entropy_file)->required();
  entropy->add_flag("--csv", entropy_csv, "Emit index,entropy rows");

  // extract
  std::vector<std::string> extract_paths;
  std::string extract_codebook, extract_out, extract_labels;
  auto* extract_cmd = app.add_subcommand("extract", "Export feature vectors as JSON lines");
  extract_cmd->add_option("path", extract_paths)->required();
  extract_cmd->add_option("--codebook", extract_codebook, "Codebook or model file")->required();
  extract_cmd->add_option("--out", extract_out, "Output JSONL (default stdout)");
  extract_cmd->add_option("--labels", extract_labels, "path,label CSV attaching labels");

  // build-codebook
  std::string cb_dir, cb_out;
  std::size_t cb_segment = kDefaultSegmentLength, cb_k = kDefaultCodebookSize;
  double cb_frac = kDefaultSampleFraction;
  std::uint64_t cb_seed = 0;
  auto* cb = app.add_subcommand("build-codebook", "Cluster local segment features into a codebook");
  cb->add_option("dir", cb_dir)->required();
  cb->add_option("--segment-len", cb_segment)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  cb->add_option("--codebook-size", cb_k)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  cb->add_option("--sample-frac", cb_frac)->check(CLI::Range(0.0, 1.0));
  cb->add_option("--seed", cb_seed)->required();
  cb->add_option("--out", cb_out)->required();

  // train
  std::string train_features, train_codebook, train_out;
  ForestConfig train_config;
  auto* train_cmd = app.add_subcommand("train", "Train a random forest on exported features");
  train_cmd->add_option("--features", train_features)->required();
  train_cmd->add_option("--codebook", train_codebook, "Codebook used for extraction (default: the features header)");
  train_cmd->add_option("--trees", train_config.n_trees)->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-depth", train_config.max_depth)->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train_config.seed)->required();
  train_cmd->add_option("--out", train_out)->required();

  // scan
  std::vector<std::string> scan_paths;
  std::string scan_model;
  double scan_threshold = 0.5;
  auto* scan = app.add_subcommand("scan", "Score files with a trained model");
  scan->add_option("path", scan_paths)->required();
  scan->add_option("--model", scan_model)->required();
  scan->add_option("--threshold", scan_threshold)->check(CLI::Range(0.0, 1.0));

  // evaluate / gridsearch share pipeline options
  std::string dataset, labels, grid_file, report_out, roc_out, families = "all";
  HoldoutOptions holdout;
  PipelineConfig pipeline;
  bool kfold = false;
  auto add_pipeline_options = [&](CLI::App* cmd) {
    cmd->add_option("--dataset", dataset)->required();
    cmd->add_option("--labels", labels)->required();
    cmd->add_option("--repeats", holdout.repeats)->check(CLI::PositiveNumber);
    cmd->add_option("--split", holdout.train_fraction)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--seed", holdout.seed)->required();
    cmd->add_option("--threshold", holdout.threshold)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--sample-frac", pipeline.sample_fraction)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--out", report_out, "Write the report here (default stdout)");
  };
  auto* evaluate = app.add_subcommand("evaluate", "Repeated holdout evaluation of the full pipeline");
  add_pipeline_options(evaluate);
  evaluate->add_option("--trees", pipeline.forest.n_trees)->check(CLI::PositiveNumber);
  evaluate->add_option("--max-depth", pipeline.forest.max_depth)->check(CLI::PositiveNumber);
  evaluate->add_option("--segment-len", pipeline.segment_length)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  evaluate->add_option("--codebook-size", pipeline.codebook_size)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  evaluate->add_option("--families", families, "Comma list of global,dwt,bow (default all)");
  evaluate->add_flag("--kfold", kfold, "Stratified k-fold with k = --repeats instead of random splits");
  evaluate->add_option("--roc", roc_out, "Write threshold,fpr,tpr rows of the pooled ROC curve");

  auto* grid = app.add_subcommand("gridsearch", "Rank parameter grid points by AUC");
  add_pipeline_options(grid);
  grid->add_option("--grid", grid_file, "JSON grid definition")->required();

  // synth
  std::string synth_out;
  SyntheticSpec synth_spec;
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--benign", synth_spec.n_benign)->required();
  synth->add_option("--malicious", synth_spec.n_malicious)->required();
  synth->add_option("--seed", synth_spec.seed)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*entropy) return cmd_entropy(entropy_file, entropy_csv, out);
    if (*extract_cmd) return cmd_extract(extract_paths, extract_codebook, extract_out, extract_labels, out, err);
    if (*cb) return cmd_build_codebook(cb_dir, cb_segment, cb_k, cb_frac, cb_seed, cb_out, out, err);
    if (*train_cmd) return cmd_train(train_features, train_codebook, train_config, train_out, out);
    if (*scan) return cmd_scan(scan_paths, scan_model, scan_threshold, out);
    if (*synth) {
      const LabeledCorpus corpus = generate_synthetic(synth_spec, synth_out);
      out << json{{"files", corpus.entries.size()}, {"labels", (fs::path(synth_out) / "labels.csv").string()}}.dump()
          << '\n';
      return kSuccess;
    }
    if (*evaluate || *grid) {
      holdout.protocol = kfold ? Protocol::StratifiedKFold : Protocol::RepeatedHoldout;
      pipeline.families = parse_families(families);
      const std::vector<Sample> samples = load_samples(dataset, labels, err);
      json result;
      if (*evaluate) {
        std::vector<Label> ys;
        for (const auto& s : samples) ys.push_back(s.label);
        PooledScores pooled;
        const EvalReport report = repeated_holdout(ys, make_pipeline_scorer(samples, pipeline, &pooled), holdout);
        result = report_to_json(report);
        if (!roc_out.empty()) write_roc(roc_out, pooled.scores);
      } else {
        std::ifstream in(grid_file);
        if (!in) throw Error(ErrorCode::IoError, "cannot open " + grid_file);
        const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const std::vector<GridPoint> points = parse_grid(text).points();
        result = json::array();
        for (const GridResult& r : grid_search(samples, points, pipeline, holdout)) {
          json entry = {{"n_trees", r.point.n_trees},
                        {"max_depth", r.point.max_depth},
                        {"segment_length", r.point.segment_length},
                        {"codebook_size", r.point.codebook_size},
                        {"auc", std::isnan(r.auc) ? json(nullptr) : json(r.auc)}};
          if (!r.error.empty()) entry["error"] = r.error;
          result.push_back(entry);
        }
      }
      Sink sink(report_out, out);
      sink.get() << result.dump(2) << '\n';
      sink.close();
      return kSuccess;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace entroscan::cli
