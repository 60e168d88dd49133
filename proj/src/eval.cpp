#include "entroscan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "entroscan/error.hpp"
#include "entroscan/kernels.hpp"
#include "entroscan/parallel_for.hpp"
#include "entroscan/rng.hpp"
#include "entroscan/wavelet.hpp"
#include "json.hpp"

namespace entroscan {

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

bool has_both_classes(std::span<const ScoredLabel> scores) {
  bool pos = false;
  bool neg = false;
  for (const auto& s : scores) (s.positive ? pos : neg) = true;
  return pos && neg;
}

bool has_both_classes(std::span<const Label> labels, std::span<const std::size_t> idx) {
  bool pos = false;
  bool neg = false;
  for (std::size_t i : idx) (labels[i] == Label::Malicious ? pos : neg) = true;
  return pos && neg;
}

std::vector<ScoredLabel> sorted_descending(std::span<const ScoredLabel> scores) {
  std::vector<ScoredLabel> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
  return sorted;
}

}  // namespace

EvalReport metrics(const ConfusionCounts& c) {
  EvalReport r;
  r.counts = c;
  r.tpr = ratio(c.tp, c.tp + c.fn, r.degenerate.tpr);
  r.fnr = ratio(c.fn, c.tp + c.fn, r.degenerate.tpr);
  r.fpr = ratio(c.fp, c.fp + c.tn, r.degenerate.fpr);
  r.precision = ratio(c.tp, c.tp + c.fp, r.degenerate.precision);
  if (r.precision + r.tpr == 0.0) {
    r.degenerate.f1 = true;
    r.f1 = 0.0;
  } else {
    r.f1 = (2 * r.precision * r.tpr) / (r.precision + r.tpr);
  }
  return r;
}

ConfusionCounts confusion_at(std::span<const ScoredLabel> scores, double threshold) {
  ConfusionCounts c;
  for (const auto& s : scores) {
    const bool flagged = s.score >= threshold;
    if (s.positive) {
      ++(flagged ? c.tp : c.fn);
    } else {
      ++(flagged ? c.fp : c.tn);
    }
  }
  return c;
}

double roc_auc(std::span<const ScoredLabel> scores) {
  if (!has_both_classes(scores)) {
    throw Error(ErrorCode::DegenerateLabels, "roc_auc needs both classes");
  }
  std::vector<ScoredLabel> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
  double wins = 0.0;  // in units of half a pair
  double neg_below = 0.0;
  double pos_total = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    double pos = 0.0;
    double neg = 0.0;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      (sorted[j].positive ? pos : neg) += 1.0;
      ++j;
    }
    wins += pos * (2.0 * neg_below + neg);
    neg_below += neg;
    pos_total += pos;
    i = j;
  }
  return wins / (2.0 * pos_total * neg_below);
}

std::vector<RocPoint> roc_curve(std::span<const ScoredLabel> scores) {
  const auto sorted = sorted_descending(scores);
  double pos_total = 0.0;
  double neg_total = 0.0;
  for (const auto& s : sorted) (s.positive ? pos_total : neg_total) += 1.0;
  std::vector<RocPoint> curve{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double threshold = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == threshold) {
      (sorted[i].positive ? tp : fp) += 1.0;
      ++i;
    }
    curve.push_back({threshold, neg_total > 0 ? fp / neg_total : 0.0,
                     pos_total > 0 ? tp / pos_total : 0.0});
  }
  return curve;
}

double tpr_at_fpr(std::span<const ScoredLabel> scores, double max_fpr) {
  double best = 0.0;
  for (const auto& p : roc_curve(scores)) {
    if (p.fpr <= max_fpr) best = std::max(best, p.tpr);
  }
  return best;
}

Split stratified_split(std::span<const Label> labels, double train_fraction, std::uint64_t seed) {
  Rng rng(seed);
  Split split;
  for (Label cls : {Label::Benign, Label::Malicious}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    const std::size_t n = members.size();
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    else n_train = n;
    split.train.insert(split.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<Split> stratified_kfold(std::span<const Label> labels, std::size_t folds,
                                    std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("stratified_kfold needs at least 2 folds");
  Rng rng(seed);
  std::vector<std::size_t> fold_of(labels.size());
  for (Label cls : {Label::Benign, Label::Malicious}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t p = 0; p < members.size(); ++p) fold_of[members[p]] = p % folds;
  }
  std::vector<Split> splits(folds);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t f = 0; f < folds; ++f) (fold_of[i] == f ? splits[f].test : splits[f].train).push_back(i);
  }
  return splits;
}

EvalReport repeated_holdout(std::span<const Label> labels, const Scorer& scorer,
                            const HoldoutOptions& options) {
  if (options.repeats < 1) throw std::invalid_argument("repeated_holdout needs repeats >= 1");
  std::vector<std::size_t> all(labels.size());
  std::iota(all.begin(), all.end(), 0);
  if (!has_both_classes(labels, all)) {
    throw Error(ErrorCode::DegenerateLabels, "dataset must contain benign and malicious samples");
  }

  std::vector<Split> splits;
  if (options.protocol == Protocol::StratifiedKFold) {
    splits = stratified_kfold(labels, options.repeats, options.seed);
  } else {
    for (std::size_t r = 0; r < options.repeats; ++r) {
      splits.push_back(stratified_split(labels, options.train_fraction, derive_seed(options.seed, r)));
    }
  }

  EvalReport report;
  for (std::size_t r = 0; r < splits.size(); ++r) {
    const Split& split = splits[r];
    if (!has_both_classes(labels, split.train)) {
      throw Error(ErrorCode::DegenerateLabels, "training split " + std::to_string(r) + " lacks a class");
    }
    const std::vector<double> scores = scorer(split.train, split.test, derive_seed(options.seed, 1'000'000 + r));
    if (scores.size() != split.test.size()) {
      throw Error(ErrorCode::ShapeError, "scorer returned the wrong number of scores");
    }
    std::vector<ScoredLabel> scored(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      scored[i] = {scores[i], labels[split.test[i]] == Label::Malicious};
    }
    EvalReport rep = metrics(confusion_at(scored, options.threshold));
    if (has_both_classes(scored)) {
      rep.auc = roc_auc(scored);
      rep.tpr_at_max_fpr = tpr_at_fpr(scored, options.max_fpr);
    }
    report.per_repeat.push_back(std::move(rep));
  }

  const double n = static_cast<double>(report.per_repeat.size());
  auto mean = [&](double EvalReport::*field) {
    double sum = 0.0;
    for (const auto& rep : report.per_repeat) sum += rep.*field;
    return sum / n;
  };
  for (const auto& rep : report.per_repeat) {
    report.counts.tp += rep.counts.tp;
    report.counts.fp += rep.counts.fp;
    report.counts.tn += rep.counts.tn;
    report.counts.fn += rep.counts.fn;
    report.degenerate.tpr |= rep.degenerate.tpr;
    report.degenerate.fpr |= rep.degenerate.fpr;
    report.degenerate.precision |= rep.degenerate.precision;
    report.degenerate.f1 |= rep.degenerate.f1;
  }
  report.tpr = mean(&EvalReport::tpr);
  report.fpr = mean(&EvalReport::fpr);
  report.fnr = mean(&EvalReport::fnr);
  report.precision = mean(&EvalReport::precision);
  report.f1 = mean(&EvalReport::f1);
  report.auc = mean(&EvalReport::auc);
  report.tpr_at_max_fpr = mean(&EvalReport::tpr_at_max_fpr);
  return report;
}

Scorer make_pipeline_scorer(std::span<const Sample> samples, const PipelineConfig& config,
                            PooledScores* pooled) {
  return [samples, config, pooled](std::span<const std::size_t> train,
                                   std::span<const std::size_t> test, std::uint64_t seed) {
    const bool use_bow = (config.families & kBowFamily) != 0;
    Codebook codebook;
    if (use_bow) {
      FeatureMatrix corpus;
      corpus.dim = descriptor_dim(config.segment_length);
      for (std::size_t i : train) {
        const FeatureMatrix local = local_features(samples[i].ets, config.segment_length);
        corpus.data.insert(corpus.data.end(), local.data.begin(), local.data.end());
      }
      KMeansOptions km;
      km.k = config.codebook_size;
      km.sample_fraction = config.sample_fraction;
      km.seed = derive_seed(seed, 1);
      codebook = build_codebook(corpus, config.segment_length, km);
    }
    auto full_row = [&](std::span<const double> ets) {
      if (use_bow) return assemble_features(ets, codebook);
      std::vector<double> values;
      const auto globals = global_features(ets).as_array();
      values.insert(values.end(), globals.begin(), globals.end());
      const auto spectrum = energy_spectrum(ets);
      values.insert(values.end(), spectrum.energies.begin(), spectrum.energies.end());
      return values;
    };

    const std::vector<std::size_t> cols = family_columns(codebook.k, config.families);
    if (cols.empty()) throw std::invalid_argument("pipeline needs at least one feature family");
    auto matrix = [&](std::span<const std::size_t> idx) {
      std::vector<double> rows(idx.size() * cols.size());
      parallel_for(idx.size(), [&](std::size_t r) {
        const std::vector<double> full = full_row(samples[idx[r]].ets);
        for (std::size_t c = 0; c < cols.size(); ++c) rows[r * cols.size() + c] = full[cols[c]];
      });
      return rows;
    };
    const std::vector<double> train_rows = matrix(train);
    std::vector<Label> train_labels;
    for (std::size_t i : train) train_labels.push_back(samples[i].label);

    ForestConfig forest_config = config.forest;
    forest_config.seed = derive_seed(seed, 2);
    const Forest forest = train_forest(train_rows, cols.size(), train_labels, forest_config);

    const std::vector<double> test_rows = matrix(test);
    std::vector<double> scores(test.size());
    parallel::score_rows(forest, test_rows, scores);
    if (pooled) {
      for (std::size_t i = 0; i < test.size(); ++i) {
        pooled->scores.push_back({scores[i], samples[test[i]].label == Label::Malicious});
      }
    }
    return scores;
  };
}

std::vector<GridPoint> ParamGrid::points() const {
  std::vector<GridPoint> out;
  std::set<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> seen;
  for (std::size_t t : n_trees) {
    for (std::size_t d : max_depth) {
      for (std::size_t s : segment_length) {
        for (std::size_t k : codebook_size) {
          if (seen.emplace(t, d, s, k).second) out.push_back({t, d, s, k});
        }
      }
    }
  }
  return out;
}

ParamGrid parse_grid(std::string_view text) {
  using nlohmann::json;
  const json doc = json::parse(text.begin(), text.end(), nullptr, false);
  auto fail = [](const std::string& why) -> void { throw Error(ErrorCode::ParseError, "grid: " + why); };
  if (doc.is_discarded() || !doc.is_object()) fail("not a JSON object");
  for (const auto& item : doc.items()) {
    if (item.key() != "n_trees" && item.key() != "max_depth" && item.key() != "segment_length" &&
        item.key() != "codebook_size") {
      fail("unknown key '" + item.key() + "'");
    }
  }

  auto axis = [&](const char* key, std::vector<std::size_t>& values) {
    if (!doc.contains(key)) return;
    const json& v = doc[key];
    values.clear();
    auto push = [&](const json& x) {
      if (!x.is_number_unsigned() || x.get<std::uint64_t>() == 0) {
        fail(std::string(key) + " values must be positive integers");
      }
      values.push_back(x.get<std::size_t>());
    };
    if (v.is_array()) {
      for (const json& x : v) push(x);
    } else if (v.is_object()) {
      for (const char* field : {"start", "stop", "step"}) {
        if (!v.contains(field) || !v[field].is_number_unsigned()) {
          fail(std::string(key) + " range needs integer start/stop/step");
        }
      }
      const auto start = v["start"].get<std::size_t>();
      const auto stop = v["stop"].get<std::size_t>();
      const auto step = v["step"].get<std::size_t>();
      if (step == 0 || start == 0 || start > stop) fail(std::string(key) + " range is empty or invalid");
      for (std::size_t x = start; x <= stop; x += step) values.push_back(x);
    } else {
      push(v);
    }
    if (values.empty()) fail(std::string(key) + " is empty");
  };
  ParamGrid grid;
  axis("n_trees", grid.n_trees);
  axis("max_depth", grid.max_depth);
  axis("segment_length", grid.segment_length);
  axis("codebook_size", grid.codebook_size);
  for (std::size_t s : grid.segment_length) {
    if (s < 2) fail("segment_length values must be >= 2");
  }
  for (std::size_t k : grid.codebook_size) {
    if (k < 2) fail("codebook_size values must be >= 2");
  }
  return grid;
}

std::vector<GridResult> grid_search(std::span<const GridPoint> grid,
                                    const std::function<EvalReport(const GridPoint&)>& evaluate) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  std::vector<GridPoint> unique;
  for (const GridPoint& p : grid) {
    if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
  }

  std::vector<GridResult> ok;
  std::vector<GridResult> failed;
  for (const GridPoint& p : unique) {
    GridResult result;
    result.point = p;
    try {
      result.report = evaluate(p);
      result.auc = result.report.auc;
      if (std::isnan(result.auc)) result.error = "AUC undefined (a test split lacked a class)";
    } catch (const std::exception& e) {
      result.error = e.what();
    }
    (std::isnan(result.auc) ? failed : ok).push_back(std::move(result));
  }
  std::stable_sort(ok.begin(), ok.end(), [](const GridResult& a, const GridResult& b) {
    if (a.auc != b.auc) return a.auc > b.auc;
    if (a.point.n_trees != b.point.n_trees) return a.point.n_trees < b.point.n_trees;
    return a.point.max_depth < b.point.max_depth;
  });
  for (auto& f : failed) ok.push_back(std::move(f));
  return ok;
}

std::vector<GridResult> grid_search(std::span<const Sample> samples, std::span<const GridPoint> grid,
                                    const PipelineConfig& base, const HoldoutOptions& options) {
  std::vector<Label> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) labels.push_back(s.label);
  return grid_search(grid, [&](const GridPoint& p) {
    PipelineConfig config = base;
    config.forest.n_trees = p.n_trees;
    config.forest.max_depth = p.max_depth;
    config.segment_length = p.segment_length;
    config.codebook_size = p.codebook_size;
    return repeated_holdout(labels, make_pipeline_scorer(samples, config), options);
  });
}

}  // namespace entroscan
