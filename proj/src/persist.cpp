#include <fstream>
#include <sstream>

#include "entroscan/classifier.hpp"
#include "entroscan/error.hpp"
#include "json.hpp"

namespace entroscan {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxTreeDepth = 4096;

[[noreturn]] void parse_error(const std::string& why) {
  throw Error(ErrorCode::ParseError, "model document: " + why);
}

json codebook_to_json(const Codebook& book) {
  json centroids = json::array();
  for (std::size_t c = 0; c < book.k; ++c) {
    const auto row = book.centroid(c);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"k", book.k},
          {"segment_length", book.segment_length},
          {"seed", book.seed},
          {"centroids", std::move(centroids)}};
}

/// A model trained directly on feature rows carries an empty codebook.
Codebook codebook_from_json(const json& j, bool allow_empty = false) {
  if (!j.is_object()) parse_error("codebook must be an object");
  Codebook book;
  book.k = j.at("k").get<std::size_t>();
  book.segment_length = j.at("segment_length").get<std::size_t>();
  book.seed = j.at("seed").get<std::uint64_t>();
  if (book.segment_length < 2) parse_error("segment_length must be >= 2");
  if (allow_empty && book.k == 0) {
    if (!j.at("centroids").empty()) parse_error("centroids must have k rows");
    return book;
  }
  book.dim = descriptor_dim(book.segment_length);
  const json& rows = j.at("centroids");
  if (!rows.is_array() || rows.size() != book.k) parse_error("centroids must have k rows");
  for (const json& row : rows) {
    if (!row.is_array() || row.size() != book.dim) parse_error("centroid row has the wrong width");
    for (const json& v : row) book.centroids.push_back(v.get<double>());
  }
  try {
    book.validate();
  } catch (const Error& e) {
    parse_error(e.what());
  }
  return book;
}

json node_to_json(const DecisionTree& tree, std::int32_t id) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
  if (node.is_leaf()) return {{"leaf", node.leaf}};
  return {{"feature", node.feature},
          {"threshold", node.threshold},
          {"left", node_to_json(tree, node.left)},
          {"right", node_to_json(tree, node.right)}};
}

std::int32_t node_from_json(const json& j, DecisionTree& tree, std::size_t feature_dim,
                            std::size_t depth) {
  if (depth > kMaxTreeDepth) parse_error("tree nesting too deep");
  if (!j.is_object()) parse_error("tree node must be an object");
  const auto id = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    const double leaf = j["leaf"].get<double>();
    if (!(leaf >= 0.0 && leaf <= 1.0)) parse_error("leaf fraction outside [0, 1]");
    tree.nodes[static_cast<std::size_t>(id)].leaf = leaf;
    return id;
  }
  const auto feature = j.at("feature").get<std::int64_t>();
  if (feature < 0 || static_cast<std::size_t>(feature) >= feature_dim) {
    parse_error("feature index out of range");
  }
  const double threshold = j.at("threshold").get<double>();
  const std::int32_t left = node_from_json(j.at("left"), tree, feature_dim, depth + 1);
  const std::int32_t right = node_from_json(j.at("right"), tree, feature_dim, depth + 1);
  TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
  node.feature = static_cast<std::int32_t>(feature);
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  return id;
}

json parse_document(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) parse_error("not a JSON object");
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
    parse_error("missing format_version");
  }
  const auto version = doc["format_version"].get<std::int64_t>();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                "format_version " + std::to_string(version) + " (supported: " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  return doc;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  json trees = json::array();
  for (const auto& tree : model.forest.trees) trees.push_back(node_to_json(tree, 0));
  const ForestConfig& c = model.config;
  json doc = {{"format_version", model.format_version},
              {"config",
               {{"n_trees", c.n_trees},
                {"max_depth", c.max_depth},
                {"min_samples_split", c.min_samples_split},
                {"features_per_split", c.features_per_split},
                {"bootstrap", c.bootstrap},
                {"seed", c.seed}}},
              {"codebook", codebook_to_json(model.codebook)},
              {"feature_dim", model.forest.feature_dim},
              {"trees", std::move(trees)}};
  return doc.dump() + "\n";
}

TrainedModel parse_model(std::string_view text) {
  const json doc = parse_document(text);
  try {
    TrainedModel model;
    const json& c = doc.at("config");
    model.config.n_trees = c.at("n_trees").get<std::size_t>();
    model.config.max_depth = c.at("max_depth").get<std::size_t>();
    model.config.min_samples_split = c.at("min_samples_split").get<std::size_t>();
    model.config.features_per_split = c.at("features_per_split").get<std::size_t>();
    model.config.bootstrap = c.at("bootstrap").get<bool>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.codebook = codebook_from_json(doc.at("codebook"), true);
    model.forest.feature_dim = doc.at("feature_dim").get<std::size_t>();
    if (model.codebook.k > 0 && model.forest.feature_dim != feature_dim(model.codebook.k)) {
      parse_error("feature_dim does not match codebook size");
    }
    const json& trees = doc.at("trees");
    if (!trees.is_array() || trees.empty()) parse_error("trees must be a non-empty array");
    for (const json& t : trees) {
      DecisionTree tree;
      node_from_json(t, tree, model.forest.feature_dim, 0);
      if (tree.depth() > model.config.max_depth) parse_error("tree deeper than max_depth");
      model.forest.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    parse_error(e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_text(path, serialize_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return parse_model(read_text(path)); }

std::string serialize_codebook(const Codebook& codebook) {
  json doc = {{"format_version", kModelFormatVersion}, {"codebook", codebook_to_json(codebook)}};
  return doc.dump() + "\n";
}

Codebook parse_codebook(std::string_view text) {
  const json doc = parse_document(text);
  try {
    return codebook_from_json(doc.at("codebook"));
  } catch (const json::exception& e) {
    parse_error(e.what());
  }
}

void save_codebook(const Codebook& codebook, const std::filesystem::path& path) {
  write_text(path, serialize_codebook(codebook));
}

Codebook load_codebook(const std::filesystem::path& path) { return parse_codebook(read_text(path)); }

}  // namespace entroscan
