#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cli/cli.hpp"

namespace driverid::cli {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

  /// Fails on keys that were never looked up.
  void check_unknown(const std::set<std::string>& known) const {
    for (const auto& [key, child] : tree_) {
      if (!known.count(key)) {
        throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

  std::optional<std::string> raw(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  void read(const std::string& key, double& out) const {
    if (auto v = raw(key)) {
      double d = 0.0;
      auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), d);
      if (ec != std::errc{} || ptr != v->data() + v->size() || !std::isfinite(d)) bad(key, *v);
      out = d;
    }
  }

  template <typename Int>
  void read_int(const std::string& key, Int& out) const {
    if (auto v = raw(key)) {
      long long i = 0;
      auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), i);
      if (ec != std::errc{} || ptr != v->data() + v->size() || i < 0) bad(key, *v);
      out = static_cast<Int>(i);
    }
  }

  void read(const std::string& key, bool& out) const {
    if (auto v = raw(key)) {
      if (*v == "true" || *v == "yes" || *v == "1") {
        out = true;
      } else if (*v == "false" || *v == "no" || *v == "0") {
        out = false;
      } else {
        bad(key, *v);
      }
    }
  }

  [[noreturn]] void bad(const std::string& key, const std::string& value) const {
    throw ConfigError("bad value '" + value + "' for " + name_ + "." + key);
  }

 private:
  std::string name_;
  const pt::ptree& tree_;
};

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(text, ',')) {
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), d);
    if (ec != std::errc{} || ptr != item.data() + item.size()) {
      throw ConfigError("bad number '" + item + "' in " + what);
    }
    out.push_back(d);
  }
  return out;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"seed", "out"}},
      {"cleaning",
       {"denoise_window", "stop_threshold", "min_stop_seconds", "max_gap_fill", "reorient",
        "stop_aggregation"}},
      {"segmentation", {"window_minutes", "overlap_fraction", "train_fraction"}},
      {"features", {"families", "histogram_bins", "trim_keep_fraction", "difference_mode"}},
      {"model",
       {"kind", "knn_k", "tree_max_depth", "tree_min_leaf", "forest_trees", "forest_max_depth",
        "forest_min_leaf", "forest_features_per_split", "forest_bootstrap", "mlp_hidden",
        "mlp_activation", "mlp_optimizer", "mlp_learning_rate", "mlp_batch_size",
        "mlp_max_epochs", "mlp_patience", "mlp_validation_fraction"}},
      {"grid", {"window_minutes", "overlaps", "features", "models", "repetitions"}},
  };
  return keys;
}

}  // namespace

std::vector<FeatureConfig> parse_feature_list(const std::string& text) {
  const auto t = trim(text);
  if (t == "table") return table_feature_subsets();
  std::vector<FeatureConfig> out;
  for (const auto& item : split_list(t, ';')) out.push_back(parse_feature_subset(item));
  if (out.empty()) throw ConfigError("empty feature subset list");
  return out;
}

std::vector<ModelSpec> parse_model_list(const std::string& text, const ModelSpec& base) {
  std::vector<ModelSpec> out;
  for (const auto& item : split_list(text, ',')) {
    const auto kind = parse_model_kind(item);
    if (!kind) throw ConfigError("unknown model kind '" + item + "'");
    ModelSpec spec = base;
    spec.kind = *kind;
    out.push_back(spec);
  }
  if (out.empty()) throw ConfigError("empty model list");
  return out;
}

RunConfig parse_run_config(std::istream& source) {
  pt::ptree tree;
  try {
    pt::read_ini(source, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  RunConfig rc;
  auto& p = rc.pipeline;
  for (const auto& [name, section] : tree) {
    if (!schema().count(name)) throw ConfigError("unknown section [" + name + "]");
    if (section.empty() && !section.data().empty()) {
      throw ConfigError("key '" + name + "' must be inside a section");
    }
  }
  auto section = [&](const std::string& name) {
    static const pt::ptree empty;
    const auto it = tree.find(name);
    Section s(name, it == tree.not_found() ? empty : it->second);
    s.check_unknown(schema().at(name));
    return s;
  };

  {
    const auto s = section("run");
    s.read_int("seed", p.seed);
    if (auto v = s.raw("out")) rc.out_dir = *v;
  }
  {
    const auto s = section("cleaning");
    s.read_int("denoise_window", p.cleaning.denoise_window);
    s.read("stop_threshold", p.cleaning.stop_threshold);
    s.read("min_stop_seconds", p.cleaning.min_stop_seconds);
    s.read("max_gap_fill", p.cleaning.max_gap_fill);
    s.read("reorient", p.cleaning.reorient);
    if (auto v = s.raw("stop_aggregation")) {
      if (*v == "magnitude") {
        p.cleaning.aggregation = StopAggregation::magnitude;
      } else if (*v == "sum") {
        p.cleaning.aggregation = StopAggregation::sum;
      } else {
        s.bad("stop_aggregation", *v);
      }
    }
  }
  {
    const auto s = section("segmentation");
    s.read("window_minutes", p.segmentation.window_minutes);
    s.read("overlap_fraction", p.segmentation.overlap_fraction);
    s.read("train_fraction", p.segmentation.train_fraction);
  }
  {
    const auto s = section("features");
    if (auto v = s.raw("families")) {
      const FeatureConfig families = parse_feature_subset(*v);
      for (auto f : {FeatureFamily::histogram, FeatureFamily::mean, FeatureFamily::variance,
                     FeatureFamily::difference, FeatureFamily::correlation}) {
        p.features.set(f, families.uses(f));
      }
    }
    s.read_int("histogram_bins", p.features.histogram_bins);
    s.read("trim_keep_fraction", p.features.trim_keep_fraction);
    if (auto v = s.raw("difference_mode")) {
      if (*v == "mean_delta") {
        p.features.difference_mode = DifferenceMode::mean_delta;
      } else if (*v == "sum_minus_mean") {
        p.features.difference_mode = DifferenceMode::sum_minus_mean;
      } else {
        s.bad("difference_mode", *v);
      }
    }
  }
  {
    const auto s = section("model");
    auto& m = p.model;
    if (auto v = s.raw("kind")) {
      const auto kind = parse_model_kind(*v);
      if (!kind) s.bad("kind", *v);
      m.kind = *kind;
    }
    s.read_int("knn_k", m.knn_k);
    s.read_int("tree_max_depth", m.tree.max_depth);
    s.read_int("tree_min_leaf", m.tree.min_leaf);
    s.read_int("forest_trees", m.forest.n_trees);
    s.read_int("forest_max_depth", m.forest.max_depth);
    s.read_int("forest_min_leaf", m.forest.min_leaf);
    s.read_int("forest_features_per_split", m.forest.features_per_split);
    s.read("forest_bootstrap", m.forest.bootstrap);
    if (auto v = s.raw("mlp_hidden")) {
      m.mlp.hidden_layers.clear();
      for (double h : parse_numbers(*v, "model.mlp_hidden")) {
        if (!(h >= 1.0) || h != std::floor(h)) s.bad("mlp_hidden", *v);
        m.mlp.hidden_layers.push_back(static_cast<std::size_t>(h));
      }
    }
    if (auto v = s.raw("mlp_activation")) {
      const auto a = parse_activation(*v);
      if (!a) s.bad("mlp_activation", *v);
      m.mlp.activation = *a;
    }
    if (auto v = s.raw("mlp_optimizer")) {
      const auto o = parse_optimizer(*v);
      if (!o) s.bad("mlp_optimizer", *v);
      m.mlp.optimizer = *o;
    }
    s.read("mlp_learning_rate", m.mlp.learning_rate);
    s.read_int("mlp_batch_size", m.mlp.batch_size);
    s.read_int("mlp_max_epochs", m.mlp.max_epochs);
    s.read_int("mlp_patience", m.mlp.early_stop_patience);
    s.read("mlp_validation_fraction", m.mlp.validation_fraction);
  }
  if (tree.find("grid") != tree.not_found()) {
    const auto s = section("grid");
    GridSpec g;
    g.feature_subsets = {p.features};
    g.models = {p.model};
    if (auto v = s.raw("window_minutes")) g.window_minutes_list = parse_numbers(*v, "grid.window_minutes");
    if (auto v = s.raw("overlaps")) g.overlap_list = parse_numbers(*v, "grid.overlaps");
    if (auto v = s.raw("features")) g.feature_subsets = parse_feature_list(*v);
    if (auto v = s.raw("models")) g.models = parse_model_list(*v, p.model);
    s.read_int("repetitions", g.repetitions);
    g.validate();
    rc.grid = g;
  }
  p.validate();
  return rc;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_run_config(in);
}

}  // namespace driverid::cli
