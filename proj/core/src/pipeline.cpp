#include "driverid/pipeline.hpp"

#include <algorithm>
#include <map>

#include "driverid/error.hpp"
#include "driverid/seed.hpp"
#include "json.hpp"

namespace driverid {

void PipelineConfig::validate() const {
  cleaning.validate();
  segmentation.validate();
  features.validate();
  switch (model.kind) {
    case ModelKind::knn:
      if (model.knn_k == 0) throw ConfigError("knn k must be >= 1");
      break;
    case ModelKind::dtree:
      if (model.tree.min_leaf == 0) throw ConfigError("min_leaf must be >= 1");
      break;
    case ModelKind::rforest:
      if (model.forest.n_trees == 0) throw ConfigError("n_trees must be >= 1");
      if (model.forest.min_leaf == 0) throw ConfigError("min_leaf must be >= 1");
      break;
    case ModelKind::mlp:
      model.mlp.validate();
      break;
  }
}

std::vector<FeatureVector> featurize_windows(std::span<const Window> windows,
                                             const FeatureConfig& cfg,
                                             std::shared_ptr<const FeatureSchema> schema) {
  std::vector<FeatureVector> out;
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    out.push_back(extract(windows[i], i > 0 ? &windows[i - 1] : nullptr, cfg, schema));
  }
  return out;
}

FeatureSet featurize(std::span<const CleanTrip> trips, const SegmentationConfig& seg,
                     const FeatureConfig& features) {
  seg.validate();
  features.validate();
  FeatureSet fs;
  fs.schema = std::make_shared<const FeatureSchema>(make_schema(features));
  std::map<std::string, WindowCounts> counts;

  for (const auto& trip : trips) {
    const std::size_t w = seg.window_samples(trip.nominal_rate_hz);
    const auto split = split_train_test(trip, seg.train_fraction, w);
    const auto train_windows = cut_windows(split.train, seg, trip.nominal_rate_hz);
    const auto test_windows = cut_windows(split.test, seg, trip.nominal_rate_hz);
    auto tr = featurize_windows(train_windows, features, fs.schema);
    auto te = featurize_windows(test_windows, features, fs.schema);
    auto& c = counts[trip.driver_id];
    c.driver_id = trip.driver_id;
    c.train += tr.size();
    c.test += te.size();
    std::move(tr.begin(), tr.end(), std::back_inserter(fs.train));
    std::move(te.begin(), te.end(), std::back_inserter(fs.test));
  }
  for (auto& [id, c] : counts) fs.counts.push_back(c);
  return fs;
}

std::vector<CleanTrip> clean_all(std::span<const Trip> trips, const CleaningConfig& cfg) {
  std::vector<CleanTrip> out;
  out.reserve(trips.size());
  for (const auto& t : trips) out.push_back(clean(t, cfg));
  return out;
}

ModelSpec seeded_model(const ModelSpec& spec, std::uint64_t master) {
  ModelSpec out = spec;
  out.forest.seed = derive_seed(master, "forest");
  out.mlp.seed = derive_seed(master, "mlp");
  return out;
}

TrainedModel fit(const FeatureSet& features, const ModelSpec& spec) {
  const auto train = LabeledDataset::from_vectors(features.train);
  return train_model(train, spec);
}

std::string config_snapshot_json(const PipelineConfig& cfg) {
  using json = nlohmann::ordered_json;
  json j;
  j["seed"] = cfg.seed;
  j["cleaning"] = {
      {"denoise_window", cfg.cleaning.denoise_window},
      {"stop_threshold", cfg.cleaning.stop_threshold},
      {"min_stop_seconds", cfg.cleaning.min_stop_seconds},
      {"max_gap_fill", cfg.cleaning.max_gap_fill},
      {"reorient", cfg.cleaning.reorient},
      {"stop_aggregation",
       cfg.cleaning.aggregation == StopAggregation::magnitude ? "magnitude" : "sum"}};
  j["segmentation"] = {{"window_minutes", cfg.segmentation.window_minutes},
                       {"overlap_fraction", cfg.segmentation.overlap_fraction},
                       {"train_fraction", cfg.segmentation.train_fraction}};
  j["features"] = {
      {"families", cfg.features.name()},
      {"histogram_bins", cfg.features.histogram_bins},
      {"trim_keep_fraction", cfg.features.trim_keep_fraction},
      {"difference_mode", cfg.features.difference_mode == DifferenceMode::mean_delta
                              ? "mean_delta"
                              : "sum_minus_mean"},
      {"dimension", cfg.features.dimension()}};
  const auto& m = cfg.model;
  j["model"] = {
      {"kind", m.name()},
      {"knn_k", m.knn_k},
      {"tree", {{"max_depth", m.tree.max_depth}, {"min_leaf", m.tree.min_leaf}}},
      {"forest",
       {{"n_trees", m.forest.n_trees},
        {"max_depth", m.forest.max_depth},
        {"min_leaf", m.forest.min_leaf},
        {"features_per_split", m.forest.features_per_split},
        {"bootstrap", m.forest.bootstrap}}},
      {"mlp",
       {{"hidden_layers", m.mlp.hidden_layers},
        {"activation", std::string(activation_name(m.mlp.activation))},
        {"optimizer", std::string(optimizer_name(m.mlp.optimizer))},
        {"learning_rate", m.mlp.learning_rate},
        {"batch_size", m.mlp.batch_size},
        {"max_epochs", m.mlp.max_epochs},
        {"early_stop_patience", m.mlp.early_stop_patience},
        {"validation_fraction", m.mlp.validation_fraction}}}};
  return j.dump(2);
}

}  // namespace driverid
