#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "driverid/features.hpp"
#include "driverid/models.hpp"
#include "driverid/preprocess.hpp"
#include "driverid/segment.hpp"

namespace driverid {

struct PipelineConfig {
  CleaningConfig cleaning;
  SegmentationConfig segmentation;
  FeatureConfig features;
  ModelSpec model;
  std::uint64_t seed = 1;

  void validate() const;
};

struct WindowCounts {
  std::string driver_id;
  std::size_t train = 0;
  std::size_t test = 0;
};

struct FeatureSet {
  std::shared_ptr<const FeatureSchema> schema;
  std::vector<FeatureVector> train;
  std::vector<FeatureVector> test;
  std::vector<WindowCounts> counts;  ///< per driver, sorted by driver id
};

/// Extracts features for one partition's window sequence; each window's
/// difference feature uses the window before it in the sequence.
std::vector<FeatureVector> featurize_windows(std::span<const Window> windows,
                                             const FeatureConfig& cfg,
                                             std::shared_ptr<const FeatureSchema> schema);

/// Per trip: chronological split, windowing, feature extraction. Throws
/// DataError naming the trip when either side of a split holds fewer samples
/// than one window. A fragmented side may still yield no windows.
FeatureSet featurize(std::span<const CleanTrip> trips, const SegmentationConfig& seg,
                     const FeatureConfig& features);

std::vector<CleanTrip> clean_all(std::span<const Trip> trips, const CleaningConfig& cfg);

/// Copy of `spec` with the forest/MLP seeds derived from `master`.
ModelSpec seeded_model(const ModelSpec& spec, std::uint64_t master);

/// Train on the train partition of `features` (standardizer included).
TrainedModel fit(const FeatureSet& features, const ModelSpec& spec);

/// Full configuration as pretty-printed JSON.
std::string config_snapshot_json(const PipelineConfig& cfg);

}  // namespace driverid
