#include <algorithm>
#include <cmath>
#include <limits>

#include "driverid/error.hpp"
#include "driverid/eval.hpp"
#include "driverid/seed.hpp"

namespace driverid {

std::vector<FeatureConfig> table_feature_subsets() {
  using F = FeatureFamily;
  return {
      FeatureConfig::only({F::histogram}),
      FeatureConfig::only({F::mean, F::variance, F::difference, F::correlation}),
      FeatureConfig::only({F::histogram, F::mean, F::variance, F::difference, F::correlation}),
      FeatureConfig::only({F::histogram, F::mean}),
      FeatureConfig::only({F::histogram, F::variance}),
      FeatureConfig::only({F::histogram, F::mean, F::variance}),
      FeatureConfig::only({F::histogram, F::mean, F::variance, F::difference}),
      FeatureConfig::only({F::histogram, F::correlation}),
      FeatureConfig::only({F::histogram, F::mean, F::correlation}),
      FeatureConfig::only({F::mean}),
      FeatureConfig::only({F::variance}),
      FeatureConfig::only({F::difference}),
      FeatureConfig::only({F::correlation}),
      FeatureConfig::only({F::mean, F::variance}),
      FeatureConfig::only({F::mean, F::difference}),
      FeatureConfig::only({F::mean, F::correlation}),
      FeatureConfig::only({F::mean, F::variance, F::difference}),
      FeatureConfig::only({F::mean, F::variance, F::correlation}),
  };
}

void GridSpec::validate() const {
  if (window_minutes_list.empty() || overlap_list.empty() || feature_subsets.empty() ||
      models.empty()) {
    throw ConfigError("grid lists must be nonempty");
  }
  if (repetitions == 0) throw ConfigError("grid repetitions must be >= 1");
  for (double w : window_minutes_list) {
    if (!(w > 0.0)) throw ConfigError("grid window lengths must be positive");
  }
  for (double o : overlap_list) {
    if (!(o >= 0.0 && o < 1.0)) throw ConfigError("grid overlaps must be in [0, 1)");
  }
  for (const auto& f : feature_subsets) f.validate();
}

std::size_t GridSpec::cell_count() const {
  return window_minutes_list.size() * overlap_list.size() * feature_subsets.size() * models.size();
}

void sort_grid_rows(std::vector<GridRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
    if (a.ok() != b.ok()) return a.ok();
    if (a.ok() && a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
    return a.cell_index < b.cell_index;
  });
}

namespace {

void summarize(GridRow& row) {
  const auto n = static_cast<double>(row.accuracies.size());
  const double ref = row.accuracies.front();
  double dev = 0.0;
  for (double a : row.accuracies) dev += a - ref;
  row.mean_accuracy = ref + dev / n;
  double ss = 0.0;
  for (double a : row.accuracies) ss += (a - row.mean_accuracy) * (a - row.mean_accuracy);
  row.std = row.accuracies.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

void fail(GridRow& row, const std::string& reason) {
  row.note = reason.empty() ? "failed" : reason;
  row.mean_accuracy = std::numeric_limits<double>::quiet_NaN();
  row.std = std::numeric_limits<double>::quiet_NaN();
  row.accuracies.clear();
}

}  // namespace

GridResult run_grid(std::span<const CleanTrip> trips, const GridSpec& grid,
                    const PipelineConfig& base, const GridProgress& progress) {
  grid.validate();
  GridResult result;
  result.total_cells = grid.cell_count();

  std::size_t cell = 0;
  bool stop = false;
  for (double window : grid.window_minutes_list) {
    for (double overlap : grid.overlap_list) {
      for (const auto& features : grid.feature_subsets) {
        SegmentationConfig seg = base.segmentation;
        seg.window_minutes = window;
        seg.overlap_fraction = overlap;

        FeatureSet fs;
        LabeledDataset train, test;
        std::string featurize_error;
        try {
          fs = featurize(trips, seg, features);
          // A train side that is long enough overall can still be too
          // fragmented by removed stops and gaps to hold a single window.
          for (const auto& c : fs.counts) {
            if (c.train == 0) throw DataError("no train windows for driver '" + c.driver_id + "'");
          }
          train = LabeledDataset::from_vectors(fs.train);
          test = LabeledDataset::from_vectors(fs.test, train.class_list);
          if (train.class_list.size() < 2) throw DataError("grid needs at least two drivers");
        } catch (const std::exception& e) {
          featurize_error = e.what();
          if (featurize_error.empty()) featurize_error = "featurization failed";
        }

        for (const auto& model : grid.models) {
          GridRow row;
          row.cell_index = cell;
          row.window_minutes = window;
          row.overlap = overlap;
          row.features = features.name();
          row.model = model.name();
          if (!featurize_error.empty()) {
            fail(row, featurize_error);
          } else {
            try {
              for (std::size_t rep = 0; rep < grid.repetitions; ++rep) {
                const std::uint64_t seed = derive_seed(
                    base.seed, "grid/" + std::to_string(cell) + "/" + std::to_string(rep));
                const TrainedModel m = train_model(train, seeded_model(model, seed));
                row.accuracies.push_back(evaluate(m, test).accuracy);
                row.seeds.push_back(seed);
              }
              summarize(row);
            } catch (const std::exception& e) {
              fail(row, e.what());
            }
          }
          result.rows.push_back(std::move(row));
          ++cell;
          if (progress && !progress(result.rows.back(), cell, result.total_cells)) {
            stop = true;
            break;
          }
        }
        if (stop) break;
      }
      if (stop) break;
    }
    if (stop) break;
  }
  result.complete = result.rows.size() == result.total_cells;
  sort_grid_rows(result.rows);
  return result;
}

}  // namespace driverid
