#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driverid/dataset.hpp"
#include "driverid/models.hpp"
#include "driverid/pipeline.hpp"

namespace driverid {

struct EvaluationReport {
  std::vector<std::string> class_list;
  double accuracy = 0.0;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  /// Absent for classes with no test rows.
  std::vector<std::optional<double>> per_class_recall;
  std::size_t n_test_windows = 0;
  std::string config_snapshot;  ///< JSON text, may be empty
};

/// Counting core: labels index `class_list`. Throws DataError when empty.
EvaluationReport score_predictions(std::vector<std::string> class_list,
                                   std::span<const std::size_t> truth,
                                   std::span<const std::size_t> predicted);

/// Scores `model` on `test`. Labels are mapped into the model's class list;
/// throws SchemaMismatch on a different schema and DataError on an empty
/// test set or a label the model never saw.
EvaluationReport evaluate(const TrainedModel& model, const LabeledDataset& test);

/// Confusion matrix with a recall column.
void write_evaluation_csv(std::ostream& sink, const EvaluationReport& report);
void write_evaluation_json(std::ostream& sink, const EvaluationReport& report);

// ---------------------------------------------------------------------------
// Grid sweep

/// The 18 feature subsets swept by `grid --features table`.
std::vector<FeatureConfig> table_feature_subsets();

struct GridSpec {
  std::vector<double> window_minutes_list{5, 10, 15, 30};
  std::vector<double> overlap_list{0.0, 0.25, 0.5, 0.75};
  std::vector<FeatureConfig> feature_subsets{FeatureConfig{}};
  std::vector<ModelSpec> models{ModelSpec{}};
  std::size_t repetitions = 5;

  void validate() const;
  std::size_t cell_count() const;
};

struct GridRow {
  std::size_t cell_index = 0;
  double window_minutes = 0.0;
  double overlap = 0.0;
  std::string features;
  std::string model;
  double mean_accuracy = 0.0;  ///< NaN when the cell failed
  double std = 0.0;            ///< sample std over repetitions (0 for one)
  std::vector<double> accuracies;
  std::vector<std::uint64_t> seeds;
  std::string note;            ///< failure reason, empty on success

  bool ok() const { return note.empty(); }
};

struct GridResult {
  std::vector<GridRow> rows;  ///< sorted by mean accuracy, failures last
  std::size_t total_cells = 0;
  bool complete = true;
};

/// Invoked after each finished cell; return false to stop the sweep.
using GridProgress = std::function<bool(const GridRow& row, std::size_t done, std::size_t total)>;

/// Every cell: segment -> featurize -> standardize -> train -> evaluate,
/// `repetitions` times with seeds derived from `base.seed`. Cell failures are
/// recorded in the row and never abort the sweep.
GridResult run_grid(std::span<const CleanTrip> trips, const GridSpec& grid,
                    const PipelineConfig& base, const GridProgress& progress = {});

/// Descending mean accuracy; failed rows last; ties keep cell order.
void sort_grid_rows(std::vector<GridRow>& rows);

struct RenderedReport {
  std::string text;
  std::string csv;
  std::string json;
};

/// CSV columns: window_minutes,overlap,features,model,mean_accuracy,std,note
RenderedReport render_report(std::span<const GridRow> rows, bool complete = true);

}  // namespace driverid
