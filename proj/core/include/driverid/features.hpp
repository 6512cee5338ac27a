#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driverid/segment.hpp"

namespace driverid {

/// Fixed family order of the feature vector.
enum class FeatureFamily { histogram, mean, variance, difference, correlation };

std::string_view family_name(FeatureFamily f);
std::optional<FeatureFamily> parse_family(std::string_view name);

/// How the inter-window difference is computed.
///  - mean_delta:     mean(current) - mean(previous)
///  - sum_minus_mean: sum(current) - mean(previous)  (literal reading)
enum class DifferenceMode { mean_delta, sum_minus_mean };

inline constexpr std::size_t kPairCount = kChannelCount * (kChannelCount - 1) / 2;

struct FeatureConfig {
  bool use_histogram = true;
  bool use_mean = true;
  bool use_variance = true;
  bool use_difference = true;
  bool use_correlation = true;
  int histogram_bins = 100;
  double trim_keep_fraction = 0.95;
  DifferenceMode difference_mode = DifferenceMode::mean_delta;

  void validate() const;
  bool uses(FeatureFamily f) const;
  void set(FeatureFamily f, bool on);
  std::size_t dimension() const;

  /// Only the given families enabled, other fields default.
  static FeatureConfig only(std::initializer_list<FeatureFamily> families);
  /// Table-style name, e.g. "Histogram, Mean, and Variance".
  std::string name() const;
};

/// Parses a family list: either a table-style name ("Histogram and Mean"),
/// or tokens joined by ',', '+' or whitespace ("histogram+mean"), or "all".
FeatureConfig parse_feature_subset(std::string_view text);

struct FeatureDescriptor {
  FeatureFamily family = FeatureFamily::mean;
  std::string signal;     ///< "ax" or a pair "ax:ay"
  std::size_t index = 0;  ///< histogram bin, else 0

  std::string label() const;  ///< e.g. "hist:ax:17", "corr:ax:gz"
  bool operator==(const FeatureDescriptor&) const = default;
};

using FeatureSchema = std::vector<FeatureDescriptor>;

FeatureSchema make_schema(const FeatureConfig& cfg);
std::optional<FeatureDescriptor> parse_descriptor(std::string_view label);

struct FeatureVector {
  std::vector<double> values;
  std::shared_ptr<const FeatureSchema> schema;
  std::string driver_id;
  Partition partition = Partition::train;
  double start_t = 0.0;
  double end_t = 0.0;
};

/// Empirical quantile of sorted data, linear interpolation between order
/// statistics at position p * (n - 1).
double linear_quantile(std::span<const double> sorted, double p);

/// Normalized histogram of the samples inside the central `keep` quantile
/// range, `bins` equal-width bins; a sample x in range falls in the largest
/// bin k with lo + k * (hi - lo) / bins <= x. A constant signal puts all
/// mass in bin 0. Throws DataError when fewer than 2 samples.
std::vector<double> trimmed_histogram(std::span<const double> signal, int bins, double keep);

double channel_mean(std::span<const double> x);
/// Population variance (divides by N).
double channel_variance(std::span<const double> x);
/// Pearson correlation; 0 when either side is constant; clamped to [-1, 1].
double pearson(std::span<const double> a, std::span<const double> b);

std::array<double, kChannelCount> window_mean(const Window& w);
std::array<double, kChannelCount> window_variance(const Window& w);
/// Zero vector when `previous` is null.
std::array<double, kChannelCount> window_difference(
    const Window& current, const Window* previous,
    DifferenceMode mode = DifferenceMode::mean_delta);
/// The 15 unordered channel pairs in lexicographic order.
std::array<double, kPairCount> pairwise_correlation(const Window& w);

FeatureVector extract(const Window& window, const Window* previous, const FeatureConfig& cfg,
                      std::shared_ptr<const FeatureSchema> schema = nullptr);

/// Per-dimension z-score fitted on training vectors only.
class Standardizer {
 public:
  static constexpr double kStdFloor = 1e-8;

  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> stddev, std::size_t fitted_rows = 0);

  /// Throws DataError with fewer than 2 vectors or when any vector is tagged
  /// test; SchemaMismatch on inconsistent lengths.
  static Standardizer fit(std::span<const FeatureVector> train);
  static Standardizer fit_rows(std::span<const std::vector<double>> rows);

  std::vector<double> apply(std::span<const double> x) const;
  void apply_in_place(std::span<double> x) const;

  std::size_t dimension() const { return mean_.size(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }
  std::size_t fitted_rows() const { return fitted_rows_; }

  bool operator==(const Standardizer&) const = default;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
  std::size_t fitted_rows_ = 0;
};

/// Feature matrix CSV: header `driver_id,partition,start_t,end_t,<labels...>`.
void write_feature_csv(std::ostream& sink, std::span<const FeatureVector> vectors);
/// JSON sidecar describing the schema.
void write_schema_json(std::ostream& sink, const FeatureSchema& schema, const FeatureConfig& cfg);

}  // namespace driverid
