#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "driverid/ingest.hpp"
#include "driverid/preprocess.hpp"

namespace driverid {

enum class Partition { train, test };

std::string_view partition_name(Partition p);

struct SegmentationConfig {
  double window_minutes = 15.0;
  double overlap_fraction = 0.75;  ///< in [0, 1)
  double train_fraction = 0.7;     ///< in (0, 1)

  void validate() const;
  /// round(window_minutes * 60 * rate_hz); throws ConfigError when < 2.
  std::size_t window_samples(double rate_hz) const;
  /// max(1, round(w * (1 - overlap_fraction))).
  std::size_t stride_samples(double rate_hz) const;
};

/// A contiguous index range [begin, end) of a CleanTrip's samples.
struct SampleSpan {
  const CleanTrip* trip = nullptr;
  std::size_t begin = 0;
  std::size_t end = 0;
  Partition partition = Partition::train;

  std::size_t size() const { return end - begin; }
};

struct TrainTestSplit {
  SampleSpan train;
  SampleSpan test;
};

/// Chronological split: the first floor(train_fraction * N) samples train,
/// the rest test. Throws DataError("insufficient data for split: <driver>")
/// when either side has fewer than `min_span_samples` samples.
TrainTestSplit split_train_test(const CleanTrip& trip, double train_fraction,
                                std::size_t min_span_samples = 1);

/// A fixed-length slice of the six channels.
struct Window {
  std::string driver_id;
  double start_t = 0.0;
  double end_t = 0.0;  ///< exclusive
  std::array<std::vector<double>, kChannelCount> channels;
  Partition partition = Partition::train;

  std::size_t size() const { return channels[0].size(); }
};

/// Cuts windows of w samples every s samples inside each contiguous run of
/// the span; trailing partial windows are dropped.
std::vector<Window> cut_windows(const SampleSpan& span, const SegmentationConfig& cfg,
                                double rate_hz);

/// max(0, floor((n - w) / s) + 1) for a gap-free run of n samples.
std::size_t expected_window_count(std::size_t n, std::size_t w, std::size_t s);

}  // namespace driverid
