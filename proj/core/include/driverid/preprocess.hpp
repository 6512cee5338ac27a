#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "driverid/ingest.hpp"

namespace driverid {

inline constexpr double kGravity = 9.81;

/// How the three accelerometer axes are collapsed into the stop-detection series.
enum class StopAggregation { magnitude, sum };

struct CleaningConfig {
  int denoise_window = 5;          ///< odd, samples
  double stop_threshold = 0.5;     ///< m/s^2, max-minus-min over a stop run
  double min_stop_seconds = 6.0;
  double max_gap_fill = 2.0;       ///< seconds; longer missing runs are dropped
  bool reorient = true;
  StopAggregation aggregation = StopAggregation::magnitude;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Half-open time span [start_t, end_t) that was detected as stationary.
struct StopInterval {
  double start_t = 0.0;
  double end_t = 0.0;

  double duration() const { return end_t - start_t; }
  bool operator==(const StopInterval&) const = default;
};

/// Analysis-ready trip. Timestamps are the original ones; `run_starts` lists
/// the sample indices that begin a new contiguous run because samples were
/// removed (or were absent) right before them.
struct CleanTrip {
  std::string driver_id;
  double nominal_rate_hz = kDefaultRateHz;
  std::vector<SensorSample> samples;
  double input_seconds = 0.0;
  double removed_stop_seconds = 0.0;
  double removed_gap_seconds = 0.0;
  std::vector<StopInterval> stops;
  std::vector<std::size_t> run_starts;
  std::vector<std::string> provenance;

  double period() const { return 1.0 / nominal_rate_hz; }
  /// Movement time represented by the kept samples (count x period).
  double clean_seconds() const;
  /// Converts back to a plain Trip (drops the bookkeeping).
  Trip as_trip() const;
};

/// Centered moving average per channel. Near the edges the window is
/// truncated to the samples that exist. Missing values are skipped and stay
/// missing. Throws ConfigError if `window` is even, < 1 or longer than the trip.
Trip denoise(const Trip& trip, int window);

/// Row-major 3x3 rotation.
using Rotation3 = std::array<std::array<double, 3>, 3>;

/// Rotation that maps `mean_accel` onto +z. Identity when already aligned;
/// 180 degrees about x when anti-parallel. Throws DataError when the vector
/// is shorter than 1 m/s^2 ("cannot estimate gravity").
Rotation3 gravity_alignment(const std::array<double, 3>& mean_accel);

/// Simplified gravity alignment: one rotation estimated from the trip-mean
/// accelerometer vector, applied to both sensor triads of every sample.
Trip reorient(const Trip& trip);

/// Linearly interpolates missing runs no longer than `max_gap_fill` seconds;
/// drops samples covered by longer runs and by leading/trailing runs.
/// Throws DataError("no valid data") when no sample is complete.
Trip fill_gaps(const Trip& trip, double max_gap_fill);

/// The per-sample series used for stop detection.
std::vector<double> stop_signal(const Trip& trip,
                                StopAggregation aggregation = StopAggregation::magnitude);

/// Maximal runs of consecutive samples whose series range stays within
/// `threshold` for at least `min_stop_seconds`. Runs never bridge a time gap
/// larger than 1.5 sample periods.
std::vector<StopInterval> detect_stops(std::span<const double> series,
                                       std::span<const double> times, double rate_hz,
                                       double threshold, double min_stop_seconds);

std::vector<StopInterval> detect_stops(
    const Trip& trip, double threshold, double min_stop_seconds,
    StopAggregation aggregation = StopAggregation::magnitude);

/// Removes every sample inside a stop interval. Throws DataError on
/// overlapping intervals and on "no movement data".
CleanTrip remove_stops(const Trip& trip, std::span<const StopInterval> stops);

/// denoise -> reorient -> fill_gaps -> detect/remove stops.
CleanTrip clean(const Trip& trip, const CleaningConfig& cfg);

/// Provenance/removed-interval sidecar written next to an exported clean log.
void write_clean_sidecar(std::ostream& sink, const CleanTrip& trip);

/// Indices (into `samples`) where consecutive samples are more than 1.5
/// nominal periods apart.
std::vector<std::size_t> time_breaks(std::span<const SensorSample> samples, double rate_hz);

}  // namespace driverid
