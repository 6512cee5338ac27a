#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "driverid/ingest.hpp"
#include "driverid/preprocess.hpp"

namespace driverid {

enum class Separation { easy, hard };

/// Behavioural signature of one synthetic driver.
struct DriverProfile {
  std::string driver_id;
  double accel_aggressiveness = 2.0;  ///< peak longitudinal accel of an event, m/s^2
  double brake_harshness = 2.0;       ///< peak deceleration of an event, m/s^2
  double turn_rate_scale = 0.3;       ///< peak yaw rate of a turn, rad/s
  double event_rate = 3.0;            ///< events per minute
  double noise_sigma = 0.2;           ///< per-channel sensor noise std
  double stop_frequency = 1.0;        ///< stops per hour
  std::array<double, 2> stop_duration_range{15.0, 90.0};  ///< seconds
  double gap_frequency = 0.0;         ///< missing-value bursts per hour
  std::array<double, 2> gap_duration_range{0.5, 6.0};     ///< seconds
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const DriverProfile&) const = default;
};

/// Missing-value burst: `channels[c]` is true for every channel blanked over
/// the half-open span.
struct GapInterval {
  double start_t = 0.0;
  double end_t = 0.0;
  std::array<bool, kChannelCount> channels{};

  double duration() const { return end_t - start_t; }
};

struct SyntheticTruth {
  DriverProfile profile;
  std::vector<StopInterval> stops;  ///< half-open, sorted
  std::vector<GapInterval> gaps;    ///< half-open, sorted

  /// Seconds of stops at least `min_stop_seconds` long.
  double removable_stop_seconds(double min_stop_seconds) const;
  /// Seconds of gaps longer than `max_gap_fill`.
  double removable_gap_seconds(double max_gap_fill) const;
};

struct SyntheticTrip {
  Trip trip;
  SyntheticTruth truth;
};

/// `easy`: every pair of profiles differs by at least 3 noise sigmas on at
/// least two behavioural parameters; `hard`: parameters drawn from shared
/// overlapping ranges. Throws ConfigError for n < 2 or when n is too large to
/// keep the easy spacing.
std::vector<DriverProfile> make_profiles(std::size_t n, Separation separation, std::uint64_t seed);

/// Largest n for which make_profiles(n, easy, ...) succeeds.
std::size_t max_easy_profiles();

/// True when each pair differs by >= 3 * max(noise_sigma) on >= 2 of
/// {accel_aggressiveness, brake_harshness, turn_rate_scale, event_rate}.
bool well_separated(std::span<const DriverProfile> profiles);

/// Piecewise event model: cruise baseline with road vibration, accelerate /
/// brake / turn events at `event_rate`, seeded Gaussian noise, stops with
/// near-constant channels, and missing-value bursts. Throws ConfigError when
/// duration_s < 60.
SyntheticTrip generate_trip(const DriverProfile& profile, double duration_s,
                            double rate_hz = kDefaultRateHz);

void write_truth_json(std::ostream& sink, const SyntheticTruth& truth);

}  // namespace driverid
