#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace driverid {

inline constexpr std::size_t kChannelCount = 6;

/// Channel order used everywhere: three accelerometer axes, then three gyro axes.
enum class Channel : std::size_t { ax = 0, ay, az, gx, gy, gz };

inline constexpr std::array<std::string_view, kChannelCount> kChannelNames{
    "ax", "ay", "az", "gx", "gy", "gz"};

inline constexpr double kDefaultRateHz = 2.0;

/// One timestamped 6-channel reading. Missing channels are stored in-band as
/// quiet NaN; every other value is finite.
struct SensorSample {
  double t = 0.0;                                ///< seconds since trip start
  std::array<double, kChannelCount> values{};   ///< m/s^2 (ax..az), rad/s (gx..gz)

  static constexpr double missing_value() {
    return std::numeric_limits<double>::quiet_NaN();
  }
  bool missing(std::size_t channel) const { return std::isnan(values[channel]); }
  bool complete() const;
  bool accel_complete() const;
};

/// Equality treats two missing markers on the same channel as equal.
bool operator==(const SensorSample& lhs, const SensorSample& rhs);

/// An ordered, labeled sequence of samples for one driver.
struct Trip {
  std::string driver_id;
  std::vector<SensorSample> samples;
  double nominal_rate_hz = kDefaultRateHz;

  double period() const { return 1.0 / nominal_rate_hz; }
  bool operator==(const Trip&) const = default;
};

/// Checks the Trip invariants (nonempty label, positive rate, strictly
/// increasing timestamps). Throws DataError / ConfigError.
void check_trip(const Trip& trip);

struct ParsedLog {
  Trip trip;
  std::size_t rejected_rows = 0;      ///< rows dropped for a bad timestamp or field count
  std::vector<std::string> warnings;  ///< one message per rejected row
};

/// Parses the canonical CSV log format (header `t,ax,ay,az,gx,gy,gz`).
///
/// Unparseable channel values become missing markers; rows whose timestamp
/// cannot be parsed are rejected and counted. Throws ParseError for an empty
/// log, a malformed header or a non-monotonic timestamp (naming the line).
ParsedLog parse_log(std::istream& source, std::string driver_id,
                    double rate_hz = kDefaultRateHz);

ParsedLog read_log_file(const std::filesystem::path& path, std::string driver_id,
                        double rate_hz = kDefaultRateHz);

/// Writes the canonical log format. Values use the shortest representation
/// that parses back to the same double, so parse(write(trip)) == trip.
void write_log(std::ostream& sink, const Trip& trip);
void write_log_file(const std::filesystem::path& path, const Trip& trip);

struct ValidationReport {
  std::size_t samples = 0;
  std::size_t missing = 0;  ///< samples with at least one missing channel
  std::size_t gaps = 0;     ///< inter-sample intervals longer than 2 / rate
};

ValidationReport validate_trip(const Trip& trip);

}  // namespace driverid
