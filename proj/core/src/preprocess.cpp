#include "driverid/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Geometry>

#include "driverid/error.hpp"
#include "internal.hpp"
#include "json.hpp"

namespace driverid {

namespace {

// Consecutive samples further apart than this many periods are not contiguous.
constexpr double kContiguityFactor = 1.5;
constexpr double kTimeEps = 1e-9;
constexpr double kMinReorientSeconds = 10.0;

bool is_identity(const Rotation3& r) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (r[i][j] != (i == j ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

void rotate_triad(const Rotation3& r, std::array<double, kChannelCount>& v, std::size_t offset) {
  const double x = v[offset], y = v[offset + 1], z = v[offset + 2];
  if (std::isnan(x) || std::isnan(y) || std::isnan(z)) {
    v[offset] = v[offset + 1] = v[offset + 2] = SensorSample::missing_value();
    return;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    v[offset + i] = r[i][0] * x + r[i][1] * y + r[i][2] * z;
  }
}

}  // namespace

void CleaningConfig::validate() const {
  if (denoise_window < 1 || denoise_window % 2 == 0) {
    throw ConfigError("denoise_window must be an odd positive integer");
  }
  if (!(stop_threshold > 0.0)) throw ConfigError("stop_threshold must be positive");
  if (!(min_stop_seconds > 0.0)) throw ConfigError("min_stop_seconds must be positive");
  if (!(max_gap_fill > 0.0)) throw ConfigError("max_gap_fill must be positive");
}

double CleanTrip::clean_seconds() const {
  return static_cast<double>(samples.size()) * period();
}

Trip CleanTrip::as_trip() const { return Trip{driver_id, samples, nominal_rate_hz}; }

std::vector<std::size_t> time_breaks(std::span<const SensorSample> samples, double rate_hz) {
  std::vector<std::size_t> out;
  const double max_dt = kContiguityFactor / rate_hz;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].t - samples[i - 1].t > max_dt) out.push_back(i);
  }
  return out;
}

Trip denoise(const Trip& trip, int window) {
  const std::size_t n = trip.samples.size();
  if (window < 1 || window % 2 == 0) throw ConfigError("denoise window must be odd and positive");
  if (static_cast<std::size_t>(window) > n) {
    throw ConfigError("denoise window (" + std::to_string(window) + ") exceeds sample count (" +
                      std::to_string(n) + ")");
  }
  Trip out = trip;
  const std::size_t half = static_cast<std::size_t>(window / 2);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const double centre = trip.samples[i].values[c];
      if (std::isnan(centre)) continue;
      const std::size_t lo = i >= half ? i - half : 0;
      const std::size_t hi = std::min(n - 1, i + half);
      // Deviations from the centre value keep constant runs exactly fixed.
      double dev = 0.0;
      std::size_t count = 0;
      for (std::size_t j = lo; j <= hi; ++j) {
        const double v = trip.samples[j].values[c];
        if (std::isnan(v)) continue;
        dev += v - centre;
        ++count;
      }
      out.samples[i].values[c] = centre + dev / static_cast<double>(count);
    }
  }
  return out;
}

Rotation3 gravity_alignment(const std::array<double, 3>& mean_accel) {
  const Eigen::Vector3d m(mean_accel[0], mean_accel[1], mean_accel[2]);
  const double norm = m.norm();
  if (!(norm >= 1.0)) throw DataError("cannot estimate gravity");

  Rotation3 r{};
  if (m.x() == 0.0 && m.y() == 0.0 && m.z() > 0.0) {
    r[0][0] = r[1][1] = r[2][2] = 1.0;
    return r;
  }
  const Eigen::Vector3d u = m / norm;
  if (u.z() < -1.0 + 1e-12) {
    // Anti-parallel: half turn about x.
    r[0][0] = 1.0;
    r[1][1] = -1.0;
    r[2][2] = -1.0;
    return r;
  }
  const Eigen::Matrix3d rot =
      Eigen::Quaterniond::FromTwoVectors(u, Eigen::Vector3d::UnitZ()).normalized().toRotationMatrix();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r[i][j] = rot(i, j);
  }
  return r;
}

Trip reorient(const Trip& trip) {
  const double period = trip.period();
  const double max_dt = kContiguityFactor * period;

  std::array<double, 3> sum{0.0, 0.0, 0.0};
  std::size_t used = 0;
  double best_run = 0.0;
  std::size_t run = 0;
  for (std::size_t i = 0; i < trip.samples.size(); ++i) {
    const auto& s = trip.samples[i];
    if (!s.accel_complete()) {
      run = 0;
      continue;
    }
    if (run > 0 && s.t - trip.samples[i - 1].t > max_dt) run = 0;
    ++run;
    best_run = std::max(best_run, static_cast<double>(run) * period);
    for (std::size_t k = 0; k < 3; ++k) sum[k] += s.values[k];
    ++used;
  }
  if (best_run + kTimeEps < kMinReorientSeconds) {
    throw DataError("trip " + trip.driver_id +
                    ": reorientation needs 10 s of contiguous accelerometer data");
  }
  for (auto& v : sum) v /= static_cast<double>(used);

  const Rotation3 r = gravity_alignment(sum);
  if (is_identity(r)) return trip;

  Trip out = trip;
  for (auto& s : out.samples) {
    rotate_triad(r, s.values, 0);
    rotate_triad(r, s.values, 3);
  }
  return out;
}

Trip fill_gaps(const Trip& trip, double max_gap_fill) {
  const std::size_t n = trip.samples.size();
  if (std::none_of(trip.samples.begin(), trip.samples.end(),
                   [](const SensorSample& s) { return s.complete(); })) {
    throw DataError("no valid data");
  }
  const double period = trip.period();
  std::vector<bool> drop(n, false);
  std::vector<SensorSample> filled = trip.samples;

  for (std::size_t c = 0; c < kChannelCount; ++c) {
    std::size_t i = 0;
    while (i < n) {
      if (!trip.samples[i].missing(c)) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < n && trip.samples[j].missing(c)) ++j;
      // Missing run [i, j).
      const double duration = trip.samples[j - 1].t - trip.samples[i].t + period;
      const bool interior = i > 0 && j < n;
      if (interior && duration <= max_gap_fill + kTimeEps) {
        const auto& a = trip.samples[i - 1];
        const auto& b = trip.samples[j];
        const double span = b.t - a.t;
        for (std::size_t k = i; k < j; ++k) {
          const double frac = (trip.samples[k].t - a.t) / span;
          filled[k].values[c] = a.values[c] + frac * (b.values[c] - a.values[c]);
        }
      } else {
        for (std::size_t k = i; k < j; ++k) drop[k] = true;
      }
      i = j;
    }
  }

  Trip out;
  out.driver_id = trip.driver_id;
  out.nominal_rate_hz = trip.nominal_rate_hz;
  out.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!drop[k]) out.samples.push_back(filled[k]);
  }
  if (out.samples.empty()) throw DataError("no valid data");
  return out;
}

std::vector<double> stop_signal(const Trip& trip, StopAggregation aggregation) {
  std::vector<double> out;
  out.reserve(trip.samples.size());
  for (const auto& s : trip.samples) {
    const double x = s.values[0], y = s.values[1], z = s.values[2];
    out.push_back(aggregation == StopAggregation::magnitude ? std::sqrt(x * x + y * y + z * z)
                                                            : x + y + z);
  }
  return out;
}

std::vector<StopInterval> detect_stops(std::span<const double> series,
                                       std::span<const double> times, double rate_hz,
                                       double threshold, double min_stop_seconds) {
  if (series.size() != times.size()) throw ConfigError("series/time length mismatch");
  const std::size_t n = series.size();
  const double period = 1.0 / rate_hz;
  const double max_dt = kContiguityFactor * period;

  std::vector<StopInterval> out;
  std::size_t i = 0;
  while (i < n) {
    if (std::isnan(series[i])) {
      ++i;
      continue;
    }
    double lo = series[i], hi = series[i];
    std::size_t j = i + 1;
    while (j < n) {
      const double v = series[j];
      if (std::isnan(v) || times[j] - times[j - 1] > max_dt) break;
      const double nlo = std::min(lo, v), nhi = std::max(hi, v);
      if (nhi - nlo > threshold) break;
      lo = nlo;
      hi = nhi;
      ++j;
    }
    // Run [i, j) is right-maximal; it is left-maximal because every earlier
    // start was rejected.
    const double duration = times[j - 1] - times[i] + period;
    if (duration + kTimeEps >= min_stop_seconds) {
      double end = times[j - 1] + period;
      if (j < n) end = std::min(end, times[j]);
      out.push_back({times[i], end});
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<StopInterval> detect_stops(const Trip& trip, double threshold,
                                       double min_stop_seconds, StopAggregation aggregation) {
  const auto series = stop_signal(trip, aggregation);
  std::vector<double> times;
  times.reserve(trip.samples.size());
  for (const auto& s : trip.samples) times.push_back(s.t);
  return detect_stops(series, times, trip.nominal_rate_hz, threshold, min_stop_seconds);
}

CleanTrip remove_stops(const Trip& trip, std::span<const StopInterval> stops) {
  for (std::size_t k = 0; k < stops.size(); ++k) {
    if (stops[k].end_t < stops[k].start_t) throw DataError("stop interval ends before it starts");
    if (k > 0 && stops[k].start_t < stops[k - 1].end_t) {
      throw DataError("overlapping stop intervals");
    }
  }

  CleanTrip out;
  out.driver_id = trip.driver_id;
  out.nominal_rate_hz = trip.nominal_rate_hz;
  out.input_seconds = static_cast<double>(trip.samples.size()) * trip.period();
  out.stops.assign(stops.begin(), stops.end());
  out.provenance = {"remove_stops"};
  for (const auto& s : stops) out.removed_stop_seconds += s.duration();

  const double max_dt = kContiguityFactor * trip.period();
  std::size_t stop_idx = 0;
  std::size_t prev_kept = 0;
  bool any_kept = false;
  for (std::size_t i = 0; i < trip.samples.size(); ++i) {
    const double t = trip.samples[i].t;
    while (stop_idx < stops.size() && stops[stop_idx].end_t <= t) ++stop_idx;
    const bool inside = stop_idx < stops.size() && stops[stop_idx].start_t <= t;
    if (inside) continue;
    if (any_kept && (i != prev_kept + 1 || t - trip.samples[prev_kept].t > max_dt)) {
      out.run_starts.push_back(out.samples.size());
    }
    out.samples.push_back(trip.samples[i]);
    prev_kept = i;
    any_kept = true;
  }
  if (out.samples.empty()) throw DataError("no movement data");
  return out;
}

CleanTrip clean(const Trip& trip, const CleaningConfig& cfg) {
  cfg.validate();
  check_trip(trip);
  std::vector<std::string> stages;

  Trip current = denoise(trip, cfg.denoise_window);
  stages.emplace_back("denoise");
  if (cfg.reorient) {
    current = reorient(current);
    stages.emplace_back("reorient");
  }
  const std::size_t before_fill = current.samples.size();
  current = fill_gaps(current, cfg.max_gap_fill);
  stages.emplace_back("fill_gaps");
  const std::size_t gap_removed = before_fill - current.samples.size();

  const auto stops =
      detect_stops(current, cfg.stop_threshold, cfg.min_stop_seconds, cfg.aggregation);
  stages.emplace_back("detect_stops");
  CleanTrip out = remove_stops(current, stops);
  stages.emplace_back("remove_stops");

  out.input_seconds = static_cast<double>(trip.samples.size()) * trip.period();
  out.removed_gap_seconds = static_cast<double>(gap_removed) * trip.period();
  out.provenance = std::move(stages);
  return out;
}

void write_clean_sidecar(std::ostream& sink, const CleanTrip& trip) {
  nlohmann::ordered_json j;
  j["driver_id"] = trip.driver_id;
  j["rate_hz"] = trip.nominal_rate_hz;
  j["input_seconds"] = trip.input_seconds;
  j["clean_seconds"] = trip.clean_seconds();
  j["removed_stop_seconds"] = trip.removed_stop_seconds;
  j["removed_gap_seconds"] = trip.removed_gap_seconds;
  j["provenance"] = trip.provenance;
  auto stops = nlohmann::ordered_json::array();
  for (const auto& s : trip.stops) stops.push_back({s.start_t, s.end_t});
  j["stops"] = stops;
  j["run_starts"] = trip.run_starts;
  sink << j.dump(2) << '\n';
}

}  // namespace driverid
