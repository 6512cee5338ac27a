#include "driverid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "driverid/error.hpp"
#include "driverid/seed.hpp"
#include "internal.hpp"
#include "json.hpp"

namespace driverid {

namespace {

constexpr std::size_t kMaxEasy = 13;
constexpr double kEasySpacing = 1.0;
constexpr double kEasyNoise = 0.2;
constexpr double kEdgeSeconds = 30.0;
constexpr double kMinStopSpacing = 60.0;
constexpr std::size_t kGapMargin = 3;
constexpr double kPitchPerAccel = 0.1;  // rad/s per m/s^2
constexpr double kRollPerAccel = 0.1;

enum class EventKind { accelerate, brake, turn };

struct Event {
  EventKind kind;
  double start;
  double duration;
  double amplitude;  ///< signed
};

double half_sine(double t, double start, double duration) {
  if (t < start || t >= start + duration) return 0.0;
  return std::sin(std::numbers::pi * (t - start) / duration);
}

std::array<double, 4> behaviour(const DriverProfile& p) {
  return {p.accel_aggressiveness, p.brake_harshness, p.turn_rate_scale, p.event_rate};
}

}  // namespace

void DriverProfile::validate() const {
  if (driver_id.empty()) throw ConfigError("driver profile needs an id");
  for (double v : {accel_aggressiveness, brake_harshness, turn_rate_scale, event_rate, noise_sigma,
                   stop_frequency, gap_frequency}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("driver profile " + driver_id + ": parameters must be finite and >= 0");
    }
  }
  if (!(stop_duration_range[0] > 0.0 && stop_duration_range[0] <= stop_duration_range[1])) {
    throw ConfigError("driver profile " + driver_id + ": bad stop duration range");
  }
  if (!(gap_duration_range[0] > 0.0 && gap_duration_range[0] <= gap_duration_range[1])) {
    throw ConfigError("driver profile " + driver_id + ": bad gap duration range");
  }
}

std::size_t max_easy_profiles() { return kMaxEasy; }

std::vector<DriverProfile> make_profiles(std::size_t n, Separation separation, std::uint64_t seed) {
  if (n < 2) throw ConfigError("need at least 2 synthetic drivers");
  if (separation == Separation::easy && n > kMaxEasy) {
    throw ConfigError("easy separation supports at most " + std::to_string(kMaxEasy) +
                      " drivers, got " + std::to_string(n));
  }
  detail::Rng rng(derive_seed(seed, "profiles"));
  std::vector<DriverProfile> out(n);

  if (separation == Separation::easy) {
    std::array<std::vector<std::size_t>, 3> ranks;
    for (auto& r : ranks) {
      r.resize(n);
      std::iota(r.begin(), r.end(), 0);
      rng.shuffle(std::span<std::size_t>(r));
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto& p = out[i];
      p.accel_aggressiveness = 0.8 + kEasySpacing * static_cast<double>(ranks[0][i]);
      p.brake_harshness = 1.0 + kEasySpacing * static_cast<double>(ranks[1][i]);
      p.event_rate = 3.0 + kEasySpacing * static_cast<double>(ranks[2][i]);
      p.turn_rate_scale = rng.uniform(0.1, 0.5);
      p.noise_sigma = kEasyNoise;
      p.stop_frequency = 0.5;
      p.stop_duration_range = {15.0, 90.0};
      p.gap_frequency = 1.0;
      p.gap_duration_range = {0.5, 2.0};
    }
  } else {
    for (auto& p : out) {
      p.accel_aggressiveness = rng.uniform(1.5, 3.0);
      p.brake_harshness = rng.uniform(1.5, 3.0);
      p.turn_rate_scale = rng.uniform(0.2, 0.4);
      p.event_rate = rng.uniform(2.0, 4.0);
      p.noise_sigma = rng.uniform(0.2, 0.4);
      p.stop_frequency = rng.uniform(0.5, 2.0);
      p.stop_duration_range = {10.0, 120.0};
      p.gap_frequency = rng.uniform(0.5, 3.0);
      p.gap_duration_range = {0.5, 6.0};
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i].driver_id = std::to_string(201 + i);
    out[i].seed = derive_seed(seed, "driver/" + std::to_string(i));
  }
  return out;
}

bool well_separated(std::span<const DriverProfile> profiles) {
  double sigma = 0.0;
  for (const auto& p : profiles) sigma = std::max(sigma, p.noise_sigma);
  const double need = 3.0 * sigma;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (std::size_t j = i + 1; j < profiles.size(); ++j) {
      const auto a = behaviour(profiles[i]);
      const auto b = behaviour(profiles[j]);
      int separated = 0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::abs(a[k] - b[k]) >= need) ++separated;
      }
      if (separated < 2) return false;
    }
  }
  return true;
}

double SyntheticTruth::removable_stop_seconds(double min_stop_seconds) const {
  double total = 0.0;
  for (const auto& s : stops) {
    if (s.duration() + 1e-9 >= min_stop_seconds) total += s.duration();
  }
  return total;
}

double SyntheticTruth::removable_gap_seconds(double max_gap_fill) const {
  double total = 0.0;
  for (const auto& g : gaps) {
    if (g.duration() > max_gap_fill + 1e-9) total += g.duration();
  }
  return total;
}

SyntheticTrip generate_trip(const DriverProfile& profile, double duration_s, double rate_hz) {
  profile.validate();
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw ConfigError("rate must be positive");
  if (!(duration_s >= 60.0)) throw ConfigError("synthetic trips must last at least 60 s");

  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  const double period = 1.0 / rate_hz;
  detail::Rng rng(profile.seed);

  SyntheticTrip out;
  out.truth.profile = profile;
  out.trip.driver_id = profile.driver_id;
  out.trip.nominal_rate_hz = rate_hz;

  // Stops, snapped to the sample grid.
  std::vector<char> stopped(n, 0);
  if (profile.stop_frequency > 0.0) {
    const double mean_spacing = 3600.0 / profile.stop_frequency;
    double t = kEdgeSeconds;
    while (true) {
      t += std::max(kMinStopSpacing, rng.exponential(mean_spacing));
      const double dur = rng.uniform(profile.stop_duration_range[0], profile.stop_duration_range[1]);
      const auto first = static_cast<std::size_t>(std::ceil(t * rate_hz - 1e-9));
      const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(dur * rate_hz)));
      if (static_cast<double>(first + len) * period > duration_s - kEdgeSeconds || first + len > n) {
        break;
      }
      for (std::size_t i = first; i < first + len; ++i) stopped[i] = 1;
      out.truth.stops.push_back({static_cast<double>(first) * period,
                                 static_cast<double>(first + len) * period});
      t = static_cast<double>(first + len) * period;
    }
  }

  // Driving events: jittered regular spacing, types cycled in shuffled triples.
  std::vector<Event> events;
  if (profile.event_rate > 0.0) {
    const double mean_gap = 60.0 / profile.event_rate;
    std::array<std::size_t, 3> cycle{0, 1, 2};
    std::size_t slot = cycle.size();
    double t = rng.uniform(0.0, mean_gap);
    while (t < duration_s) {
      if (slot == cycle.size()) {
        rng.shuffle(std::span<std::size_t>(cycle));
        slot = 0;
      }
      Event e;
      e.kind = static_cast<EventKind>(cycle[slot++]);
      e.start = t;
      e.duration = rng.uniform(3.0, 5.0);
      const double jitter = rng.uniform(0.9, 1.1);
      switch (e.kind) {
        case EventKind::accelerate: e.amplitude = profile.accel_aggressiveness * jitter; break;
        case EventKind::brake: e.amplitude = -profile.brake_harshness * jitter; break;
        case EventKind::turn:
          e.amplitude = (rng.coin() ? 1.0 : -1.0) * profile.turn_rate_scale * jitter;
          break;
      }
      events.push_back(e);
      t += mean_gap * rng.uniform(0.5, 1.5);
    }
  }

  const double sigma = profile.noise_sigma;
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  out.trip.samples.resize(n);
  std::size_t next_event = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = out.trip.samples[i];
    s.t = static_cast<double>(i) * period;
    if (stopped[i]) {
      s.values = {0.0, 0.0, kGravity, 0.0, 0.0, 0.0};
      for (auto& v : s.values) v += rng.normal(0.0, sigma / 10.0);
      continue;
    }
    while (next_event < events.size() &&
           events[next_event].start + events[next_event].duration <= s.t) {
      ++next_event;
    }
    double a_lon = 0.0, yaw = 0.0;
    for (std::size_t k = next_event; k < events.size() && events[k].start <= s.t; ++k) {
      const double shape = half_sine(s.t, events[k].start, events[k].duration);
      if (events[k].kind == EventKind::turn) {
        yaw += events[k].amplitude * shape;
      } else {
        a_lon += events[k].amplitude * shape;
      }
    }
    const double a_lat = 10.0 * yaw;
    const double sign = rng.coin() ? 1.0 : -1.0;
    const double dev = sign * (8.0 + 4.0 * rng.uniform01()) * sigma +
                       4.0 * sigma * std::sin(2.0 * std::numbers::pi * s.t / 5.5 + phase);
    const double mag = kGravity + dev;
    const double floor_z = 0.3 * kGravity;
    const double az = std::sqrt(std::max(mag * mag - a_lat * a_lat - a_lon * a_lon, floor_z * floor_z));
    s.values = {a_lat, a_lon, az, -kPitchPerAccel * a_lon, kRollPerAccel * a_lat, yaw};
    for (auto& v : s.values) v += rng.normal(0.0, sigma);
  }

  // Missing-value bursts inside driving stretches.
  if (profile.gap_frequency > 0.0) {
    const double mean_spacing = 3600.0 / profile.gap_frequency;
    double t = 0.0;
    std::size_t last_end = 0;
    while (true) {
      t += rng.exponential(mean_spacing);
      const double dur = rng.uniform(profile.gap_duration_range[0], profile.gap_duration_range[1]);
      std::array<bool, kChannelCount> mask{};
      bool any = false;
      while (!any) {
        for (auto& m : mask) {
          m = rng.coin();
          any = any || m;
        }
      }
      const auto first = static_cast<std::size_t>(std::ceil(t * rate_hz - 1e-9));
      const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(dur * rate_hz)));
      if (first + len + kGapMargin > n) break;
      bool clear = first >= kGapMargin && (out.truth.gaps.empty() || first >= last_end + kGapMargin);
      for (std::size_t i = first >= kGapMargin ? first - kGapMargin : 0;
           clear && i < first + len + kGapMargin; ++i) {
        if (stopped[i]) clear = false;
      }
      if (!clear) continue;
      for (std::size_t i = first; i < first + len; ++i) {
        for (std::size_t c = 0; c < kChannelCount; ++c) {
          if (mask[c]) out.trip.samples[i].values[c] = SensorSample::missing_value();
        }
      }
      out.truth.gaps.push_back({static_cast<double>(first) * period,
                                static_cast<double>(first + len) * period, mask});
      last_end = first + len;
    }
  }
  return out;
}

void write_truth_json(std::ostream& sink, const SyntheticTruth& truth) {
  using json = nlohmann::ordered_json;
  const auto& p = truth.profile;
  json j;
  j["profile"] = {{"driver_id", p.driver_id},
                  {"accel_aggressiveness", p.accel_aggressiveness},
                  {"brake_harshness", p.brake_harshness},
                  {"turn_rate_scale", p.turn_rate_scale},
                  {"event_rate", p.event_rate},
                  {"noise_sigma", p.noise_sigma},
                  {"stop_frequency", p.stop_frequency},
                  {"stop_duration_range", p.stop_duration_range},
                  {"gap_frequency", p.gap_frequency},
                  {"gap_duration_range", p.gap_duration_range},
                  {"seed", p.seed}};
  auto stops = json::array();
  for (const auto& s : truth.stops) stops.push_back({{"start_t", s.start_t}, {"end_t", s.end_t}});
  j["stops"] = stops;
  auto gaps = json::array();
  for (const auto& g : truth.gaps) {
    auto channels = json::array();
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      if (g.channels[c]) channels.push_back(std::string(kChannelNames[c]));
    }
    gaps.push_back({{"start_t", g.start_t}, {"end_t", g.end_t}, {"channels", channels}});
  }
  j["gaps"] = gaps;
  sink << j.dump(2) << '\n';
}

}  // namespace driverid
