#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include <driverid/error.hpp>
#include <driverid/preprocess.hpp>
#include <driverid/synth.hpp>

#include "support/gen.hpp"

using namespace driverid;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Trip trip_from(const std::vector<std::array<double, 6>>& rows, double rate = 2.0) {
  Trip t{"d", {}, rate};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.samples.push_back(SensorSample{static_cast<double>(i) / rate, rows[i]});
  }
  return t;
}

Trip constant_trip(std::size_t n, std::array<double, 6> v, double rate = 2.0) {
  return trip_from(std::vector<std::array<double, 6>>(n, v), rate);
}

double norm3(const std::array<double, 6>& v, std::size_t off) {
  return std::sqrt(v[off] * v[off] + v[off + 1] * v[off + 1] + v[off + 2] * v[off + 2]);
}

std::array<double, 3> mean_accel(const Trip& t) {
  std::array<double, 3> m{};
  for (const auto& s : t.samples) {
    for (std::size_t k = 0; k < 3; ++k) m[k] += s.values[k];
  }
  for (auto& x : m) x /= static_cast<double>(t.samples.size());
  return m;
}

}  // namespace

// ---------------------------------------------------------------- denoise

TEST(Denoise, ConstantIsFixedPoint) {
  const Trip t = constant_trip(30, {1, 2, 9.81, 0.1, 0.2, 0.3});
  for (int w : {1, 3, 5, 29}) { EXPECT_EQ(denoise(t, w), t) << "window " << w; }
}

TEST(Denoise, WindowOneIsIdentity) {
  gen::Gen g(1);
  const Trip t = gen::trip(g, 40, 2.0);
  EXPECT_EQ(denoise(t, 1), t);
}

TEST(Denoise, ShrunkenEdgeAverages) {
  Trip t = trip_from({{0}, {3}, {0}, {3}, {0}});
  const Trip out = denoise(t, 3);
  const std::vector<double> expected{1.5, 1.0, 2.0, 1.0, 1.5};
  for (std::size_t i = 0; i < 5; ++i) { EXPECT_DOUBLE_EQ(out.samples[i].values[0], expected[i]); }
}

TEST(Denoise, RejectsBadWindows) {
  const Trip t = constant_trip(5, {});
  EXPECT_THROW(denoise(t, 2), ConfigError);
  EXPECT_THROW(denoise(t, 0), ConfigError);
  EXPECT_THROW(denoise(t, 7), ConfigError);
}

TEST(Denoise, MissingStaysMissing) {
  Trip t = trip_from({{1}, {kNaN}, {3}, {5}});
  const Trip out = denoise(t, 3);
  EXPECT_TRUE(out.samples[1].missing(0));
  EXPECT_DOUBLE_EQ(out.samples[2].values[0], 4.0);  // skips the missing neighbour
}

// With a full-length window the centre sample sees every value.
TEST(DenoiseProperty, FullWindowCentreIsSignalMean) {
  gen::for_all(21, 100, [](gen::Gen& g, std::size_t i) {
    const std::size_t n = 2 * g.index(1, 40) + 1;
    std::vector<std::array<double, 6>> rows(n);
    for (std::size_t k = 0; k <= n / 2; ++k) {
      for (auto& v : rows[k]) v = g.normal(0.0, 5.0);
      rows[n - 1 - k] = rows[k];  // symmetric edges
    }
    const Trip out = denoise(trip_from(rows), static_cast<int>(n));
    for (std::size_t c = 0; c < 6; ++c) {
      double m = 0.0;
      for (const auto& r : rows) m += r[c];
      m /= static_cast<double>(n);
      ASSERT_NEAR(out.samples[n / 2].values[c], m, 1e-9) << "case " << i;
      // Symmetric input gives symmetric output.
      for (std::size_t k = 0; k < n; ++k) {
        ASSERT_NEAR(out.samples[k].values[c], out.samples[n - 1 - k].values[c], 1e-9);
      }
    }
  });
}

// ---------------------------------------------------------------- reorient

TEST(Reorient, AlignedTripUnchanged) {
  const Trip t = constant_trip(40, {0, 0, 9.81, 0.1, 0.0, 0.0});
  EXPECT_EQ(reorient(t), t);
}

TEST(Reorient, SidewaysGravityMovesToZ) {
  const Trip out = reorient(constant_trip(40, {9.81, 0, 0, 0, 0, 0}));
  const auto m = mean_accel(out);
  EXPECT_NEAR(m[0], 0.0, 1e-9);
  EXPECT_NEAR(m[1], 0.0, 1e-9);
  EXPECT_NEAR(m[2], 9.81, 1e-9);
}

TEST(Reorient, AntiParallelUsesHalfTurnAboutX) {
  const auto r = gravity_alignment({0, 0, -9.81});
  EXPECT_DOUBLE_EQ(r[0][0], 1.0);
  EXPECT_DOUBLE_EQ(r[1][1], -1.0);
  EXPECT_DOUBLE_EQ(r[2][2], -1.0);
  const auto m = mean_accel(reorient(constant_trip(40, {0, 0, -9.81, 0, 0, 0})));
  EXPECT_NEAR(m[2], 9.81, 1e-9);
}

TEST(Reorient, WeakGravityIsError) {
  try {
    reorient(constant_trip(40, {0.3, 0.2, 0.1, 0, 0, 0}));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("cannot estimate gravity"), std::string::npos);
  }
}

TEST(Reorient, NeedsTenSecondsOfAccelerometer) {
  EXPECT_THROW(reorient(constant_trip(10, {0, 0, 9.81, 0, 0, 0})), DataError);  // 5 s
}

// Rotating a trip rigidly and then reorienting keeps per-sample magnitudes.
TEST(ReorientProperty, PreservesMagnitudes) {
  gen::for_all(22, 50, [](gen::Gen& g, std::size_t i) {
    const std::size_t n = g.index(30, 200);
    std::vector<std::array<double, 6>> rows(n);
    for (auto& r : rows) {
      r = {g.normal(0, 1), g.normal(0, 1), 9.81 + g.normal(0, 1),
           g.normal(0, 0.3), g.normal(0, 0.3), g.normal(0, 0.3)};
    }
    // Random rotation from a random unit quaternion.
    double q[4] = {g.normal(), g.normal(), g.normal(), g.normal()};
    const double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    for (auto& v : q) v /= qn;
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    const double R[3][3] = {{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
                            {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
                            {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}};
    for (auto& r : rows) {
      for (std::size_t off : {0u, 3u}) {
        const double a = r[off], b = r[off + 1], c = r[off + 2];
        for (std::size_t k = 0; k < 3; ++k) r[off + k] = R[k][0] * a + R[k][1] * b + R[k][2] * c;
      }
    }
    const Trip in = trip_from(rows);
    const Trip out = reorient(in);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t off : {0u, 3u}) {
        const double before = norm3(in.samples[k].values, off);
        const double after = norm3(out.samples[k].values, off);
        ASSERT_LE(std::abs(after - before), 1e-9 * std::max(before, 1e-300)) << "case " << i;
      }
    }
    const auto m = mean_accel(out);
    ASSERT_NEAR(m[0], 0.0, 1e-9);
    ASSERT_NEAR(m[1], 0.0, 1e-9);
    ASSERT_GT(m[2], 0.0);
  });
}

// ---------------------------------------------------------------- fill_gaps

TEST(FillGaps, InteriorMidpoint) {
  Trip t = constant_trip(5, {0, 1, 9.81, 0, 0, 0});
  t.samples[1].values[1] = 1.0;
  t.samples[2].values[1] = kNaN;
  t.samples[3].values[1] = 2.0;
  const Trip out = fill_gaps(t, 2.0);
  ASSERT_EQ(out.samples.size(), 5u);
  EXPECT_DOUBLE_EQ(out.samples[2].values[1], 1.5);
}

TEST(FillGaps, LongRunIsRemoved) {
  Trip t = constant_trip(40, {0, 0, 9.81, 0, 0, 0});
  for (std::size_t i = 10; i < 20; ++i) t.samples[i].values[4] = kNaN;  // 5 s
  const Trip out = fill_gaps(t, 2.0);
  EXPECT_EQ(out.samples.size(), 30u);
  for (const auto& s : out.samples) { EXPECT_TRUE(s.t < 5.0 || s.t >= 10.0); }
}

TEST(FillGaps, LeadingAndTrailingRunsRemoved) {
  Trip t = constant_trip(10, {0, 0, 9.81, 0, 0, 0});
  t.samples[0].values[0] = kNaN;
  t.samples[9].values[5] = kNaN;
  EXPECT_EQ(fill_gaps(t, 2.0).samples.size(), 8u);
}

TEST(FillGaps, CompleteTripUnchanged) {
  gen::Gen g(5);
  const Trip t = gen::trip(g, 30, 2.0);
  EXPECT_EQ(fill_gaps(t, 2.0), t);
}

TEST(FillGaps, NoValidDataIsError) {
  Trip t = constant_trip(4, {kNaN, 0, 9.81, 0, 0, 0});
  try {
    fill_gaps(t, 2.0);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no valid data"), std::string::npos);
  }
}

TEST(FillGapsProperty, NeverInventsSamplesAndStaysBetweenAnchors) {
  gen::for_all(23, 200, [](gen::Gen& g, std::size_t i) {
    Trip t = gen::trip(g, g.index(5, 120), 2.0, g.uniform(0.0, 0.4));
    // Make sure at least one sample is complete.
    for (auto& v : t.samples[t.samples.size() / 2].values) {
      if (std::isnan(v)) v = 1.0;
    }
    const double max_fill = g.uniform(0.5, 4.0);
    const Trip out = fill_gaps(t, max_fill);
    ASSERT_LE(out.samples.size(), t.samples.size()) << "case " << i;
    std::size_t j = 0;
    for (const auto& s : out.samples) {
      ASSERT_TRUE(s.complete());
      while (t.samples[j].t != s.t) ++j;  // output is an ordered subset by time
      for (std::size_t c = 0; c < 6; ++c) {
        if (!t.samples[j].missing(c)) {
          ASSERT_EQ(s.values[c], t.samples[j].values[c]);
          continue;
        }
        std::size_t a = j, b = j;
        while (t.samples[a].missing(c)) --a;
        while (t.samples[b].missing(c)) ++b;
        const double lo = std::min(t.samples[a].values[c], t.samples[b].values[c]);
        const double hi = std::max(t.samples[a].values[c], t.samples[b].values[c]);
        ASSERT_GE(s.values[c], lo - 1e-9 * std::abs(lo));
        ASSERT_LE(s.values[c], hi + 1e-9 * std::abs(hi));
      }
    }
  });
}

// ---------------------------------------------------------------- stops

TEST(DetectStops, ConstantTenSecondsIsOneStop) {
  const auto stops = detect_stops(constant_trip(20, {0, 0, 9.81, 0, 0, 0}), 0.5, 6.0);
  ASSERT_EQ(stops.size(), 1u);
  EXPECT_DOUBLE_EQ(stops[0].start_t, 0.0);
  EXPECT_DOUBLE_EQ(stops[0].end_t, 10.0);
}

TEST(DetectStops, AlternatingMagnitudeHasNoStop) {
  std::vector<std::array<double, 6>> rows;
  for (int i = 0; i < 40; ++i) rows.push_back({0, 0, 9.81 + (i % 2 ? 1.0 : -1.0), 0, 0, 0});
  EXPECT_TRUE(detect_stops(trip_from(rows), 0.5, 6.0).empty());
}

TEST(DetectStops, ShortStopIsKept) {
  std::vector<std::array<double, 6>> rows;
  for (int i = 0; i < 40; ++i) rows.push_back({0, 0, 9.81 + (i % 2 ? 1.0 : -1.0), 0, 0, 0});
  for (int i = 10; i < 20; ++i) rows[i] = {0, 0, 9.81, 0, 0, 0};  // 5 s
  EXPECT_TRUE(detect_stops(trip_from(rows), 0.5, 6.0).empty());
  for (int i = 10; i < 24; ++i) rows[i] = {0, 0, 9.81, 0, 0, 0};  // 7 s
  const auto stops = detect_stops(trip_from(rows), 0.5, 6.0);
  ASSERT_EQ(stops.size(), 1u);
  EXPECT_DOUBLE_EQ(stops[0].start_t, 5.0);
  EXPECT_DOUBLE_EQ(stops[0].end_t, 12.0);
}

TEST(DetectStops, SumAggregationUsesAxisSum) {
  // Constant magnitude, varying sum: only the magnitude reading sees a stop.
  std::vector<std::array<double, 6>> rows;
  for (int i = 0; i < 20; ++i) {
    const double a = 0.3 * i;
    rows.push_back({9.81 * std::cos(a), 9.81 * std::sin(a), 0, 0, 0, 0});
  }
  const Trip t = trip_from(rows);
  EXPECT_EQ(detect_stops(t, 0.5, 6.0, StopAggregation::magnitude).size(), 1u);
  EXPECT_TRUE(detect_stops(t, 0.5, 6.0, StopAggregation::sum).empty());
}

TEST(DetectStops, RecoversInjectedStops) {
  DriverProfile p = make_profiles(2, Separation::easy, 3)[0];
  p.stop_frequency = 6.0;
  p.gap_frequency = 0.0;
  const auto syn = generate_trip(p, 1800.0);
  const auto stops = detect_stops(syn.trip, 0.5, 6.0);
  ASSERT_FALSE(syn.truth.stops.empty());
  for (const auto& truth : syn.truth.stops) {
    if (truth.duration() <= 6.0) continue;
    const auto hit = std::find_if(stops.begin(), stops.end(), [&](const StopInterval& s) {
      return std::abs(s.start_t - truth.start_t) <= 0.5 && std::abs(s.end_t - truth.end_t) <= 0.5;
    });
    EXPECT_NE(hit, stops.end()) << "stop at " << truth.start_t;
  }
}

// Detection only looks at the magnitude series: swapping x/y and flipping
// signs keeps m(t) bit-identical while changing every axis.
TEST(DetectStopsProperty, DependsOnlyOnMagnitude) {
  gen::for_all(24, 100, [](gen::Gen& g, std::size_t i) {
    const std::size_t n = g.index(20, 200);
    std::vector<std::array<double, 6>> a(n), b(n);
    const double sx = g.coin() ? 1.0 : -1.0, sy = g.coin() ? 1.0 : -1.0, sz = g.coin() ? 1.0 : -1.0;
    std::array<double, 3> v{0.0, 0.0, 9.81};
    for (std::size_t k = 0; k < n; ++k) {
      const double step = g.coin(0.8) ? 0.03 : 1.0;
      for (auto& x : v) x += g.normal(0.0, step);
      a[k] = {v[0], v[1], v[2], g.normal(), 0, 0};
      b[k] = {sy * v[1], sx * v[0], sz * v[2], 0, g.normal(), g.normal()};
    }
    const Trip ta = trip_from(a), tb = trip_from(b);
    ASSERT_EQ(stop_signal(ta), stop_signal(tb));
    ASSERT_EQ(detect_stops(ta, 0.5, 6.0), detect_stops(tb, 0.5, 6.0)) << "case " << i;
  });
}

TEST(DetectStopsProperty, IntervalsSortedDisjointAndLongEnough) {
  gen::for_all(25, 200, [](gen::Gen& g, std::size_t i) {
    const std::size_t n = g.index(10, 300);
    std::vector<double> series(n), times(n);
    double t = 0.0, v = 9.81;
    for (std::size_t k = 0; k < n; ++k) {
      v += g.coin(0.85) ? g.normal(0.0, 0.05) : g.normal(0.0, 2.0);
      series[k] = v;
      times[k] = t;
      t += g.coin(0.95) ? 0.5 : g.uniform(0.5, 5.0);
    }
    const double min_s = g.uniform(1.0, 10.0);
    const auto stops = detect_stops(series, times, 2.0, 0.5, min_s);
    for (std::size_t k = 0; k < stops.size(); ++k) {
      ASSERT_GE(stops[k].duration() + 1e-9, min_s) << "case " << i;
      if (k > 0) { ASSERT_LE(stops[k - 1].end_t, stops[k].start_t); }
    }
  });
}

TEST(RemoveStops, EmptyListKeepsEverything) {
  const Trip t = constant_trip(10, {0, 0, 9.81, 0, 0, 0});
  const auto c = remove_stops(t, {});
  EXPECT_EQ(c.samples.size(), 10u);
  EXPECT_EQ(c.removed_stop_seconds, 0.0);
  EXPECT_TRUE(c.run_starts.empty());
}

TEST(RemoveStops, TenSecondStopInHundredSeconds) {
  const Trip t = constant_trip(200, {0, 0, 9.81, 0, 0, 0});
  const std::vector<StopInterval> stops{{40.0, 50.0}};
  const auto c = remove_stops(t, stops);
  EXPECT_EQ(c.samples.size(), 180u);
  EXPECT_DOUBLE_EQ(c.removed_stop_seconds, 10.0);
  ASSERT_EQ(c.run_starts.size(), 1u);
  EXPECT_DOUBLE_EQ(c.samples[c.run_starts[0]].t, 50.0);  // timestamps are kept
}

TEST(RemoveStops, WholeTripIsNoMovementData) {
  const Trip t = constant_trip(20, {0, 0, 9.81, 0, 0, 0});
  const std::vector<StopInterval> stops{{0.0, 10.0}};
  try {
    remove_stops(t, stops);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no movement data"), std::string::npos);
  }
}

TEST(RemoveStops, OverlapIsError) {
  const Trip t = constant_trip(100, {0, 0, 9.81, 0, 0, 0});
  const std::vector<StopInterval> stops{{5.0, 15.0}, {10.0, 20.0}};
  EXPECT_THROW(remove_stops(t, stops), DataError);
}

// ---------------------------------------------------------------- clean

TEST(Clean, IdealTripKeepsAllSamples) {
  DriverProfile p = make_profiles(2, Separation::easy, 9)[1];
  p.noise_sigma = 0.2;
  p.stop_frequency = 0.0;
  p.gap_frequency = 0.0;
  const auto syn = generate_trip(p, 600.0);
  CleaningConfig cfg;
  const auto c = clean(syn.trip, cfg);
  EXPECT_EQ(c.samples.size(), syn.trip.samples.size());
}

TEST(Clean, ProvenanceFollowsStages) {
  const auto syn = generate_trip(make_profiles(2, Separation::easy, 9)[0], 600.0);
  CleaningConfig cfg;
  EXPECT_EQ(clean(syn.trip, cfg).provenance,
            (std::vector<std::string>{"denoise", "reorient", "fill_gaps", "detect_stops",
                                      "remove_stops"}));
  cfg.reorient = false;
  EXPECT_EQ(clean(syn.trip, cfg).provenance,
            (std::vector<std::string>{"denoise", "fill_gaps", "detect_stops", "remove_stops"}));
}

TEST(Clean, OutputIsCompleteAndIncreasing) {
  const auto syn = generate_trip(make_profiles(3, Separation::hard, 4)[2], 1800.0);
  const auto c = clean(syn.trip, CleaningConfig{});
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    ASSERT_TRUE(c.samples[i].complete());
    if (i > 0) { ASSERT_LT(c.samples[i - 1].t, c.samples[i].t); }
  }
}

TEST(Clean, ThirtyPercentStopTime) {
  // Constant-noise stop blocks covering 30% of a driving trip.
  DriverProfile p = make_profiles(2, Separation::easy, 2)[0];
  p.stop_frequency = 0.0;
  p.gap_frequency = 0.0;
  auto syn = generate_trip(p, 1000.0);
  auto& s = syn.trip.samples;
  double stop_seconds = 0.0;
  for (std::size_t start : {200u, 700u, 1300u}) {
    for (std::size_t k = start; k < start + 200; ++k) s[k].values = {0, 0, 9.81, 0, 0, 0};
    stop_seconds += 100.0;
  }
  CleaningConfig cfg;
  cfg.denoise_window = 1;
  const auto c = clean(syn.trip, cfg);
  EXPECT_NEAR(c.clean_seconds(), 1000.0 - stop_seconds, 0.5);
  EXPECT_NEAR(c.removed_stop_seconds, stop_seconds, 0.5);
}

TEST(Clean, ConfigValidation) {
  CleaningConfig cfg;
  cfg.denoise_window = 4;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.stop_threshold = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_gap_fill = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

// input = clean + stops + gaps (within one sample period), and a second pass
// finds nothing inside what was already removed.
TEST(CleanProperty, DurationIdentityAndIdempotence) {
  gen::for_all(26, 12, [](gen::Gen& g, std::size_t i) {
    auto profiles = make_profiles(2, g.coin() ? Separation::easy : Separation::hard, g.index(0, 1u << 20));
    DriverProfile p = profiles[i % 2];
    p.stop_frequency = g.uniform(0.5, 8.0);
    p.gap_frequency = g.uniform(0.0, 8.0);
    const auto syn = generate_trip(p, g.uniform(600.0, 1800.0));
    CleaningConfig cfg;
    cfg.denoise_window = 2 * static_cast<int>(g.index(0, 3)) + 1;
    cfg.max_gap_fill = g.uniform(0.5, 4.0);
    const auto c = clean(syn.trip, cfg);
    const double period = syn.trip.period();
    ASSERT_NEAR(c.input_seconds, c.clean_seconds() + c.removed_stop_seconds + c.removed_gap_seconds,
                period)
        << "case " << i;

    const auto again = detect_stops(c.as_trip(), cfg.stop_threshold, cfg.min_stop_seconds);
    for (const auto& s : again) {
      for (const auto& removed : c.stops) {
        ASSERT_FALSE(s.start_t >= removed.start_t && s.end_t <= removed.end_t);
      }
    }
  });
}
