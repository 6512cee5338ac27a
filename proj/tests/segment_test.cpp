#include <algorithm>

#include <gtest/gtest.h>

#include <driverid/error.hpp>
#include <driverid/segment.hpp>

#include "support/gen.hpp"

using namespace driverid;

namespace {

CleanTrip ramp(std::size_t n, double rate = 2.0) {
  CleanTrip c;
  c.driver_id = "d";
  c.nominal_rate_hz = rate;
  for (std::size_t i = 0; i < n; ++i) {
    SensorSample s;
    s.t = static_cast<double>(i) / rate;
    s.values.fill(static_cast<double>(i));
    c.samples.push_back(s);
  }
  return c;
}

SegmentationConfig seg(double minutes, double overlap, double train = 0.7) {
  SegmentationConfig s;
  s.window_minutes = minutes;
  s.overlap_fraction = overlap;
  s.train_fraction = train;
  return s;
}

}  // namespace

TEST(Split, SeventyThirty) {
  const CleanTrip c = ramp(1000);
  const auto sp = split_train_test(c, 0.7);
  EXPECT_EQ(sp.train.begin, 0u);
  EXPECT_EQ(sp.train.end, 700u);
  EXPECT_EQ(sp.test.begin, 700u);
  EXPECT_EQ(sp.test.end, 1000u);
  EXPECT_EQ(sp.train.partition, Partition::train);
  EXPECT_EQ(sp.test.partition, Partition::test);
}

TEST(Split, HalfOfTen) {
  const auto sp = split_train_test(ramp(10), 0.5);
  EXPECT_EQ(sp.train.size(), 5u);
  EXPECT_EQ(sp.test.size(), 5u);
}

TEST(Split, TooShortSideNamesTrip) {
  try {
    split_train_test(ramp(100), 0.7, 50);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient data for split"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("d"), std::string::npos);
  }
}

TEST(Split, DisjointAndExhaustive) {
  gen::for_all(31, 200, [](gen::Gen& g, std::size_t i) {
    const std::size_t n = g.index(2, 5000);
    const double f = g.uniform(0.01, 0.99);
    const CleanTrip c = ramp(n);
    const std::size_t expect_train = static_cast<std::size_t>(std::floor(f * static_cast<double>(n)));
    if (expect_train == 0 || expect_train == n) {
      EXPECT_THROW(split_train_test(c, f), DataError);
      return;
    }
    const auto sp = split_train_test(c, f);
    ASSERT_EQ(sp.train.begin, 0u) << "case " << i;
    ASSERT_EQ(sp.train.end, sp.test.begin);
    ASSERT_EQ(sp.test.end, n);
    ASSERT_EQ(sp.train.size(), expect_train);
  });
}

TEST(Segmentation, WindowAndStrideArithmetic) {
  EXPECT_EQ(seg(10, 0).window_samples(2.0), 1200u);
  EXPECT_EQ(seg(10, 0.75).stride_samples(2.0), 300u);
  EXPECT_EQ(seg(10, 0.5).stride_samples(2.0), 600u);
  EXPECT_EQ(seg(25, 0.5).window_samples(2.0), 3000u);
  EXPECT_EQ(seg(0.02, 0.99).stride_samples(2.0), 1u);
  EXPECT_THROW(seg(0.001, 0).window_samples(2.0), ConfigError);
}

TEST(Segmentation, ConfigValidation) {
  EXPECT_THROW(seg(10, 1.0).validate(), ConfigError);
  EXPECT_THROW(seg(10, -0.1).validate(), ConfigError);
  EXPECT_THROW(seg(10, 0.5, 0.0).validate(), ConfigError);
  EXPECT_THROW(seg(10, 0.5, 1.0).validate(), ConfigError);
  EXPECT_THROW(seg(0, 0.5).validate(), ConfigError);
  EXPECT_NO_THROW(seg(15, 0.75).validate());
}

TEST(CutWindows, ExactSpanGivesOneWindow) {
  const CleanTrip c = ramp(1200);
  const SampleSpan span{&c, 0, 1200, Partition::train};
  const auto ws = cut_windows(span, seg(10, 0), 2.0);
  ASSERT_EQ(ws.size(), 1u);
  EXPECT_EQ(ws[0].size(), 1200u);
  EXPECT_DOUBLE_EQ(ws[0].start_t, 0.0);
  EXPECT_DOUBLE_EQ(ws[0].end_t, 600.0);
}

TEST(CutWindows, HalfOverlapDropsTrailingPartial) {
  const CleanTrip c = ramp(1800);
  const auto ws = cut_windows(SampleSpan{&c, 0, 1800, Partition::test}, seg(10, 0.5), 2.0);
  ASSERT_EQ(ws.size(), 2u);
  EXPECT_DOUBLE_EQ(ws[0].channels[0][0], 0.0);
  EXPECT_DOUBLE_EQ(ws[1].channels[0][0], 600.0);
  EXPECT_EQ(ws[1].partition, Partition::test);
}

TEST(CutWindows, ShortSpanIsEmptyNotError) {
  const CleanTrip c = ramp(100);
  EXPECT_TRUE(cut_windows(SampleSpan{&c, 0, 100, Partition::train}, seg(10, 0), 2.0).empty());
}

TEST(CutWindows, NeverCrossesRemovalGap) {
  CleanTrip c = ramp(100);
  // Pretend samples 40..59 were removed: shift later times and record the run start.
  c.samples.erase(c.samples.begin() + 40, c.samples.begin() + 60);
  c.run_starts = {40};
  const auto ws = cut_windows(SampleSpan{&c, 0, c.samples.size(), Partition::train},
                              seg(10.0 / 60.0, 0.5), 2.0);  // w = 20, s = 10
  // Run 1 has 40 samples -> 3 windows, run 2 has 40 samples -> 3 windows.
  ASSERT_EQ(ws.size(), 6u);
  for (const auto& w : ws) {
    EXPECT_TRUE(w.end_t <= 20.0 || w.start_t >= 30.0) << w.start_t << " " << w.end_t;
  }
}

TEST(CutWindowsProperty, CountMatchesFormulaAndEnumeration) {
  gen::for_all(32, 300, [](gen::Gen& g, std::size_t i) {
    const std::size_t n = g.index(1, 3000);
    const std::size_t w = g.index(2, 400);
    const std::size_t s = g.index(1, 400);
    std::size_t enumerated = 0;
    for (std::size_t off = 0; off + w <= n; off += s) ++enumerated;
    ASSERT_EQ(expected_window_count(n, w, s), enumerated) << "case " << i;
  });
}

TEST(CutWindowsProperty, WindowsHaveFixedLengthAndDuration) {
  gen::for_all(33, 100, [](gen::Gen& g, std::size_t i) {
    const double rate = g.coin() ? 2.0 : g.uniform(1.0, 10.0);
    const std::size_t n = g.index(10, 4000);
    const CleanTrip c = ramp(n, rate);
    const auto cfg = seg(g.uniform(0.05, 5.0), g.uniform(0.0, 0.95));
    const std::size_t w = cfg.window_samples(rate);
    const auto ws = cut_windows(SampleSpan{&c, 0, n, Partition::train}, cfg, rate);
    ASSERT_EQ(ws.size(), expected_window_count(n, w, cfg.stride_samples(rate))) << "case " << i;
    for (const auto& win : ws) {
      for (const auto& ch : win.channels) { ASSERT_EQ(ch.size(), w); }
      ASSERT_NEAR(win.end_t - win.start_t, cfg.window_minutes * 60.0, 1.0 / rate);
    }
  });
}
