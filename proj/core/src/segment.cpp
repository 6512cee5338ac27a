#include "driverid/segment.hpp"

#include <algorithm>
#include <cmath>

#include "driverid/error.hpp"

namespace driverid {

std::string_view partition_name(Partition p) { return p == Partition::train ? "train" : "test"; }

void SegmentationConfig::validate() const {
  if (!(window_minutes > 0.0)) throw ConfigError("window_minutes must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw ConfigError("overlap_fraction must be in [0, 1)");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }
}

std::size_t SegmentationConfig::window_samples(double rate_hz) const {
  const long long w = std::llround(window_minutes * 60.0 * rate_hz);
  if (w < 2) throw ConfigError("window must contain at least 2 samples");
  return static_cast<std::size_t>(w);
}

std::size_t SegmentationConfig::stride_samples(double rate_hz) const {
  const double w = static_cast<double>(window_samples(rate_hz));
  return static_cast<std::size_t>(std::max(1LL, std::llround(w * (1.0 - overlap_fraction))));
}

TrainTestSplit split_train_test(const CleanTrip& trip, double train_fraction,
                                std::size_t min_span_samples) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }
  const std::size_t n = trip.samples.size();
  if (n == 0) throw DataError("insufficient data for split: trip " + trip.driver_id + " is empty");
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
  if (n_train < min_span_samples || n - n_train < min_span_samples) {
    throw DataError("insufficient data for split: trip " + trip.driver_id + " has " +
                    std::to_string(n) + " samples, need " + std::to_string(min_span_samples) +
                    " on each side");
  }
  return {SampleSpan{&trip, 0, n_train, Partition::train},
          SampleSpan{&trip, n_train, n, Partition::test}};
}

std::size_t expected_window_count(std::size_t n, std::size_t w, std::size_t s) {
  if (n < w || s == 0) return 0;
  return (n - w) / s + 1;
}

std::vector<Window> cut_windows(const SampleSpan& span, const SegmentationConfig& cfg,
                                double rate_hz) {
  cfg.validate();
  std::vector<Window> out;
  if (span.trip == nullptr || span.size() == 0) return out;
  const CleanTrip& trip = *span.trip;
  const std::size_t w = cfg.window_samples(rate_hz);
  const std::size_t s = cfg.stride_samples(rate_hz);
  const double period = 1.0 / rate_hz;

  // Contiguous runs inside the span.
  std::vector<std::size_t> bounds{span.begin};
  for (std::size_t r : trip.run_starts) {
    if (r > span.begin && r < span.end) bounds.push_back(r);
  }
  bounds.push_back(span.end);

  for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
    const std::size_t run_end = bounds[b + 1];
    for (std::size_t off = bounds[b]; off + w <= run_end; off += s) {
      Window win;
      win.driver_id = trip.driver_id;
      win.partition = span.partition;
      win.start_t = trip.samples[off].t;
      const std::size_t last = off + w - 1;
      win.end_t = trip.samples[last].t + period;
      if (last + 1 < trip.samples.size()) {
        win.end_t = std::min(win.end_t, trip.samples[last + 1].t);
      }
      for (std::size_t c = 0; c < kChannelCount; ++c) {
        auto& ch = win.channels[c];
        ch.reserve(w);
        for (std::size_t k = off; k <= last; ++k) ch.push_back(trip.samples[k].values[c]);
      }
      out.push_back(std::move(win));
    }
  }
  return out;
}

}  // namespace driverid
