#include "driverid/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>

#include "driverid/error.hpp"
#include "internal.hpp"
#include "json.hpp"

namespace driverid {

namespace {

constexpr std::array<FeatureFamily, 5> kFamilies{FeatureFamily::histogram, FeatureFamily::mean,
                                                 FeatureFamily::variance, FeatureFamily::difference,
                                                 FeatureFamily::correlation};

constexpr std::array<std::string_view, 5> kFamilyTitles{"Histogram", "Mean", "Variance",
                                                        "Difference", "Correlation"};
constexpr std::array<std::string_view, 5> kFamilyTags{"hist", "mean", "var", "diff", "corr"};

std::array<std::pair<std::size_t, std::size_t>, kPairCount> channel_pairs() {
  std::array<std::pair<std::size_t, std::size_t>, kPairCount> out{};
  std::size_t k = 0;
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    for (std::size_t j = i + 1; j < kChannelCount; ++j) out[k++] = {i, j};
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::optional<std::size_t> channel_index(std::string_view name) {
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (kChannelNames[c] == name) return c;
  }
  return std::nullopt;
}

}  // namespace

std::string_view family_name(FeatureFamily f) {
  static constexpr std::array<std::string_view, 5> names{"histogram", "mean", "variance",
                                                         "difference", "correlation"};
  return names[static_cast<std::size_t>(f)];
}

std::optional<FeatureFamily> parse_family(std::string_view name) {
  const std::string n = lower(name);
  for (auto f : kFamilies) {
    if (family_name(f) == n || kFamilyTags[static_cast<std::size_t>(f)] == n) return f;
  }
  return std::nullopt;
}

void FeatureConfig::validate() const {
  if (!(use_histogram || use_mean || use_variance || use_difference || use_correlation)) {
    throw ConfigError("at least one feature family must be enabled");
  }
  if (histogram_bins < 1) throw ConfigError("histogram_bins must be >= 1");
  if (!(trim_keep_fraction > 0.0 && trim_keep_fraction <= 1.0)) {
    throw ConfigError("trim_keep_fraction must be in (0, 1]");
  }
}

bool FeatureConfig::uses(FeatureFamily f) const {
  switch (f) {
    case FeatureFamily::histogram: return use_histogram;
    case FeatureFamily::mean: return use_mean;
    case FeatureFamily::variance: return use_variance;
    case FeatureFamily::difference: return use_difference;
    case FeatureFamily::correlation: return use_correlation;
  }
  return false;
}

void FeatureConfig::set(FeatureFamily f, bool on) {
  switch (f) {
    case FeatureFamily::histogram: use_histogram = on; break;
    case FeatureFamily::mean: use_mean = on; break;
    case FeatureFamily::variance: use_variance = on; break;
    case FeatureFamily::difference: use_difference = on; break;
    case FeatureFamily::correlation: use_correlation = on; break;
  }
}

std::size_t FeatureConfig::dimension() const {
  std::size_t d = 0;
  if (use_histogram) d += kChannelCount * static_cast<std::size_t>(std::max(histogram_bins, 0));
  if (use_mean) d += kChannelCount;
  if (use_variance) d += kChannelCount;
  if (use_difference) d += kChannelCount;
  if (use_correlation) d += kPairCount;
  return d;
}

FeatureConfig FeatureConfig::only(std::initializer_list<FeatureFamily> families) {
  FeatureConfig cfg;
  for (auto f : kFamilies) cfg.set(f, false);
  for (auto f : families) cfg.set(f, true);
  return cfg;
}

std::string FeatureConfig::name() const {
  std::vector<std::string_view> parts;
  for (auto f : kFamilies) {
    if (uses(f)) parts.push_back(kFamilyTitles[static_cast<std::size_t>(f)]);
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) {
      if (parts.size() == 2) {
        out += " and ";
      } else {
        out += i + 1 == parts.size() ? ", and " : ", ";
      }
    }
    out += parts[i];
  }
  return out;
}

FeatureConfig parse_feature_subset(std::string_view text) {
  const std::string s = lower(text);
  FeatureConfig cfg = FeatureConfig::only({});
  bool any = false;
  std::string token;
  auto flush = [&] {
    if (token.empty() || token == "and") {
      token.clear();
      return;
    }
    if (token == "all") {
      cfg = FeatureConfig{};
      any = true;
    } else if (auto f = parse_family(token)) {
      cfg.set(*f, true);
      any = true;
    } else {
      throw ConfigError("unknown feature family '" + token + "'");
    }
    token.clear();
  };
  for (char ch : s) {
    if (ch == ',' || ch == '+' || ch == ' ' || ch == '\t') {
      flush();
    } else {
      token += ch;
    }
  }
  flush();
  if (!any) throw ConfigError("empty feature subset '" + std::string(text) + "'");
  return cfg;
}

std::string FeatureDescriptor::label() const {
  std::string out(kFamilyTags[static_cast<std::size_t>(family)]);
  out += ':';
  out += signal;
  if (family == FeatureFamily::histogram) {
    out += ':';
    out += std::to_string(index);
  }
  return out;
}

std::optional<FeatureDescriptor> parse_descriptor(std::string_view label) {
  auto parts = detail::split(label, ':');
  if (parts.size() < 2) return std::nullopt;
  std::optional<FeatureFamily> family;
  for (auto f : kFamilies) {
    if (kFamilyTags[static_cast<std::size_t>(f)] == parts[0]) family = f;
  }
  if (!family) return std::nullopt;
  FeatureDescriptor d;
  d.family = *family;
  if (d.family == FeatureFamily::histogram) {
    if (parts.size() != 3 || !channel_index(parts[1])) return std::nullopt;
    d.signal = std::string(parts[1]);
    std::size_t idx = 0;
    for (char ch : parts[2]) {
      if (ch < '0' || ch > '9') return std::nullopt;
      idx = idx * 10 + static_cast<std::size_t>(ch - '0');
    }
    if (parts[2].empty()) return std::nullopt;
    d.index = idx;
  } else if (d.family == FeatureFamily::correlation) {
    if (parts.size() != 3 || !channel_index(parts[1]) || !channel_index(parts[2])) {
      return std::nullopt;
    }
    d.signal = std::string(parts[1]) + ":" + std::string(parts[2]);
  } else {
    if (parts.size() != 2 || !channel_index(parts[1])) return std::nullopt;
    d.signal = std::string(parts[1]);
  }
  return d;
}

FeatureSchema make_schema(const FeatureConfig& cfg) {
  cfg.validate();
  FeatureSchema schema;
  schema.reserve(cfg.dimension());
  if (cfg.use_histogram) {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      for (int b = 0; b < cfg.histogram_bins; ++b) {
        schema.push_back({FeatureFamily::histogram, std::string(kChannelNames[c]),
                          static_cast<std::size_t>(b)});
      }
    }
  }
  for (auto f : {FeatureFamily::mean, FeatureFamily::variance, FeatureFamily::difference}) {
    if (!cfg.uses(f)) continue;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      schema.push_back({f, std::string(kChannelNames[c]), 0});
    }
  }
  if (cfg.use_correlation) {
    for (auto [i, j] : channel_pairs()) {
      schema.push_back({FeatureFamily::correlation,
                        std::string(kChannelNames[i]) + ":" + std::string(kChannelNames[j]), 0});
    }
  }
  return schema;
}

double linear_quantile(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) throw DataError("quantile of an empty sample");
  const double h = p * static_cast<double>(n - 1);
  const auto i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

std::vector<double> trimmed_histogram(std::span<const double> signal, int bins, double keep) {
  if (signal.size() < 2) throw DataError("histogram needs at least 2 samples");
  if (bins < 1) throw ConfigError("histogram bins must be >= 1");
  if (!(keep > 0.0 && keep <= 1.0)) throw ConfigError("trim keep fraction must be in (0, 1]");

  std::vector<double> sorted(signal.begin(), signal.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - keep) / 2.0;
  double lo = linear_quantile(sorted, tail);
  double hi = linear_quantile(sorted, 1.0 - tail);

  const auto nb = static_cast<std::size_t>(bins);
  std::vector<double> hist(nb, 0.0);
  if (!(hi > lo)) {
    hist[0] = 1.0;
    return hist;
  }
  auto first = std::lower_bound(sorted.begin(), sorted.end(), lo);
  auto last = std::upper_bound(sorted.begin(), sorted.end(), hi);
  if (first == last) {
    // Interpolated bounds can fall strictly between two samples; use the full range.
    lo = sorted.front();
    hi = sorted.back();
    first = sorted.begin();
    last = sorted.end();
  }
  const double width = (hi - lo) / static_cast<double>(nb);
  for (auto it = first; it != last; ++it) {
    const double x = *it;
    auto k = static_cast<std::size_t>(
        std::clamp(std::floor((x - lo) / width), 0.0, static_cast<double>(nb - 1)));
    // Settle on the largest k with lo + k * width <= x.
    while (k + 1 < nb && lo + static_cast<double>(k + 1) * width <= x) ++k;
    while (k > 0 && lo + static_cast<double>(k) * width > x) --k;
    hist[k] += 1.0;
  }
  const double total = static_cast<double>(last - first);
  for (auto& h : hist) h /= total;
  return hist;
}

double channel_mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double ref = x.front();
  double dev = 0.0;
  for (double v : x) dev += v - ref;
  return ref + dev / static_cast<double>(x.size());
}

double channel_variance(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = channel_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size());
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("correlation of unequal-length channels");
  if (a.size() < 2) return 0.0;
  auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  if (*amin == *amax || *bmin == *bmax) return 0.0;
  const double ma = channel_mean(a), mb = channel_mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::array<double, kChannelCount> window_mean(const Window& w) {
  std::array<double, kChannelCount> out{};
  for (std::size_t c = 0; c < kChannelCount; ++c) out[c] = channel_mean(w.channels[c]);
  return out;
}

std::array<double, kChannelCount> window_variance(const Window& w) {
  std::array<double, kChannelCount> out{};
  for (std::size_t c = 0; c < kChannelCount; ++c) out[c] = channel_variance(w.channels[c]);
  return out;
}

std::array<double, kChannelCount> window_difference(const Window& current, const Window* previous,
                                                    DifferenceMode mode) {
  std::array<double, kChannelCount> out{};
  if (previous == nullptr) return out;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (current.channels[c].size() != previous->channels[c].size()) {
      throw DataError("difference feature: windows have different lengths");
    }
  }
  const auto prev_mean = window_mean(*previous);
  const auto cur_mean = window_mean(current);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const double lead = mode == DifferenceMode::mean_delta
                            ? cur_mean[c]
                            : cur_mean[c] * static_cast<double>(current.channels[c].size());
    out[c] = lead - prev_mean[c];
  }
  return out;
}

std::array<double, kPairCount> pairwise_correlation(const Window& w) {
  std::array<double, kPairCount> out{};
  std::size_t k = 0;
  for (auto [i, j] : channel_pairs()) out[k++] = pearson(w.channels[i], w.channels[j]);
  return out;
}

FeatureVector extract(const Window& window, const Window* previous, const FeatureConfig& cfg,
                      std::shared_ptr<const FeatureSchema> schema) {
  cfg.validate();
  if (!schema) schema = std::make_shared<const FeatureSchema>(make_schema(cfg));
  if (schema->size() != cfg.dimension()) throw SchemaMismatch("schema does not match config");

  FeatureVector fv;
  fv.schema = std::move(schema);
  fv.driver_id = window.driver_id;
  fv.partition = window.partition;
  fv.start_t = window.start_t;
  fv.end_t = window.end_t;
  fv.values.reserve(cfg.dimension());

  if (cfg.use_histogram) {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const auto h =
          trimmed_histogram(window.channels[c], cfg.histogram_bins, cfg.trim_keep_fraction);
      fv.values.insert(fv.values.end(), h.begin(), h.end());
    }
  }
  if (cfg.use_mean) {
    const auto m = window_mean(window);
    fv.values.insert(fv.values.end(), m.begin(), m.end());
  }
  if (cfg.use_variance) {
    const auto v = window_variance(window);
    fv.values.insert(fv.values.end(), v.begin(), v.end());
  }
  if (cfg.use_difference) {
    const auto d = window_difference(window, previous, cfg.difference_mode);
    fv.values.insert(fv.values.end(), d.begin(), d.end());
  }
  if (cfg.use_correlation) {
    const auto r = pairwise_correlation(window);
    fv.values.insert(fv.values.end(), r.begin(), r.end());
  }
  return fv;
}

void write_feature_csv(std::ostream& sink, std::span<const FeatureVector> vectors) {
  sink << "driver_id,partition,start_t,end_t";
  if (!vectors.empty() && vectors.front().schema) {
    for (const auto& d : *vectors.front().schema) sink << ',' << d.label();
  }
  sink << '\n';
  std::string row;
  for (const auto& v : vectors) {
    row = v.driver_id;
    row += ',';
    row += partition_name(v.partition);
    row += ',' + detail::format_double(v.start_t) + ',' + detail::format_double(v.end_t);
    for (double x : v.values) {
      row += ',';
      row += detail::format_double(x);
    }
    row += '\n';
    sink << row;
  }
}

void write_schema_json(std::ostream& sink, const FeatureSchema& schema, const FeatureConfig& cfg) {
  nlohmann::ordered_json j;
  j["dimension"] = schema.size();
  j["feature_set"] = cfg.name();
  j["histogram_bins"] = cfg.histogram_bins;
  j["trim_keep_fraction"] = cfg.trim_keep_fraction;
  j["difference_mode"] =
      cfg.difference_mode == DifferenceMode::mean_delta ? "mean_delta" : "sum_minus_mean";
  auto labels = nlohmann::ordered_json::array();
  for (const auto& d : schema) labels.push_back(d.label());
  j["features"] = labels;
  sink << j.dump(2) << '\n';
}

}  // namespace driverid
