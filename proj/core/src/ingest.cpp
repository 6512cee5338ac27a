#include "driverid/ingest.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "driverid/error.hpp"
#include "internal.hpp"

namespace driverid {

namespace {

constexpr std::string_view kHeader = "t,ax,ay,az,gx,gy,gz";

}  // namespace

bool SensorSample::complete() const {
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (missing(c)) return false;
  }
  return true;
}

bool SensorSample::accel_complete() const { return !missing(0) && !missing(1) && !missing(2); }

bool operator==(const SensorSample& lhs, const SensorSample& rhs) {
  if (lhs.t != rhs.t) return false;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const bool lm = lhs.missing(c);
    if (lm != rhs.missing(c)) return false;
    if (!lm && lhs.values[c] != rhs.values[c]) return false;
  }
  return true;
}

void check_trip(const Trip& trip) {
  if (trip.driver_id.empty()) throw ConfigError("trip has an empty driver id");
  if (!(trip.nominal_rate_hz > 0.0)) throw ConfigError("trip rate must be positive");
  for (std::size_t i = 1; i < trip.samples.size(); ++i) {
    if (!(trip.samples[i].t > trip.samples[i - 1].t)) {
      throw DataError("trip " + trip.driver_id + ": timestamps not strictly increasing at sample " +
                      std::to_string(i));
    }
  }
}

ParsedLog parse_log(std::istream& source, std::string driver_id, double rate_hz) {
  if (driver_id.empty()) throw ConfigError("driver id must be nonempty");
  if (!(rate_hz > 0.0)) throw ConfigError("rate_hz must be positive");

  ParsedLog out;
  out.trip.driver_id = std::move(driver_id);
  out.trip.nominal_rate_hz = rate_hz;

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;

  while (std::getline(source, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (!have_header) {
      if (view.empty()) continue;
      if (view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
      if (view != kHeader) {
        throw ParseError("malformed header at line " + std::to_string(line_no) + ": expected '" +
                         std::string(kHeader) + "'");
      }
      have_header = true;
      continue;
    }
    if (view.empty()) continue;

    auto fields = detail::split(view, ',');
    if (fields.size() != kChannelCount + 1) {
      ++out.rejected_rows;
      out.warnings.push_back("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                             std::to_string(fields.size()));
      continue;
    }
    SensorSample sample;
    if (!detail::parse_double(detail::trim(fields[0]), sample.t) || !std::isfinite(sample.t) ||
        sample.t < 0.0) {
      ++out.rejected_rows;
      out.warnings.push_back("line " + std::to_string(line_no) + ": unparseable timestamp '" +
                             std::string(fields[0]) + "'");
      continue;
    }
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      double v = 0.0;
      if (detail::parse_double(detail::trim(fields[c + 1]), v) && std::isfinite(v)) {
        sample.values[c] = v;
      } else {
        sample.values[c] = SensorSample::missing_value();
      }
    }
    if (!out.trip.samples.empty() && !(sample.t > out.trip.samples.back().t)) {
      throw ParseError("non-monotonic timestamp at line " + std::to_string(line_no));
    }
    out.trip.samples.push_back(sample);
  }

  if (!have_header || (out.trip.samples.empty() && out.rejected_rows == 0)) {
    throw ParseError("empty log");
  }
  return out;
}

ParsedLog read_log_file(const std::filesystem::path& path, std::string driver_id,
                        double rate_hz) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open log " + path.string());
  try {
    return parse_log(in, std::move(driver_id), rate_hz);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_log(std::ostream& sink, const Trip& trip) {
  sink << kHeader << '\n';
  std::string row;
  for (const auto& s : trip.samples) {
    row = detail::format_double(s.t);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      row += ',';
      row += s.missing(c) ? std::string("NaN") : detail::format_double(s.values[c]);
    }
    row += '\n';
    sink << row;
  }
}

void write_log_file(const std::filesystem::path& path, const Trip& trip) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_log(out, trip);
  if (!out) throw DataError("write failed: " + path.string());
}

ValidationReport validate_trip(const Trip& trip) {
  ValidationReport report;
  report.samples = trip.samples.size();
  const double max_dt = 2.0 / trip.nominal_rate_hz;
  for (std::size_t i = 0; i < trip.samples.size(); ++i) {
    if (!trip.samples[i].complete()) ++report.missing;
    if (i > 0 && trip.samples[i].t - trip.samples[i - 1].t > max_dt) ++report.gaps;
  }
  return report;
}

}  // namespace driverid
