#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "cli/cli.hpp"

namespace driverid::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

}  // namespace

Manifest parse_manifest(std::istream& source, const std::filesystem::path& base_dir,
                        std::string name) {
  Manifest m;
  m.name = std::move(name);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::set<std::filesystem::path> seen;
  while (std::getline(source, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = fields(t);
    if (!header) {
      if (f != std::vector<std::string>{"path", "driver_id", "rate_hz"}) {
        throw ConfigError("manifest header must be 'path,driver_id,rate_hz'");
      }
      header = true;
      continue;
    }
    const std::string where = "manifest line " + std::to_string(line_no);
    if (f.size() != 3) throw ConfigError(where + ": expected 3 fields");
    if (f[0].empty()) throw ConfigError(where + ": empty path");
    if (f[1].empty()) throw ConfigError(where + ": empty driver_id");
    double rate = 0.0;
    try {
      std::size_t used = 0;
      rate = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError(where + ": bad rate_hz '" + f[2] + "'");
    }
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError(where + ": rate_hz must be > 0");
    std::filesystem::path p(f[0]);
    if (p.is_relative()) p = base_dir / p;
    p = p.lexically_normal();
    if (!seen.insert(p).second) throw ConfigError(where + ": duplicate path " + f[0]);
    m.entries.push_back({p, f[1], rate});
  }
  if (!header) throw ConfigError("manifest is empty");
  if (m.entries.empty()) throw ConfigError("manifest lists no logs");
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path(), path.stem().string());
}

void write_manifest(std::ostream& sink, const Manifest& manifest,
                    const std::filesystem::path& base_dir) {
  sink << "path,driver_id,rate_hz\n";
  for (const auto& e : manifest.entries) {
    auto rel = e.path.lexically_relative(base_dir);
    if (rel.empty()) rel = e.path;
    char rate[32];
    std::snprintf(rate, sizeof(rate), "%g", e.rate_hz);
    sink << rel.generic_string() << ',' << e.driver_id << ',' << rate << '\n';
  }
}

}  // namespace driverid::cli
