#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "driverid/eval.hpp"
#include "internal.hpp"
#include "json.hpp"

namespace driverid {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_number(double v) { return std::isfinite(v) ? detail::format_double(v) : ""; }

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

RenderedReport render_report(std::span<const GridRow> rows, bool complete) {
  RenderedReport out;

  std::ostringstream csv;
  csv << "window_minutes,overlap,features,model,mean_accuracy,std,note\n";
  for (const auto& r : rows) {
    csv << detail::format_double(r.window_minutes) << ',' << detail::format_double(r.overlap)
        << ',' << csv_field(r.features) << ',' << csv_field(r.model) << ','
        << csv_number(r.mean_accuracy) << ',' << csv_number(r.std) << ',' << csv_field(r.note)
        << '\n';
  }
  out.csv = csv.str();

  nlohmann::ordered_json j;
  j["complete"] = complete;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json e;
    e["cell_index"] = r.cell_index;
    e["window_minutes"] = r.window_minutes;
    e["overlap"] = r.overlap;
    e["features"] = r.features;
    e["model"] = r.model;
    e["mean_accuracy"] = number_or_null(r.mean_accuracy);
    e["std"] = number_or_null(r.std);
    e["accuracies"] = r.accuracies;
    e["seeds"] = r.seeds;
    e["note"] = r.note;
    arr.push_back(std::move(e));
  }
  j["rows"] = arr;
  out.json = j.dump(2) + "\n";

  const std::vector<std::string> header{"Window (min)", "Overlap (%)", "Features", "Model",
                                        "Accuracy (%)", "Std (%)", "Note"};
  std::vector<std::vector<std::string>> table;
  for (const auto& r : rows) {
    table.push_back({detail::format_double(r.window_minutes), fixed(r.overlap * 100.0, 0),
                     r.features, r.model, fixed(r.mean_accuracy * 100.0, 1),
                     fixed(r.std * 100.0, 1), r.note});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : table) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream text;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      s += cells[c];
      if (c + 1 < cells.size()) s += std::string(width[c] - cells[c].size() + 2, ' ');
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    text << s << '\n';
  };
  line(header);
  if (!complete) text << "(partial report: sweep interrupted)\n";
  for (const auto& row : table) line(row);
  out.text = text.str();
  return out;
}

}  // namespace driverid
