#include <cmath>

#include "driverid/error.hpp"
#include "driverid/features.hpp"

namespace driverid {

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> stddev,
                           std::size_t fitted_rows)
    : mean_(std::move(mean)), stddev_(std::move(stddev)), fitted_rows_(fitted_rows) {
  if (mean_.size() != stddev_.size()) throw SchemaMismatch("standardizer mean/std length mismatch");
  for (auto& s : stddev_) {
    if (!(s >= kStdFloor)) s = kStdFloor;
  }
}

Standardizer Standardizer::fit(std::span<const FeatureVector> train) {
  std::vector<std::vector<double>> rows;
  rows.reserve(train.size());
  for (const auto& v : train) {
    if (v.partition != Partition::train) {
      throw DataError("standardizer fit received a test-partition vector");
    }
    rows.push_back(v.values);
  }
  return fit_rows(rows);
}

Standardizer Standardizer::fit_rows(std::span<const std::vector<double>> rows) {
  if (rows.size() < 2) throw DataError("standardizer needs at least 2 training vectors");
  const std::size_t d = rows.front().size();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (const auto& r : rows) {
    if (r.size() != d) throw SchemaMismatch("training vectors have different dimensions");
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
  }
  const double n = static_cast<double>(rows.size());
  for (auto& m : mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) var[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
  }
  std::vector<double> sd(d);
  for (std::size_t j = 0; j < d; ++j) sd[j] = std::sqrt(var[j] / n);
  return Standardizer(std::move(mean), std::move(sd), rows.size());
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  apply_in_place(out);
  return out;
}

void Standardizer::apply_in_place(std::span<double> x) const {
  if (x.size() != mean_.size()) {
    throw SchemaMismatch("standardizer expects " + std::to_string(mean_.size()) +
                         " dimensions, got " + std::to_string(x.size()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean_[j]) / stddev_[j];
}

}  // namespace driverid
