#include "driverid/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "driverid/error.hpp"

namespace driverid {

void LabeledDataset::validate() const {
  if (features.data.size() != features.rows * features.cols) {
    throw DataError("feature matrix storage does not match its shape");
  }
  if (labels.size() != features.rows || partitions.size() != features.rows) {
    throw DataError("dataset has " + std::to_string(features.rows) + " rows but " +
                    std::to_string(labels.size()) + " labels and " +
                    std::to_string(partitions.size()) + " partition tags");
  }
  if (!schema.empty() && schema.size() != features.cols) {
    throw SchemaMismatch("dataset schema has " + std::to_string(schema.size()) +
                         " entries but " + std::to_string(features.cols) + " columns");
  }
  for (auto label : labels) {
    if (label >= class_list.size()) throw DataError("label index out of range");
  }
  for (double v : features.data) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
}

void LabeledDataset::validate_for_training(std::size_t min_classes) const {
  validate();
  for (auto p : partitions) {
    if (p != Partition::train) throw DataError("test-partition row passed to a trainer");
  }
  std::set<std::size_t> present(labels.begin(), labels.end());
  if (present.size() < min_classes) {
    throw DataError("training needs at least " + std::to_string(min_classes) +
                    " drivers, got " + std::to_string(present.size()));
  }
}

std::vector<std::string> class_list_of(std::span<const FeatureVector> vectors) {
  std::set<std::string> ids;
  for (const auto& v : vectors) ids.insert(v.driver_id);
  return {ids.begin(), ids.end()};
}

LabeledDataset LabeledDataset::from_vectors(std::span<const FeatureVector> vectors,
                                            std::vector<std::string> class_list) {
  LabeledDataset ds;
  if (class_list.empty()) {
    class_list = class_list_of(vectors);
  } else {
    std::sort(class_list.begin(), class_list.end());
    class_list.erase(std::unique(class_list.begin(), class_list.end()), class_list.end());
  }
  ds.class_list = std::move(class_list);
  if (vectors.empty()) return ds;

  if (vectors.front().schema) ds.schema = *vectors.front().schema;
  const std::size_t d = vectors.front().values.size();
  ds.features = Matrix(vectors.size(), d);
  ds.labels.reserve(vectors.size());
  ds.partitions.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& v = vectors[i];
    if (v.values.size() != d) {
      throw SchemaMismatch("feature vectors have different dimensions");
    }
    std::copy(v.values.begin(), v.values.end(), ds.features.row(i).begin());
    auto it = std::lower_bound(ds.class_list.begin(), ds.class_list.end(), v.driver_id);
    if (it == ds.class_list.end() || *it != v.driver_id) {
      throw DataError("driver '" + v.driver_id + "' is not in the class list");
    }
    ds.labels.push_back(static_cast<std::size_t>(it - ds.class_list.begin()));
    ds.partitions.push_back(v.partition);
  }
  return ds;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> row_indices) const {
  LabeledDataset out;
  out.class_list = class_list;
  out.schema = schema;
  out.features = Matrix(row_indices.size(), features.cols);
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    const auto r = row_indices[i];
    if (r >= features.rows) throw DataError("subset row index out of range");
    auto src = features.row(r);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels[r]);
    out.partitions.push_back(partitions[r]);
  }
  return out;
}

}  // namespace driverid
