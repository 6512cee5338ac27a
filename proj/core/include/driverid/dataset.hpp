#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "driverid/features.hpp"

namespace driverid {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }

  bool operator==(const Matrix&) const = default;
};

/// Feature rows with integer labels indexing `class_list`.
struct LabeledDataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_list;  ///< sorted, distinct
  FeatureSchema schema;
  std::vector<Partition> partitions;

  std::size_t rows() const { return features.rows; }
  std::size_t cols() const { return features.cols; }

  /// Row/label/partition counts agree, labels in range, values finite.
  void validate() const;
  /// validate() plus: every row tagged train and at least `min_classes`
  /// distinct labels present. The individual trainers accept one class
  /// (a constant predictor); train_model() insists on two drivers.
  void validate_for_training(std::size_t min_classes = 2) const;

  /// Builds a dataset from feature vectors. When `class_list` is empty it is
  /// derived from the vectors' labels; otherwise every label must be in it.
  static LabeledDataset from_vectors(std::span<const FeatureVector> vectors,
                                     std::vector<std::string> class_list = {});

  LabeledDataset subset(std::span<const std::size_t> row_indices) const;
};

/// Sorted distinct labels.
std::vector<std::string> class_list_of(std::span<const FeatureVector> vectors);

}  // namespace driverid
