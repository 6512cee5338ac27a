#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "driverid/dataset.hpp"
#include "driverid/features.hpp"

namespace driverid {

enum class ModelKind { knn, dtree, rforest, mlp };

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

// ---------------------------------------------------------------------------
// k-nearest neighbours

struct KnnModel {
  std::size_t k = 5;
  Matrix train;
  std::vector<std::size_t> labels;
  std::size_t n_classes = 0;

  /// Majority label among the k smallest Euclidean distances. Distance ties
  /// go to the lower row index, vote ties to the lower class index.
  std::size_t predict(std::span<const double> x) const;
};

// ---------------------------------------------------------------------------
// CART decision tree

struct TreeConfig {
  std::size_t max_depth = 0;  ///< 0 = unlimited
  std::size_t min_leaf = 1;
};

struct TreeNode {
  int feature = -1;  ///< -1 for a leaf
  double threshold = 0.0;
  int left = -1;     ///< taken when x[feature] <= threshold
  int right = -1;
  std::size_t label = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  ///< nodes[0] is the root

  std::size_t predict(std::span<const double> x) const;
  std::size_t depth() const;
  bool operator==(const DecisionTree&) const = default;
};

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;
  std::size_t min_leaf = 1;
  std::size_t features_per_split = 0;  ///< 0 = ceil(sqrt(dims))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::size_t n_classes = 0;

  std::vector<std::size_t> votes(std::span<const double> x) const;
  std::size_t predict(std::span<const double> x) const;
};

// ---------------------------------------------------------------------------
// Multilayer perceptron

enum class Activation { relu, tanh };
enum class Optimizer { adam, sgd };

std::string_view activation_name(Activation a);
std::optional<Activation> parse_activation(std::string_view name);
std::string_view optimizer_name(Optimizer o);
std::optional<Optimizer> parse_optimizer(std::string_view name);

struct MlpConfig {
  std::vector<std::size_t> hidden_layers{100};
  Activation activation = Activation::relu;
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t early_stop_patience = 20;
  double validation_fraction = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Fully connected network with a softmax output. Layer l maps
/// `weights[l].cols()` inputs to `weights[l].rows()` outputs.
struct MlpNetwork {
  Activation activation = Activation::relu;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  /// Scaled-uniform (Glorot) weights, zero biases.
  static MlpNetwork init(std::span<const std::size_t> layer_sizes, Activation activation,
                         std::uint64_t seed);

  std::vector<std::size_t> layer_sizes() const;
  std::size_t input_size() const { return static_cast<std::size_t>(weights.front().cols()); }
  std::size_t output_size() const { return static_cast<std::size_t>(weights.back().rows()); }
  std::size_t parameter_count() const;

  /// Class probabilities, one column per input column.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;
  /// Mean cross-entropy of the columns of `inputs` against `labels`.
  double loss(const Eigen::MatrixXd& inputs, std::span<const std::size_t> labels) const;
  /// Mean cross-entropy and its gradient, flattened in flatten() order.
  double loss_and_gradient(const Eigen::MatrixXd& inputs, std::span<const std::size_t> labels,
                           std::vector<double>& gradient) const;

  /// Parameters as W0 (column-major), b0, W1, b1, ...
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);

  std::vector<double> predict_proba(std::span<const double> x) const;
  std::size_t predict(std::span<const double> x) const;
};

struct MlpTrainingLog {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_monitor_loss = 0.0;   ///< validation loss, or training loss without validation
  std::size_t validation_rows = 0;
};

// ---------------------------------------------------------------------------
// Trained model container

struct TrainedModel {
  ModelKind kind = ModelKind::knn;
  std::variant<KnnModel, DecisionTree, RandomForest, MlpNetwork> params;
  std::optional<Standardizer> standardizer;
  std::vector<std::string> class_list;
  FeatureSchema schema;

  /// Predicted class index. Applies the standardizer when present. Throws
  /// SchemaMismatch when `x` has the wrong dimension.
  std::size_t predict_index(std::span<const double> x) const;
  const std::string& predict(std::span<const double> x) const;
  /// Softmax output for MLP; vote fractions / one-hot for the others.
  std::vector<double> predict_proba(std::span<const double> x) const;
};

struct ModelSpec {
  ModelKind kind = ModelKind::mlp;
  std::size_t knn_k = 5;
  TreeConfig tree;
  ForestConfig forest;
  MlpConfig mlp;

  std::string name() const { return std::string(model_kind_name(kind)); }
};

/// Trainers expect already-standardized features (the returned model has no
/// standardizer). All rows must be tagged train.
TrainedModel knn_train(const LabeledDataset& data, std::size_t k);
TrainedModel dtree_train(const LabeledDataset& data, const TreeConfig& cfg);
TrainedModel rf_train(const LabeledDataset& data, const ForestConfig& cfg);
TrainedModel mlp_train(const LabeledDataset& data, const MlpConfig& cfg,
                       MlpTrainingLog* log = nullptr);

/// Fits a Standardizer on `raw_train`, trains the requested classifier on the
/// standardized rows and attaches the standardizer to the result.
TrainedModel train_model(const LabeledDataset& raw_train, const ModelSpec& spec);

const std::string& knn_predict(const TrainedModel& model, std::span<const double> x);
const std::string& dtree_predict(const TrainedModel& model, std::span<const double> x);
const std::string& rf_predict(const TrainedModel& model, std::span<const double> x);
const std::string& mlp_predict(const TrainedModel& model, std::span<const double> x);
std::vector<double> mlp_predict_proba(const TrainedModel& model, std::span<const double> x);

/// Throws SchemaMismatch unless `schema` equals the model's schema.
void check_schema(const TrainedModel& model, const FeatureSchema& schema);

// ---------------------------------------------------------------------------
// Persistence (JSON container, see docs/model-format.md)

inline constexpr int kModelFormatVersion = 1;

void save_model(std::ostream& sink, const TrainedModel& model);
void save_model_file(const std::filesystem::path& path, const TrainedModel& model);
/// Throws ParseError on malformed/truncated input, SchemaMismatch when the
/// stored parameters disagree with the stored schema, or when `expected`
/// is given and differs.
TrainedModel load_model(std::istream& source, const FeatureSchema* expected = nullptr);
TrainedModel load_model_file(const std::filesystem::path& path,
                             const FeatureSchema* expected = nullptr);

// ---------------------------------------------------------------------------
// Instrumentation

/// Called with every dataset handed to a trainer (before fitting).
using TrainingObserver = std::function<void(const LabeledDataset&)>;
/// Installs a process-wide observer; pass an empty function to remove it.
void set_training_observer(TrainingObserver observer);

}  // namespace driverid
