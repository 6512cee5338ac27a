#include <algorithm>
#include <mutex>

#include "driverid/error.hpp"
#include "driverid/models.hpp"
#include "model_internal.hpp"

namespace driverid {

namespace {

std::mutex& observer_mutex() {
  static std::mutex m;
  return m;
}

TrainingObserver& observer_slot() {
  static TrainingObserver obs;
  return obs;
}

template <typename T>
const T& params_as(const TrainedModel& model, ModelKind kind) {
  if (model.kind != kind || !std::holds_alternative<T>(model.params)) {
    throw ConfigError("model is " + std::string(model_kind_name(model.kind)) + ", not " +
                      std::string(model_kind_name(kind)));
  }
  return std::get<T>(model.params);
}

}  // namespace

namespace detail {

void notify_training_observer(const LabeledDataset& data) {
  TrainingObserver obs;
  {
    std::lock_guard lock(observer_mutex());
    obs = observer_slot();
  }
  if (obs) obs(data);
}

}  // namespace detail

void set_training_observer(TrainingObserver observer) {
  std::lock_guard lock(observer_mutex());
  observer_slot() = std::move(observer);
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::knn: return "knn";
    case ModelKind::dtree: return "dtree";
    case ModelKind::rforest: return "rforest";
    case ModelKind::mlp: return "mlp";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  if (name == "knn" || name == "k-nn") return ModelKind::knn;
  if (name == "dtree" || name == "tree") return ModelKind::dtree;
  if (name == "rforest" || name == "rf" || name == "forest") return ModelKind::rforest;
  if (name == "mlp") return ModelKind::mlp;
  return std::nullopt;
}

std::size_t TrainedModel::predict_index(std::span<const double> x) const {
  if (!schema.empty() && x.size() != schema.size()) {
    throw SchemaMismatch("model expects " + std::to_string(schema.size()) +
                         " features, got " + std::to_string(x.size()));
  }
  std::vector<double> z(x.begin(), x.end());
  if (standardizer) standardizer->apply_in_place(z);
  return std::visit([&](const auto& p) -> std::size_t { return p.predict(z); }, params);
}

const std::string& TrainedModel::predict(std::span<const double> x) const {
  const auto i = predict_index(x);
  if (i >= class_list.size()) throw DataError("predicted class index out of range");
  return class_list[i];
}

std::vector<double> TrainedModel::predict_proba(std::span<const double> x) const {
  if (!schema.empty() && x.size() != schema.size()) {
    throw SchemaMismatch("model expects " + std::to_string(schema.size()) +
                         " features, got " + std::to_string(x.size()));
  }
  std::vector<double> z(x.begin(), x.end());
  if (standardizer) standardizer->apply_in_place(z);
  if (const auto* net = std::get_if<MlpNetwork>(&params)) return net->predict_proba(z);
  std::vector<double> out(class_list.size(), 0.0);
  if (const auto* rf = std::get_if<RandomForest>(&params)) {
    const auto v = rf->votes(z);
    for (std::size_t c = 0; c < v.size() && c < out.size(); ++c) {
      out[c] = static_cast<double>(v[c]) / static_cast<double>(rf->trees.size());
    }
    return out;
  }
  const auto i = std::visit([&](const auto& p) -> std::size_t { return p.predict(z); }, params);
  out.at(i) = 1.0;
  return out;
}

TrainedModel train_model(const LabeledDataset& raw_train, const ModelSpec& spec) {
  raw_train.validate_for_training();
  std::vector<std::vector<double>> rows(raw_train.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = raw_train.features.row(i);
    rows[i].assign(r.begin(), r.end());
  }
  Standardizer scaler = Standardizer::fit_rows(rows);
  LabeledDataset scaled = raw_train;
  for (std::size_t i = 0; i < scaled.rows(); ++i) scaler.apply_in_place(scaled.features.row(i));

  TrainedModel model;
  switch (spec.kind) {
    case ModelKind::knn: model = knn_train(scaled, spec.knn_k); break;
    case ModelKind::dtree: model = dtree_train(scaled, spec.tree); break;
    case ModelKind::rforest: model = rf_train(scaled, spec.forest); break;
    case ModelKind::mlp: model = mlp_train(scaled, spec.mlp); break;
  }
  model.standardizer = std::move(scaler);
  return model;
}

const std::string& knn_predict(const TrainedModel& model, std::span<const double> x) {
  params_as<KnnModel>(model, ModelKind::knn);
  return model.predict(x);
}

const std::string& dtree_predict(const TrainedModel& model, std::span<const double> x) {
  params_as<DecisionTree>(model, ModelKind::dtree);
  return model.predict(x);
}

const std::string& rf_predict(const TrainedModel& model, std::span<const double> x) {
  params_as<RandomForest>(model, ModelKind::rforest);
  return model.predict(x);
}

const std::string& mlp_predict(const TrainedModel& model, std::span<const double> x) {
  params_as<MlpNetwork>(model, ModelKind::mlp);
  return model.predict(x);
}

std::vector<double> mlp_predict_proba(const TrainedModel& model, std::span<const double> x) {
  params_as<MlpNetwork>(model, ModelKind::mlp);
  return model.predict_proba(x);
}

void check_schema(const TrainedModel& model, const FeatureSchema& schema) {
  if (model.schema.size() != schema.size()) {
    throw SchemaMismatch("model has " + std::to_string(model.schema.size()) +
                         " features, data has " + std::to_string(schema.size()));
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!(model.schema[i] == schema[i])) {
      throw SchemaMismatch("feature " + std::to_string(i) + " differs: model has '" +
                           model.schema[i].label() + "', data has '" + schema[i].label() + "'");
    }
  }
}

}  // namespace driverid
