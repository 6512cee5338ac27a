#include "driverid/eval.hpp"

#include <algorithm>
#include <ostream>

#include "driverid/error.hpp"
#include "internal.hpp"
#include "json.hpp"

namespace driverid {

EvaluationReport score_predictions(std::vector<std::string> class_list,
                                   std::span<const std::size_t> truth,
                                   std::span<const std::size_t> predicted) {
  if (truth.size() != predicted.size()) {
    throw DataError("truth and prediction counts differ");
  }
  if (truth.empty()) throw DataError("empty test set");
  const std::size_t c = class_list.size();
  EvaluationReport r;
  r.class_list = std::move(class_list);
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= c || predicted[i] >= c) throw DataError("class index out of range");
    ++r.confusion[truth[i]][predicted[i]];
    if (truth[i] == predicted[i]) ++correct;
  }
  r.n_test_windows = truth.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  r.per_class_recall.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t row = 0;
    for (auto v : r.confusion[k]) row += v;
    if (row > 0) r.per_class_recall[k] = static_cast<double>(r.confusion[k][k]) / static_cast<double>(row);
  }
  return r;
}

EvaluationReport evaluate(const TrainedModel& model, const LabeledDataset& test) {
  if (test.rows() == 0) throw DataError("empty test set");
  test.validate();
  if (!test.schema.empty()) check_schema(model, test.schema);
  std::vector<std::size_t> truth, predicted;
  truth.reserve(test.rows());
  predicted.reserve(test.rows());
  for (std::size_t i = 0; i < test.rows(); ++i) {
    const auto& id = test.class_list[test.labels[i]];
    auto it = std::find(model.class_list.begin(), model.class_list.end(), id);
    if (it == model.class_list.end()) {
      throw DataError("test driver '" + id + "' is unknown to the model");
    }
    truth.push_back(static_cast<std::size_t>(it - model.class_list.begin()));
    predicted.push_back(model.predict_index(test.features.row(i)));
  }
  return score_predictions(model.class_list, truth, predicted);
}

void write_evaluation_csv(std::ostream& sink, const EvaluationReport& report) {
  sink << "true\\predicted";
  for (const auto& c : report.class_list) sink << ',' << c;
  sink << ",recall\n";
  for (std::size_t i = 0; i < report.class_list.size(); ++i) {
    sink << report.class_list[i];
    for (auto v : report.confusion[i]) sink << ',' << v;
    sink << ',';
    if (report.per_class_recall[i]) sink << detail::format_double(*report.per_class_recall[i]);
    sink << '\n';
  }
}

void write_evaluation_json(std::ostream& sink, const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["n_test_windows"] = report.n_test_windows;
  j["class_list"] = report.class_list;
  j["confusion"] = report.confusion;
  auto recall = nlohmann::ordered_json::array();
  for (const auto& r : report.per_class_recall) {
    recall.push_back(r ? nlohmann::ordered_json(*r) : nlohmann::ordered_json(nullptr));
  }
  j["per_class_recall"] = recall;
  j["config"] = report.config_snapshot.empty()
                    ? nlohmann::ordered_json(nullptr)
                    : nlohmann::ordered_json::parse(report.config_snapshot);
  sink << j.dump(2) << '\n';
}

}  // namespace driverid
