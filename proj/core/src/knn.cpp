#include <algorithm>
#include <numeric>

#include "driverid/error.hpp"
#include "driverid/models.hpp"
#include "model_internal.hpp"

namespace driverid {

std::size_t KnnModel::predict(std::span<const double> x) const {
  if (train.rows == 0) throw DataError("k-NN model has no training rows");
  if (x.size() != train.cols) throw SchemaMismatch("k-NN input has the wrong dimension");
  std::vector<std::pair<double, std::size_t>> dist(train.rows);
  for (std::size_t i = 0; i < train.rows; ++i) {
    auto r = train.row(i);
    double d = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = r[j] - x[j];
      d += diff * diff;
    }
    dist[i] = {d, i};
  }
  const std::size_t kk = std::min(k, train.rows);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  std::vector<std::size_t> votes(n_classes, 0);
  for (std::size_t i = 0; i < kk; ++i) ++votes[labels[dist[i].second]];
  return detail::argmax_lowest(votes);
}

TrainedModel knn_train(const LabeledDataset& data, std::size_t k) {
  if (k == 0) throw ConfigError("k must be >= 1");
  data.validate_for_training(1);
  if (k > data.rows()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds the " + std::to_string(data.rows()) +
                      " training rows");
  }
  detail::notify_training_observer(data);
  KnnModel m;
  m.k = k;
  m.train = data.features;
  m.labels = data.labels;
  m.n_classes = data.class_list.size();
  TrainedModel out;
  out.kind = ModelKind::knn;
  out.params = std::move(m);
  out.class_list = data.class_list;
  out.schema = data.schema;
  return out;
}

}  // namespace driverid
