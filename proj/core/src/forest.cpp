#include <cmath>
#include <numeric>

#include "driverid/error.hpp"
#include "driverid/models.hpp"
#include "driverid/seed.hpp"
#include "model_internal.hpp"

namespace driverid {

std::vector<std::size_t> RandomForest::votes(std::span<const double> x) const {
  std::vector<std::size_t> v(n_classes, 0);
  for (const auto& t : trees) ++v[t.predict(x)];
  return v;
}

std::size_t RandomForest::predict(std::span<const double> x) const {
  if (trees.empty()) throw DataError("empty random forest");
  const auto v = votes(x);
  return detail::argmax_lowest(v);
}

TrainedModel rf_train(const LabeledDataset& data, const ForestConfig& cfg) {
  if (cfg.n_trees == 0) throw ConfigError("n_trees must be >= 1");
  data.validate_for_training(1);
  detail::notify_training_observer(data);

  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  std::size_t per_split = cfg.features_per_split;
  if (per_split == 0) {
    per_split = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  }
  per_split = std::max<std::size_t>(1, std::min(per_split, d));
  const TreeConfig tree_cfg{cfg.max_depth, cfg.min_leaf};

  RandomForest forest;
  forest.n_classes = data.class_list.size();
  forest.trees.reserve(cfg.n_trees);
  std::uint64_t state = cfg.seed;
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    state = splitmix64(state);
    detail::Rng rng(state);
    std::vector<std::size_t> rows(n);
    if (cfg.bootstrap) {
      for (auto& r : rows) r = rng.index(n);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    forest.trees.push_back(detail::grow_tree(data, rows, tree_cfg, per_split, &rng));
  }

  TrainedModel out;
  out.kind = ModelKind::rforest;
  out.params = std::move(forest);
  out.class_list = data.class_list;
  out.schema = data.schema;
  return out;
}

}  // namespace driverid
