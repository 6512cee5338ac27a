#include <algorithm>
#include <numeric>

#include "driverid/error.hpp"
#include "driverid/models.hpp"
#include "model_internal.hpp"

namespace driverid {

namespace detail {

std::size_t argmax_lowest(std::span<const std::size_t> counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return best;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;
  std::size_t left_count = 0;
};

class TreeGrower {
 public:
  TreeGrower(const LabeledDataset& data, const TreeConfig& cfg, std::size_t per_split, Rng* rng)
      : data_(data), cfg_(cfg), per_split_(per_split), rng_(rng),
        n_classes_(data.class_list.size()) {
    all_features_.resize(data.cols());
    std::iota(all_features_.begin(), all_features_.end(), 0);
  }

  DecisionTree grow(std::vector<std::size_t> rows) {
    DecisionTree tree;
    build(tree, rows, 0);
    return tree;
  }

 private:
  int build(DecisionTree& tree, std::vector<std::size_t>& rows, std::size_t depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    std::vector<std::size_t> counts(n_classes_, 0);
    for (auto r : rows) ++counts[data_.labels[r]];
    tree.nodes[id].label = argmax_lowest(counts);

    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || (cfg_.max_depth != 0 && depth >= cfg_.max_depth) ||
        rows.size() < 2 * cfg_.min_leaf) {
      return id;
    }

    const Split split = find_split(rows);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    left.reserve(split.left_count);
    right.reserve(rows.size() - split.left_count);
    for (auto r : rows) {
      (data_.features(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[id].feature = split.feature;
    tree.nodes[id].threshold = split.threshold;
    const int l = build(tree, left, depth + 1);
    const int r = build(tree, right, depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  Split find_split(const std::vector<std::size_t>& rows) {
    Split best;
    if (rng_ == nullptr || per_split_ >= all_features_.size()) {
      scan(rows, all_features_, best);
      return best;
    }
    std::vector<std::size_t> order = all_features_;
    rng_->shuffle(std::span<std::size_t>(order));
    // Sampled block first; fall back to the remaining features only when the
    // sampled ones admit no valid split.
    for (std::size_t begin = 0; begin < order.size() && best.feature < 0; begin += per_split_) {
      const std::size_t end = std::min(order.size(), begin + per_split_);
      std::vector<std::size_t> block(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
      std::sort(block.begin(), block.end());
      scan(rows, block, best);
    }
    return best;
  }

  void scan(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& features,
            Split& best) {
    const std::size_t n = rows.size();
    std::vector<std::pair<double, std::size_t>> sorted(n);
    std::vector<std::size_t> left(n_classes_), right(n_classes_);
    for (auto f : features) {
      for (std::size_t i = 0; i < n; ++i) sorted[i] = {data_.features(rows[i], f), rows[i]};
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;

      std::fill(left.begin(), left.end(), 0);
      std::fill(right.begin(), right.end(), 0);
      for (auto r : rows) ++right[data_.labels[r]];
      double sum_left = 0.0;
      double sum_right = 0.0;
      for (auto c : right) sum_right += static_cast<double>(c) * static_cast<double>(c);

      for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t c = data_.labels[sorted[i].second];
        const auto lc = static_cast<double>(left[c]);
        const auto rc = static_cast<double>(right[c]);
        sum_left += 2.0 * lc + 1.0;
        sum_right -= 2.0 * rc - 1.0;
        ++left[c];
        --right[c];
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (sorted[i].first == sorted[i + 1].first) continue;
        if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
        const double score =
            sum_left / static_cast<double>(nl) + sum_right / static_cast<double>(nr);
        if (score > best.score) {
          const double a = sorted[i].first;
          const double b = sorted[i + 1].first;
          double thr = a + (b - a) / 2.0;
          if (!(thr >= a && thr < b)) thr = a;
          best.feature = static_cast<int>(f);
          best.threshold = thr;
          best.score = score;
          best.left_count = nl;
        }
      }
    }
  }

  const LabeledDataset& data_;
  TreeConfig cfg_;
  std::size_t per_split_;
  Rng* rng_;
  std::size_t n_classes_;
  std::vector<std::size_t> all_features_;
};

}  // namespace

DecisionTree grow_tree(const LabeledDataset& data, std::span<const std::size_t> rows,
                       const TreeConfig& cfg, std::size_t features_per_split, Rng* rng) {
  if (cfg.min_leaf == 0) throw ConfigError("min_leaf must be >= 1");
  if (rows.empty()) throw DataError("cannot grow a tree on zero rows");
  TreeGrower grower(data, cfg, features_per_split, rng);
  return grower.grow(std::vector<std::size_t>(rows.begin(), rows.end()));
}

}  // namespace detail

std::size_t DecisionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) throw DataError("empty decision tree");
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto f = static_cast<std::size_t>(nodes[i].feature);
    if (f >= x.size()) throw SchemaMismatch("tree input has the wrong dimension");
    i = static_cast<std::size_t>(x[f] <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
  }
  return nodes[i].label;
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return deepest;
}

TrainedModel dtree_train(const LabeledDataset& data, const TreeConfig& cfg) {
  data.validate_for_training(1);
  detail::notify_training_observer(data);
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), 0);
  TrainedModel out;
  out.kind = ModelKind::dtree;
  out.params = detail::grow_tree(data, rows, cfg, data.cols(), nullptr);
  out.class_list = data.class_list;
  out.schema = data.schema;
  return out;
}

}  // namespace driverid
