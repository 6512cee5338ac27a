#pragma once

#include <cstddef>
#include <span>

#include "driverid/models.hpp"
#include "internal.hpp"

namespace driverid::detail {

void notify_training_observer(const LabeledDataset& data);

/// CART growth on the given rows (duplicates allowed). With `rng` set, each
/// node scans `features_per_split` randomly chosen features first.
DecisionTree grow_tree(const LabeledDataset& data, std::span<const std::size_t> rows,
                       const TreeConfig& cfg, std::size_t features_per_split, Rng* rng);

std::size_t argmax_lowest(std::span<const std::size_t> counts);

}  // namespace driverid::detail
