#pragma once

#include <cstdint>
#include <string_view>

namespace driverid {

/// Named sub-seed derived from a master seed (FNV-1a of the name mixed
/// through splitmix64). Stable across platforms and releases.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage);

/// One splitmix64 step.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace driverid
