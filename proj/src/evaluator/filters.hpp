#pragma once

#include <cstddef>
#include <string>

#include "kernel/matrix.hpp"

namespace poselift::evaluator {

enum class FilterKind { kMean, kMedian };

FilterKind parse_filter_kind(const std::string& name);

// Centered moving mean/median per coordinate with stride 1 over the rows of
// `frames`. Windows are truncated at the sequence ends. `window` must be odd.
kernel::Matrix filter_baseline(const kernel::Matrix& frames, FilterKind kind, std::size_t window = 5);

}  // namespace poselift::evaluator
