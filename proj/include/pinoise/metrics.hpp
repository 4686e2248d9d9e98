#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pinoise/dataset.hpp"

namespace pinoise {

/// Fraction of positions where predicted == truth.
double classification_accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Best classification accuracy over one-to-one maps from clusters to labels.
/// Enumerates every injective map when max(k, c) <= 8, otherwise solves the
/// assignment problem with the Hungarian method.
double clustering_accuracy(std::span<const int> assignments, std::span<const int> truth, int k);

/// Minimum-cost perfect assignment on a rectangular cost matrix (rows <= cols
/// or cols <= rows). Returns, for each row, the assigned column or -1.
std::vector<int> hungarian_assignment(const Matrix& cost);

}  // namespace pinoise
