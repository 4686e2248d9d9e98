#pragma once

#include "pinoise/dataset.hpp"

namespace pinoise {

struct PcaResult {
  LabeledDataset projected;  // n x k scores of the centered data
  Matrix projection;         // d x k, orthonormal columns
  Vector explained_variance; // length k, non-increasing
  Vector mean;               // length d, subtracted before projecting
};

/// Principal components from the eigendecomposition of the sample covariance.
/// Each component is signed so that its largest-magnitude entry is non-negative.
/// Throws DimensionError unless 1 <= k <= d.
PcaResult pca_project(const LabeledDataset& ds, std::size_t k);

}  // namespace pinoise
