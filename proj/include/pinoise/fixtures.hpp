#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "pinoise/dataset.hpp"

namespace pinoise {

/// Binary "image" task with a label-correlated background that only exists in
/// the training distribution.
///
/// Each row has `foreground_pixels` pixels per class: the block of the row's own
/// class is lit (1.0) independently with probability `foreground_on`, the other
/// block is dark. The remaining `background_pixels` share one brightness level,
/// 0.1 or 0.3, plus N(0, background_jitter^2), clipped to [0, 1]. In training
/// data the level equals the class with probability `spurious_correlation`; in
/// test data it is a fair coin.
struct NuisanceBackgroundSpec {
  std::size_t train_count = 100;
  std::size_t test_count = 1000;
  int foreground_pixels = 3;
  int background_pixels = 16;
  double foreground_on = 0.5;
  double spurious_correlation = 0.9;
  double background_jitter = 0.05;
};

void to_json(nlohmann::json& j, const NuisanceBackgroundSpec& spec);
void from_json(const nlohmann::json& j, NuisanceBackgroundSpec& spec);

std::pair<LabeledDataset, LabeledDataset> make_nuisance_background(
    const NuisanceBackgroundSpec& spec, const RngSeed& seed);

/// Standard normal points in the plane; class 1 is the wedge where both
/// n1 . x > 0 and n2 . x > 0, with unit normals at the given angles (degrees).
/// Not linearly separable, but the wedge is an intersection of two half-planes
/// through the origin.
struct SectorSpec {
  std::size_t count = 400;
  double normal_angle_a = 20.0;
  double normal_angle_b = 70.0;
};

void to_json(nlohmann::json& j, const SectorSpec& spec);
void from_json(const nlohmann::json& j, SectorSpec& spec);

LabeledDataset make_sector(const SectorSpec& spec, const RngSeed& seed);

/// Two noisy concentric circles of radius 1 and 2 (alternating labels).
LabeledDataset make_rings(std::size_t count, double jitter, const RngSeed& seed);

/// Shape of a public benchmark table entry (samples, features, classes).
struct DatasetShape {
  std::string name;
  std::size_t samples = 0;
  std::size_t features = 0;
  int classes = 0;
};

/// Iris, Wine, Cars, Balance, Australian, Breast, Diabetes (case-insensitive).
std::optional<DatasetShape> benchmark_shape(std::string_view name);

/// Offline stand-in with the given shape: equal-sized (up to rounding) Gaussian
/// classes with unit covariance and class means drawn from N(0, I).
LabeledDataset make_shape_fallback(const DatasetShape& shape, const RngSeed& seed);

}  // namespace pinoise
