#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinoise/dataset.hpp"

namespace pinoise {

enum class NoiseKind { multiplicative, gaussian, uniform, dimension, instance };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

/// Value domain of the raw features, e.g. [0, 255] for 8-bit pixels.
struct ValueRange {
  double min_value = 0.0;
  double max_value = 1.0;

  void validate() const;
  /// Column-agnostic range spanning every feature of the dataset.
  static ValueRange of(const LabeledDataset& ds);
};

/// One noise model and its parameters. Only the fields relevant to `kind` are read:
///   multiplicative: degree (salt-and-pepper fraction), ratio
///   gaussian:       mu, sigma, ratio
///   uniform:        low, high, ratio
///   dimension:      m
///   instance:       blob
struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double degree = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double low = 0.0;
  double high = 1.0;
  int m = 1;
  double ratio = 1.0;
  std::optional<GaussianBlobSpec> blob;
  std::optional<ValueRange> range;  // defaults to ValueRange::of(dataset)
  RngSeed seed;

  void validate() const;
  /// Short identifier used in report rows, e.g. "gaussian(mu=0.5,sigma=0.5)".
  [[nodiscard]] std::string label() const;
};

void to_json(nlohmann::json& j, const NoiseSpec& spec);
void from_json(const nlohmann::json& j, NoiseSpec& spec);

/// round(ratio * n) distinct row indices drawn uniformly without replacement, ascending.
std::vector<std::size_t> select_noisy_rows(std::size_t n, double ratio, const RngSeed& seed);

/// Multiplicative (salt-and-pepper) noise. In each selected row every coordinate is,
/// with probability `degree`, replaced by range.min_value or range.max_value (50/50).
LabeledDataset apply_salt_pepper(const LabeledDataset& ds, double degree, const ValueRange& range,
                                 double ratio, const RngSeed& seed);

/// Additive Gaussian noise on the [0,1]-normalized scale, clipped, mapped back to `range`.
LabeledDataset apply_gaussian(const LabeledDataset& ds, double mu, double sigma,
                              const ValueRange& range, double ratio, const RngSeed& seed);

/// Same pipeline as apply_gaussian with noise drawn from U(low, high).
LabeledDataset apply_uniform(const LabeledDataset& ds, double low, double high,
                             const ValueRange& range, double ratio, const RngSeed& seed);

/// Dimension noise: every row u becomes [u, sgn(P u)] for one P in [0,1)^{m x d}.
LabeledDataset apply_dimension_noise(const LabeledDataset& ds, int m, const RngSeed& seed);

/// The random matrix apply_dimension_noise uses for (m, d, seed).
Matrix dimension_noise_matrix(int m, Eigen::Index d, const RngSeed& seed);

/// Appends blob.count rows drawn from `blob`, labelled blob.label.
LabeledDataset inject_instances(const LabeledDataset& ds, const GaussianBlobSpec& blob,
                                const RngSeed& seed);

/// Dispatches on spec.kind.
LabeledDataset apply_noise(const LabeledDataset& ds, const NoiseSpec& spec);

}  // namespace pinoise
