#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pinoise/rng.hpp"

namespace pinoise {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

/// Feature matrix (one row per instance) with integer class labels in [0, class_count).
struct LabeledDataset {
  Matrix features;
  Labels labels;
  int class_count = 0;
  std::string name;

  [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  [[nodiscard]] std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws InvalidSpecError unless n, d, c >= 1, labels fit, and features are finite.
  void validate() const;

  /// Rows at the given indices, in the given order.
  [[nodiscard]] LabeledDataset subset(std::span<const std::size_t> indices) const;

  /// Per-class instance counts (length class_count).
  [[nodiscard]] std::vector<std::size_t> class_counts() const;
};

/// Summary echoed into reports: name, n, d, c and per-class counts.
nlohmann::ordered_json dataset_metadata(const LabeledDataset& ds);

/// One multivariate normal component of a synthetic dataset.
struct GaussianBlobSpec {
  Vector mean;
  Matrix covariance;
  std::size_t count = 0;
  int label = 0;

  /// Symmetric within 1e-12 and eigenvalues >= -1e-12; throws InvalidSpecError.
  void validate() const;

  /// Isotropic helper: N(mean, variance * I).
  static GaussianBlobSpec isotropic(std::vector<double> mean, double variance, std::size_t count,
                                    int label);
  static GaussianBlobSpec diagonal(std::vector<double> mean, std::vector<double> variances,
                                   std::size_t count, int label);
};

void to_json(nlohmann::json& j, const GaussianBlobSpec& blob);
void from_json(const nlohmann::json& j, GaussianBlobSpec& blob);

/// Draws `blob.count` rows from N(mean, covariance).
Matrix sample_blob(const GaussianBlobSpec& blob, Rng& rng);

/// Concatenates the blobs in order. Class count is max(label) + 1.
LabeledDataset generate_blobs(std::span<const GaussianBlobSpec> specs, const RngSeed& seed,
                              std::string name = "blobs");

/// Two classes, N([0.3;0.3], 0.01 I) and N([0.7;0.7], 0.01 I), 100 points each.
LabeledDataset make_toy(const RngSeed& seed);

/// Reads a comma-separated file. The label column is categorical and re-encoded to
/// 0..c-1 in order of first appearance; every other column must parse as a real.
LabeledDataset load_csv(const std::filesystem::path& path, std::size_t label_column,
                        bool has_header);

/// Writes features followed by a trailing integer `label` column, with a header row.
void save_csv(const LabeledDataset& ds, const std::filesystem::path& path);

struct SplitSpec {
  double train_fraction = 0.5;
  bool stratified = true;
};

/// Disjoint (train, test) partition. Stratified splits take round-half-up(f * n_c)
/// rows of every class; both partitions keep the original row order.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, const SplitSpec& spec,
                                                const RngSeed& seed);

/// Index form of `split`: (train indices, test indices), each ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const LabeledDataset& ds, const SplitSpec& spec, const RngSeed& seed);

/// Rescales every column to [0, 1]; constant columns map to 0.
LabeledDataset minmax_scale(const LabeledDataset& ds);

/// Appends `extra` below `ds` (same width); class count is the larger of the two.
LabeledDataset concat_rows(const LabeledDataset& ds, const LabeledDataset& extra);

}  // namespace pinoise
