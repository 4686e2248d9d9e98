#pragma once

#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinoise/dataset.hpp"

namespace pinoise {

/// Logarithm bases. Values are computed in nats internally and converted.
inline constexpr double kNats = std::numbers::e;
inline constexpr double kBits = 2.0;

/// Probability vector over a finite outcome set. Entries >= 0 and sum to 1 within 1e-12.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::vector<double> probabilities,
                                std::vector<std::string> outcome_labels = {});

  static DiscreteDistribution uniform(std::size_t outcomes);
  static DiscreteDistribution point_mass(std::size_t outcomes, std::size_t at);

  [[nodiscard]] const std::vector<double>& probabilities() const { return probabilities_; }
  [[nodiscard]] const std::vector<std::string>& outcome_labels() const { return labels_; }
  [[nodiscard]] std::size_t size() const { return probabilities_.size(); }

 private:
  std::vector<double> probabilities_;
  std::vector<std::string> labels_;
};

/// Joint probability table; rows index the first variable, columns the second.
class DiscreteJoint {
 public:
  explicit DiscreteJoint(Matrix table);
  /// Normalizes a table of non-negative counts.
  static DiscreteJoint from_counts(const Matrix& counts);
  static DiscreteJoint product(const DiscreteDistribution& row, const DiscreteDistribution& col);

  [[nodiscard]] const Matrix& table() const { return table_; }
  [[nodiscard]] DiscreteDistribution row_marginal() const;
  [[nodiscard]] DiscreteDistribution col_marginal() const;
  [[nodiscard]] DiscreteJoint transposed() const;

 private:
  Matrix table_;
};

void to_json(nlohmann::json& j, const DiscreteJoint& joint);
void from_json(const nlohmann::json& j, DiscreteJoint& joint);

/// p(Y | X = x_i) for n instances (rows) over c classes, with instance weights.
class TaskPosterior {
 public:
  /// Uniform weights when `weights` is empty.
  explicit TaskPosterior(Matrix rows, std::vector<double> weights = {});

  [[nodiscard]] const Matrix& rows() const { return rows_; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }

 private:
  Matrix rows_;
  std::vector<double> weights_;
};

enum class MiMethod { exact, histogram_plugin };

struct MiEstimate {
  double value = 0.0;      // in `base` units, clamped at 0
  double raw_value = 0.0;  // before clamping
  double base = kNats;
  MiMethod method = MiMethod::exact;
  std::size_t sample_count = 0;  // 0 for exact
  std::string bin_spec;

  [[nodiscard]] double nats() const;
  [[nodiscard]] double bits() const;
};

void to_json(nlohmann::json& j, const MiEstimate& est);

double entropy(const DiscreteDistribution& p, double base = kNats);

/// H(row variable | column variable).
double conditional_entropy(const DiscreteJoint& joint, double base = kNats);

/// H(row) - H(row | column), clamped at zero.
MiEstimate mutual_information(const DiscreteJoint& joint, double base = kNats);

/// Weighted mean of the per-instance label entropies.
double task_entropy(const TaskPosterior& posterior, double base = kNats);

/// Mean task entropy over posteriors of independently sampled datasets. This is
/// the Monte Carlo estimate of the expected task entropy, which coincides with
/// the conditional entropy H(Y | X) of the generating model.
double expected_task_entropy(std::span<const TaskPosterior> posteriors, double base = kNats);

/// ceil(n^(1/3)), capped at 64 and at least 1.
int default_bin_count(std::size_t n);

/// Plug-in MI between integer task outcomes and up to three noise axes, each
/// binned into `bins` equal-width cells between its observed min and max.
/// An axis with max == min collapses to a single bin and is flagged in bin_spec.
MiEstimate estimate_mi_histogram(std::span<const int> task_outcomes, const Matrix& noise_samples,
                                 std::optional<int> bins = std::nullopt, double base = kNats);

enum class NoiseVerdict { pi_noise, pure_noise };

struct NoiseClassification {
  NoiseVerdict verdict = NoiseVerdict::pure_noise;
  double alpha = 0.0;
  /// True for an alpha-strong verdict (alpha > 0); alpha == 0 is the plain definition.
  bool strong = false;
};

/// pi-noise iff mi.value > alpha, pure noise otherwise (the boundary is pure).
NoiseClassification classify_noise(const MiEstimate& mi, double alpha = 0.0);

std::string_view to_string(NoiseVerdict verdict);

}  // namespace pinoise
