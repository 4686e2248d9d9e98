#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinoise/entropy.hpp"
#include "pinoise/rng.hpp"

namespace pinoise {

/// Threshold detector observing y_t = f(t) on a discrete time grid.
///
/// Amplitudes in [floor, ceiling] are split into `amplitude_bins` equal cells.
/// At a time where the signal is detected (value >= threshold) the observation
/// is a point mass on the cell holding the value; elsewhere nothing is seen and
/// every cell is equally likely. Time is uniform over the grid.
struct SrModel {
  std::vector<double> time_grid;
  std::vector<double> signal;
  double threshold = 1.0;
  double floor = 0.0;
  double ceiling = 2.0;
  int amplitude_bins = 64;
  double noise_sigma = 0.0;
  std::size_t mc_draws = 1000;

  /// Throws InvalidSpecError unless floor < threshold <= ceiling, bins >= 2, the
  /// grid is strictly increasing and matches the signal length, and sigma >= 0.
  void validate() const;

  /// f(t) = value on `points` times in [0, 1).
  static SrModel constant(double value, std::size_t points, double threshold, double floor,
                          double ceiling);
  /// f(t) = offset + amplitude * sin(2 pi cycles t) on `points` times in [0, 1).
  static SrModel sine(double offset, double amplitude, double cycles, std::size_t points,
                      double threshold, double floor, double ceiling);
};

void to_json(nlohmann::json& j, const SrModel& model);
void from_json(const nlohmann::json& j, SrModel& model);

/// Cell index of `value`; values outside [floor, ceiling] clip to the end cells.
int amplitude_bin(const SrModel& model, double value);

/// Observation distribution at grid index t when the sensor sees f(t) + offset.
DiscreteDistribution observation_distribution(const SrModel& model, std::size_t t,
                                              double offset = 0.0);

/// Fraction of grid points with f(t) >= threshold.
double suprathreshold_fraction(const SrModel& model);

/// H(T_SR) = H(y_t | t) in nats.
double sr_base_entropy(const SrModel& model);

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// H(T_SR | eps) in nats, Monte Carlo over eps ~ N(0, sigma^2) with mc_draws
/// draws at every grid point. The standard error treats the grid as fixed
/// strata; each per-point crossing rate is Laplace-smoothed before its
/// Bernoulli variance is taken, so a stratum with no crossings still
/// contributes a non-zero error.
McEstimate sr_conditional_entropy(const SrModel& model, const RngSeed& seed);

struct SrEntropyReport {
  double sigma = 0.0;
  double h_unconditioned = 0.0;
  double h_conditioned = 0.0;
  double mi = 0.0;
  double standard_error = 0.0;
  double mc_tolerance = 0.0;  // 3 x standard_error
  double supra_fraction = 0.0;
};

void to_json(nlohmann::json& j, const SrEntropyReport& report);

/// One report per sigma, each with its own derived stream "sigma<i>".
std::vector<SrEntropyReport> sr_sigma_sweep(const SrModel& model, std::span<const double> sigmas,
                                            const RngSeed& seed);

}  // namespace pinoise
