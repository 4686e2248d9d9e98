#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace pinoise {

/// A root seed plus a stream path such as "exp3/trial7".
///
/// Every stochastic operation draws from the stream derived from both parts,
/// so adding a new experiment (a new label) never perturbs existing ones.
struct RngSeed {
  std::uint64_t seed = 0;
  std::string stream_label;

  /// Appends "/<part>" to the stream label.
  [[nodiscard]] RngSeed child(std::string_view part) const;

  /// Stable 64-bit key for the (seed, stream_label) pair.
  [[nodiscard]] std::uint64_t derived_key() const;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

/// Deterministic generator. The sampling routines are implemented here
/// rather than through <random> distributions, whose output is
/// implementation-defined, so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(const RngSeed& seed);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double low, double high);
  /// Standard normal (Marsaglia polar method).
  double normal();
  double normal(double mean, double stddev);
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool coin();

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);
  /// `count` distinct indices from 0..n-1, sorted ascending.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pinoise
