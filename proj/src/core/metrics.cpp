#include "pinoise/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "pinoise/errors.hpp"

namespace pinoise {

double classification_accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw DimensionError("accuracy: " + std::to_string(predicted.size()) + " predictions vs " +
                         std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw DimensionError("accuracy of an empty label vector");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<int> hungarian_assignment(const Matrix& cost) {
  // Classic potentials formulation (e-maxx), on a square padding of the input.
  const auto rows = static_cast<int>(cost.rows());
  const auto cols = static_cast<int>(cost.cols());
  const int n = std::max(rows, cols);
  const double inf = std::numeric_limits<double>::infinity();
  auto at = [&](int i, int j) { return (i < rows && j < cols) ? cost(i, j) : 0.0; };

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(rows), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] >= 1 && p[j] <= rows && j <= cols) assignment[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  return assignment;
}

namespace {

// Exhaustive search over injective maps from k clusters into c labels
// (or the reverse when k > c, which is the same contingency-table matching).
double best_matching_bruteforce(const Matrix& counts) {
  const bool flip = counts.rows() > counts.cols();
  const Matrix table = flip ? Matrix(counts.transpose()) : counts;
  const auto r = static_cast<int>(table.rows());
  const auto c = static_cast<int>(table.cols());
  std::vector<int> cols(static_cast<std::size_t>(c));
  std::iota(cols.begin(), cols.end(), 0);
  double best = 0.0;
  // Permutations of all columns; the first r entries give the injective map.
  do {
    double total = 0.0;
    for (int i = 0; i < r; ++i) total += table(i, cols[static_cast<std::size_t>(i)]);
    best = std::max(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

}  // namespace

double clustering_accuracy(std::span<const int> assignments, std::span<const int> truth, int k) {
  if (assignments.size() != truth.size()) {
    throw DimensionError("clustering accuracy: " + std::to_string(assignments.size()) +
                         " assignments vs " + std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw DimensionError("clustering accuracy of an empty label vector");
  if (k < 1) throw DimensionError("cluster count must be >= 1");
  int c = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (assignments[i] < 0 || assignments[i] >= k) {
      throw DimensionError("assignment " + std::to_string(assignments[i]) + " outside [0, " +
                           std::to_string(k) + ")");
    }
    if (truth[i] < 0) throw DimensionError("negative label");
    c = std::max(c, truth[i] + 1);
  }
  Matrix counts = Matrix::Zero(k, c);
  for (std::size_t i = 0; i < truth.size(); ++i) counts(assignments[i], truth[i]) += 1.0;

  double matched = 0.0;
  if (std::max(k, c) <= 8) {
    matched = best_matching_bruteforce(counts);
  } else {
    const auto assignment = hungarian_assignment(-counts);
    for (int i = 0; i < k; ++i) {
      const int j = assignment[static_cast<std::size_t>(i)];
      if (j >= 0) matched += counts(i, j);
    }
  }
  return matched / static_cast<double>(truth.size());
}

}  // namespace pinoise
