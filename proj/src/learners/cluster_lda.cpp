#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

#include "pinoise/errors.hpp"
#include "pinoise/learners.hpp"

namespace pinoise {

void to_json(nlohmann::json& j, const KMeansModel& model) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < model.centroids.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(model.centroids.cols()));
    for (Eigen::Index c = 0; c < model.centroids.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = model.centroids(r, c);
    }
    rows.push_back(std::move(row));
  }
  j = nlohmann::json{{"centroids", rows}, {"inertia", model.inertia}};
}

namespace {

Matrix kmeans_plus_plus(const Matrix& x, int k, Rng& rng) {
  const auto n = x.rows();
  Matrix centroids(k, x.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  centroids.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  Vector nearest = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (nearest(i) <= 0.0) continue;
        pick = i;
        target -= nearest(i);
        if (target < 0.0) break;
      }
    } else {
      // Every point coincides with a centroid already; take any unused row.
      std::vector<Eigen::Index> unused;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) unused.push_back(i);
      }
      pick = unused[static_cast<std::size_t>(rng.below(unused.size()))];
    }
    centroids.row(c) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    nearest = nearest.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

double assign(const Matrix& x, const Matrix& centroids, Labels& out) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    double best_d = (x.row(i) - centroids.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const double dist = (x.row(i) - centroids.row(c)).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    inertia += best_d;
  }
  return inertia;
}

}  // namespace

KMeansResult kmeans(const LabeledDataset& ds, int k, const RngSeed& seed, int max_iterations) {
  if (ds.features.rows() < 1 || ds.features.cols() < 1) {
    throw InvalidSpecError("kmeans needs a non-empty dataset");
  }
  if (k < 1) throw InvalidSpecError("kmeans needs k >= 1");
  if (static_cast<std::size_t>(k) > ds.rows()) {
    throw InvalidSpecError("kmeans k = " + std::to_string(k) + " exceeds n = " +
                           std::to_string(ds.rows()));
  }
  const Matrix& x = ds.features;
  Rng rng(seed.child("kmeans++"));

  KMeansResult result;
  result.model.centroids = kmeans_plus_plus(x, k, rng);
  result.assignments.assign(ds.rows(), -1);
  Labels next(ds.rows(), 0);

  for (int iter = 0; iter < max_iterations; ++iter) {
    const double inertia = assign(x, result.model.centroids, next);
    assert(result.inertia_history.empty() || inertia <= result.inertia_history.back() + 1e-9);
    result.inertia_history.push_back(inertia);
    result.model.inertia = inertia;
    result.iterations = iter + 1;
    if (next == result.assignments) break;
    result.assignments = next;

    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int c = result.assignments[static_cast<std::size_t>(i)];
      sums.row(c) += x.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      // An empty cluster keeps its previous centroid.
      if (counts[static_cast<std::size_t>(c)] > 0) {
        result.model.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
  }
  return result;
}

Vector LdaProjection::project(const Matrix& features) const {
  if (features.cols() != direction.size()) {
    throw DimensionError("lda expects " + std::to_string(direction.size()) + " features, got " +
                         std::to_string(features.cols()));
  }
  return features * direction;
}

Labels LdaProjection::predict(const Matrix& features) const {
  const Vector z = project(features);
  Labels out(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[static_cast<std::size_t>(i)] = z(i) >= threshold ? 0 : 1;
  }
  return out;
}

void to_json(nlohmann::json& j, const LdaProjection& lda) {
  j = nlohmann::json{
      {"direction", std::vector<double>(lda.direction.data(), lda.direction.data() + lda.direction.size())},
      {"threshold", lda.threshold},
      {"stabilized", lda.stabilized}};
}

LdaProjection train_lda(const LabeledDataset& train) {
  train.validate();
  if (train.class_count != 2) throw InvalidSpecError("lda supports exactly two classes");
  const auto counts = train.class_counts();
  if (counts[0] < 2 || counts[1] < 2) {
    throw InvalidSpecError("lda needs at least two samples in each class");
  }
  const auto d = train.features.cols();
  LdaProjection out;
  out.class_means = Matrix::Zero(2, d);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    out.class_means.row(train.labels[i]) += train.features.row(static_cast<Eigen::Index>(i));
  }
  out.class_means.row(0) /= static_cast<double>(counts[0]);
  out.class_means.row(1) /= static_cast<double>(counts[1]);

  Matrix within = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const Vector centered =
        (train.features.row(static_cast<Eigen::Index>(i)) - out.class_means.row(train.labels[i]))
            .transpose();
    within.noalias() += centered * centered.transpose();
  }

  const Vector diff = (out.class_means.row(0) - out.class_means.row(1)).transpose();
  if (diff.norm() == 0.0) throw InvalidSpecError("lda class means coincide");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(within, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() <= 1e-10 * std::max(top, std::numeric_limits<double>::min())) {
    // Ridge relative to the average scatter keeps the direction scale-invariant.
    const double ridge = 1e-6 * std::max(within.trace() / static_cast<double>(d), 1e-300);
    within.diagonal().array() += ridge;
    out.stabilized = true;
  }
  Vector dir = within.ldlt().solve(diff);
  out.direction = dir / dir.norm();
  out.threshold = 0.5 * (out.class_means.row(0) + out.class_means.row(1)).dot(out.direction.transpose());
  return out;
}

double line_angle_degrees(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("angle between vectors of different length");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw InvalidSpecError("angle with a zero vector");
  const double cosine = std::clamp(std::abs(a.dot(b)) / (na * nb), 0.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

}  // namespace pinoise
