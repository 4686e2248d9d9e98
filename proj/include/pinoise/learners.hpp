#pragma once

#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinoise/dataset.hpp"

namespace pinoise {

enum class LinearKind { svm, lasso, ridge };

std::string_view to_string(LinearKind kind);
LinearKind parse_linear_kind(std::string_view text);

/// Per-class affine scorer. Row c of `weights` is [w_c, b_c]; the prediction is
/// the argmax of x . w_c + b_c with ties going to the lowest class index.
struct LinearModel {
  Matrix weights;  // c x (d + 1), bias in the last column
  LinearKind kind = LinearKind::svm;
  double regularization = 0.0;
  int iterations = 0;
  bool converged = true;

  [[nodiscard]] int class_count() const { return static_cast<int>(weights.rows()); }
  [[nodiscard]] Eigen::Index input_dim() const { return weights.cols() - 1; }
  /// n x c score matrix.
  [[nodiscard]] Matrix scores(const Matrix& features) const;
};

void to_json(nlohmann::json& j, const LinearModel& model);

struct SvmOptions {
  double tolerance = 1e-5;
  int max_epochs = 20000;
};

/// One-versus-rest linear SVM (L2-regularized hinge loss, C-weighted), each binary
/// problem solved by dual coordinate descent until the projected-gradient gap is
/// below `tolerance`. Features are centered internally; the returned weights act on
/// raw features.
LinearModel train_svm(const LabeledDataset& train, double c_param, const RngSeed& seed,
                      const SvmOptions& options = {});

Labels predict(const LinearModel& model, const Matrix& features);
Labels predict(const LinearModel& model, const LabeledDataset& data);

struct LassoOptions {
  double tolerance = 1e-6;  // max absolute coordinate change per sweep
  int max_sweeps = 100000;
};

/// One-hot least squares with an L1 penalty, per class:
///   min_w,b  1/(2n) ||y_c - X w - b||^2 + lambda ||w||_1
/// solved by coordinate descent (coordinates visited in a seeded random order each
/// sweep). The intercept is unpenalized.
LinearModel train_lasso(const LabeledDataset& train, double lambda, const RngSeed& seed,
                        const LassoOptions& options = {});

/// One-hot ridge regression, closed form on centered data:
///   W = (Xc^T Xc + lambda I)^{-1} Xc^T Yc, intercept unpenalized.
/// lambda == 0 falls back to the minimum-norm least-squares solution when the Gram
/// matrix is singular.
LinearModel train_ridge(const LabeledDataset& train, double lambda);

struct KMeansModel {
  Matrix centroids;  // k x d
  double inertia = 0.0;
};

struct KMeansResult {
  KMeansModel model;
  Labels assignments;
  std::vector<double> inertia_history;  // after every assignment step
  int iterations = 0;
};

void to_json(nlohmann::json& j, const KMeansModel& model);

/// k-means++ seeding, then Lloyd iterations until the assignment is a fixpoint or
/// `max_iterations` is reached. Equidistant points go to the lowest centroid index.
KMeansResult kmeans(const LabeledDataset& ds, int k, const RngSeed& seed, int max_iterations = 300);

/// Two-class Fisher discriminant.
struct LdaProjection {
  Vector direction;     // unit length, proportional to Sw^{-1} (mu_0 - mu_1)
  Matrix class_means;   // 2 x d
  double threshold = 0.0;
  bool stabilized = false;  // Sw was singular and a ridge term was added

  [[nodiscard]] Vector project(const Matrix& features) const;
  /// Class 0 on the side of the threshold where mu_0 projects.
  [[nodiscard]] Labels predict(const Matrix& features) const;
};

void to_json(nlohmann::json& j, const LdaProjection& lda);

LdaProjection train_lda(const LabeledDataset& train);

/// Angle in degrees between the lines spanned by a and b, in [0, 90].
double line_angle_degrees(const Vector& a, const Vector& b);

}  // namespace pinoise
