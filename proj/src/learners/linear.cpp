#include <algorithm>
#include <cmath>
#include <limits>

#include "pinoise/errors.hpp"
#include "pinoise/learners.hpp"

namespace pinoise {

std::string_view to_string(LinearKind kind) {
  switch (kind) {
    case LinearKind::svm: return "svm";
    case LinearKind::lasso: return "lasso";
    case LinearKind::ridge: return "ridge";
  }
  return "unknown";
}

LinearKind parse_linear_kind(std::string_view text) {
  if (text == "svm") return LinearKind::svm;
  if (text == "lasso") return LinearKind::lasso;
  if (text == "ridge" || text == "dlsr") return LinearKind::ridge;
  throw InvalidSpecError("unknown linear learner '" + std::string(text) + "'");
}

Matrix LinearModel::scores(const Matrix& features) const {
  if (features.cols() != input_dim()) {
    throw DimensionError("model expects " + std::to_string(input_dim()) + " features, got " +
                         std::to_string(features.cols()));
  }
  Matrix s = features * weights.leftCols(input_dim()).transpose();
  s.rowwise() += weights.col(input_dim()).transpose();
  return s;
}

void to_json(nlohmann::json& j, const LinearModel& model) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(model.weights.cols()));
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = model.weights(r, c);
    }
    rows.push_back(std::move(row));
  }
  j = nlohmann::json{{"kind", to_string(model.kind)},
                     {"regularization", model.regularization},
                     {"weights", rows},
                     {"iterations", model.iterations},
                     {"converged", model.converged}};
}

Labels predict(const LinearModel& model, const Matrix& features) {
  const Matrix s = model.scores(features);
  Labels out(static_cast<std::size_t>(s.rows()), 0);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c) {
      if (s(i, c) > s(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

Labels predict(const LinearModel& model, const LabeledDataset& data) {
  return predict(model, data.features);
}

namespace {

void require_multiclass(const LabeledDataset& train, const char* who) {
  train.validate();
  if (train.class_count < 2) {
    throw InvalidSpecError(std::string(who) + " needs at least two classes");
  }
  const auto counts = train.class_counts();
  const auto present = std::count_if(counts.begin(), counts.end(), [](auto n) { return n > 0; });
  if (present < 2) {
    throw InvalidSpecError(std::string(who) + " needs samples from at least two classes");
  }
}

// Weights learned on centered features (w, b) become (w, b - w . mean) on raw ones.
void uncenter(Matrix& weights, const Vector& mean) {
  const Eigen::Index d = mean.size();
  for (Eigen::Index c = 0; c < weights.rows(); ++c) {
    weights(c, d) -= weights.row(c).head(d).dot(mean.transpose());
  }
}

Matrix one_hot(const LabeledDataset& ds) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(ds.rows()), ds.class_count);
  for (std::size_t i = 0; i < ds.rows(); ++i) y(static_cast<Eigen::Index>(i), ds.labels[i]) = 1.0;
  return y;
}

}  // namespace

LinearModel train_svm(const LabeledDataset& train, double c_param, const RngSeed& seed,
                      const SvmOptions& options) {
  require_multiclass(train, "svm");
  if (!(c_param > 0.0)) throw InvalidSpecError("svm C must be > 0");

  const auto n = static_cast<Eigen::Index>(train.rows());
  const auto d = train.features.cols();
  const Vector mean = train.features.colwise().mean().transpose();
  // Augmented, centered design: [x - mean, 1].
  Matrix x(n, d + 1);
  x.leftCols(d) = train.features.rowwise() - mean.transpose();
  x.col(d).setOnes();
  const Vector q = x.rowwise().squaredNorm();

  LinearModel model;
  model.kind = LinearKind::svm;
  model.regularization = c_param;
  model.weights = Matrix::Zero(train.class_count, d + 1);

  Rng rng(seed.child("svm"));
  for (int cls = 0; cls < train.class_count; ++cls) {
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = train.labels[static_cast<std::size_t>(i)] == cls ? 1.0 : -1.0;
    }
    Vector alpha = Vector::Zero(n);
    Vector w = Vector::Zero(d + 1);
    bool done = false;
    int epoch = 0;
    for (; epoch < options.max_epochs && !done; ++epoch) {
      double pg_max = -std::numeric_limits<double>::infinity();
      double pg_min = std::numeric_limits<double>::infinity();
      for (std::size_t k : rng.permutation(static_cast<std::size_t>(n))) {
        const auto i = static_cast<Eigen::Index>(k);
        const double g = y(i) * w.dot(x.row(i)) - 1.0;
        double pg = g;
        if (alpha(i) <= 0.0) {
          pg = std::min(g, 0.0);
        } else if (alpha(i) >= c_param) {
          pg = std::max(g, 0.0);
        }
        pg_max = std::max(pg_max, pg);
        pg_min = std::min(pg_min, pg);
        if (pg != 0.0 && q(i) > 0.0) {
          const double old = alpha(i);
          alpha(i) = std::clamp(old - g / q(i), 0.0, c_param);
          w += ((alpha(i) - old) * y(i)) * x.row(i).transpose();
        }
      }
      done = (pg_max - pg_min) < options.tolerance;
    }
    model.iterations = std::max(model.iterations, epoch);
    model.converged = model.converged && done;
    model.weights.row(cls) = w.transpose();
  }
  uncenter(model.weights, mean);
  return model;
}

LinearModel train_lasso(const LabeledDataset& train, double lambda, const RngSeed& seed,
                        const LassoOptions& options) {
  require_multiclass(train, "lasso");
  if (!(lambda >= 0.0)) throw InvalidSpecError("lasso lambda must be >= 0");

  const auto n = static_cast<Eigen::Index>(train.rows());
  const auto d = train.features.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector mean = train.features.colwise().mean().transpose();
  const Matrix x = train.features.rowwise() - mean.transpose();
  const Vector col_sq = x.colwise().squaredNorm().transpose() * inv_n;
  const Matrix targets = one_hot(train);

  LinearModel model;
  model.kind = LinearKind::lasso;
  model.regularization = lambda;
  model.weights = Matrix::Zero(train.class_count, d + 1);

  Rng rng(seed.child("lasso"));
  for (int cls = 0; cls < train.class_count; ++cls) {
    const double y_mean = targets.col(cls).mean();
    Vector residual = targets.col(cls).array() - y_mean;
    Vector w = Vector::Zero(d);
    bool done = false;
    int sweep = 0;
    for (; sweep < options.max_sweeps && !done; ++sweep) {
      double max_change = 0.0;
      for (std::size_t k : rng.permutation(static_cast<std::size_t>(d))) {
        const auto j = static_cast<Eigen::Index>(k);
        if (col_sq(j) <= 0.0) continue;
        const double rho = inv_n * x.col(j).dot(residual) + col_sq(j) * w(j);
        const double shrunk = std::copysign(std::max(std::abs(rho) - lambda, 0.0), rho);
        const double updated = shrunk / col_sq(j);
        const double delta = updated - w(j);
        if (delta != 0.0) {
          residual -= delta * x.col(j);
          w(j) = updated;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      done = max_change < options.tolerance;
    }
    model.iterations = std::max(model.iterations, sweep);
    model.converged = model.converged && done;
    model.weights.row(cls).head(d) = w.transpose();
    model.weights(cls, d) = y_mean;
  }
  uncenter(model.weights, mean);
  return model;
}

LinearModel train_ridge(const LabeledDataset& train, double lambda) {
  require_multiclass(train, "ridge");
  if (!(lambda >= 0.0)) throw InvalidSpecError("ridge lambda must be >= 0");

  const auto d = train.features.cols();
  const Vector mean = train.features.colwise().mean().transpose();
  const Matrix x = train.features.rowwise() - mean.transpose();
  const Matrix targets = one_hot(train);
  const Vector y_mean = targets.colwise().mean().transpose();
  const Matrix y = targets.rowwise() - y_mean.transpose();

  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  const Matrix rhs = x.transpose() * y;
  Matrix w;
  Eigen::LDLT<Matrix> ldlt(gram);
  const bool singular = ldlt.info() != Eigen::Success ||
                        ldlt.vectorD().cwiseAbs().minCoeff() <=
                            1e-12 * std::max(1.0, ldlt.vectorD().cwiseAbs().maxCoeff());
  if (singular) {
    w = gram.completeOrthogonalDecomposition().solve(rhs);
  } else {
    w = ldlt.solve(rhs);
  }

  LinearModel model;
  model.kind = LinearKind::ridge;
  model.regularization = lambda;
  model.weights.resize(train.class_count, d + 1);
  model.weights.leftCols(d) = w.transpose();
  model.weights.col(d) = y_mean;
  uncenter(model.weights, mean);
  return model;
}

}  // namespace pinoise
