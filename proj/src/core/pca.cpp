#include "pinoise/pca.hpp"

#include "pinoise/errors.hpp"

namespace pinoise {

PcaResult pca_project(const LabeledDataset& ds, std::size_t k) {
  const auto d = ds.features.cols();
  if (k < 1 || static_cast<Eigen::Index>(k) > d) {
    throw DimensionError("pca target dimension " + std::to_string(k) + " outside [1, " +
                         std::to_string(d) + "]");
  }
  const auto n = ds.features.rows();
  if (n < 1) throw DimensionError("pca needs at least one row");

  PcaResult out;
  out.mean = ds.features.colwise().mean().transpose();
  const Matrix centered = ds.features.rowwise() - out.mean.transpose();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Matrix cov = (centered.transpose() * centered) / denom;

  // Eigen returns ascending eigenvalues; walk them from the top.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const auto kk = static_cast<Eigen::Index>(k);
  out.projection.resize(d, kk);
  out.explained_variance.resize(kk);
  for (Eigen::Index i = 0; i < kk; ++i) {
    const Eigen::Index src = d - 1 - i;
    Vector component = eig.eigenvectors().col(src);
    Eigen::Index argmax = 0;
    component.cwiseAbs().maxCoeff(&argmax);
    if (component(argmax) < 0.0) component = -component;
    out.projection.col(i) = component;
    out.explained_variance(i) = std::max(eig.eigenvalues()(src), 0.0);
  }

  out.projected.features = centered * out.projection;
  out.projected.labels = ds.labels;
  out.projected.class_count = ds.class_count;
  out.projected.name = ds.name + "/pca" + std::to_string(k);
  return out;
}

}  // namespace pinoise
