#include "pinoise/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "pinoise/errors.hpp"

namespace pinoise {

void LabeledDataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1) {
    throw InvalidSpecError("dataset '" + name + "' must have at least one row and one column");
  }
  if (class_count < 1) throw InvalidSpecError("dataset '" + name + "' has class_count < 1");
  if (labels.size() != rows()) {
    throw InvalidSpecError("dataset '" + name + "': label count " + std::to_string(labels.size()) +
                           " != row count " + std::to_string(rows()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw InvalidSpecError("dataset '" + name + "': label " + std::to_string(labels[i]) +
                             " at row " + std::to_string(i) + " outside [0, " +
                             std::to_string(class_count) + ")");
    }
  }
  if (!features.allFinite()) {
    throw InvalidSpecError("dataset '" + name + "' contains non-finite feature values");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) =
        features.row(static_cast<Eigen::Index>(indices[r]));
    out.labels.push_back(labels[indices[r]]);
  }
  out.class_count = class_count;
  out.name = name;
  return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(class_count, 0)), 0);
  for (int y : labels) {
    if (y >= 0 && y < class_count) ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

nlohmann::ordered_json dataset_metadata(const LabeledDataset& ds) {
  nlohmann::ordered_json j;
  j["name"] = ds.name;
  j["samples"] = ds.rows();
  j["features"] = ds.cols();
  j["classes"] = ds.class_count;
  j["class_counts"] = ds.class_counts();
  return j;
}

void GaussianBlobSpec::validate() const {
  const auto d = mean.size();
  if (d < 1) throw InvalidSpecError("blob mean must have at least one coordinate");
  if (covariance.rows() != d || covariance.cols() != d) {
    throw InvalidSpecError("blob covariance must be " + std::to_string(d) + "x" +
                           std::to_string(d));
  }
  if (!mean.allFinite() || !covariance.allFinite()) {
    throw InvalidSpecError("blob parameters must be finite");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidSpecError("blob covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw InvalidSpecError("blob covariance is not positive semidefinite");
  }
  if (label < 0) throw InvalidSpecError("blob label must be non-negative");
}

GaussianBlobSpec GaussianBlobSpec::isotropic(std::vector<double> mean, double variance,
                                             std::size_t count, int label) {
  std::vector<double> vars(mean.size(), variance);
  return diagonal(std::move(mean), std::move(vars), count, label);
}

GaussianBlobSpec GaussianBlobSpec::diagonal(std::vector<double> mean,
                                            std::vector<double> variances, std::size_t count,
                                            int label) {
  if (mean.size() != variances.size()) {
    throw InvalidSpecError("blob mean and variance lengths differ");
  }
  GaussianBlobSpec blob;
  blob.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  blob.covariance = Matrix::Zero(blob.mean.size(), blob.mean.size());
  for (std::size_t i = 0; i < variances.size(); ++i) {
    blob.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = variances[i];
  }
  blob.count = count;
  blob.label = label;
  return blob;
}

void to_json(nlohmann::json& j, const GaussianBlobSpec& blob) {
  std::vector<double> mean(blob.mean.data(), blob.mean.data() + blob.mean.size());
  std::vector<std::vector<double>> cov;
  for (Eigen::Index r = 0; r < blob.covariance.rows(); ++r) {
    std::vector<double> row;
    for (Eigen::Index c = 0; c < blob.covariance.cols(); ++c) row.push_back(blob.covariance(r, c));
    cov.push_back(std::move(row));
  }
  j = nlohmann::json{{"mean", mean}, {"covariance", cov}, {"count", blob.count},
                     {"label", blob.label}};
}

void from_json(const nlohmann::json& j, GaussianBlobSpec& blob) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  blob.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  const auto& cov = j.at("covariance");
  const auto d = blob.mean.size();
  blob.covariance = Matrix::Zero(d, d);
  if (cov.is_array() && !cov.empty() && cov.front().is_number()) {
    // A flat list is read as the diagonal.
    const auto diag = cov.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(diag.size()) != d) {
      throw InvalidSpecError("blob covariance diagonal length mismatch");
    }
    for (Eigen::Index i = 0; i < d; ++i) blob.covariance(i, i) = diag[static_cast<std::size_t>(i)];
  } else {
    const auto rows = cov.get<std::vector<std::vector<double>>>();
    if (static_cast<Eigen::Index>(rows.size()) != d) {
      throw InvalidSpecError("blob covariance row count mismatch");
    }
    for (Eigen::Index r = 0; r < d; ++r) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != d) {
        throw InvalidSpecError("blob covariance column count mismatch");
      }
      for (Eigen::Index c = 0; c < d; ++c) {
        blob.covariance(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      }
    }
  }
  blob.count = j.at("count").get<std::size_t>();
  blob.label = j.at("label").get<int>();
}

Matrix sample_blob(const GaussianBlobSpec& blob, Rng& rng) {
  blob.validate();
  const auto d = blob.mean.size();
  // covariance = V diag(l) V^T, so V diag(sqrt(l)) maps standard normals onto the blob.
  // This also covers singular (e.g. all-zero) covariances that Cholesky rejects.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(blob.covariance);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix transform = eig.eigenvectors() * root.asDiagonal();
  Matrix out(static_cast<Eigen::Index>(blob.count), d);
  Vector z(d);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < d; ++c) z(c) = rng.normal();
    out.row(r) = (blob.mean + transform * z).transpose();
  }
  return out;
}

LabeledDataset generate_blobs(std::span<const GaussianBlobSpec> specs, const RngSeed& seed,
                              std::string name) {
  if (specs.empty()) throw InvalidSpecError("generate_blobs needs at least one blob");
  const auto d = specs.front().mean.size();
  std::size_t total = 0;
  int max_label = 0;
  for (const auto& s : specs) {
    s.validate();
    if (s.mean.size() != d) throw InvalidSpecError("blobs have different dimensions");
    if (s.count < 1) throw InvalidSpecError("blob count must be >= 1");
    total += s.count;
    max_label = std::max(max_label, s.label);
  }
  LabeledDataset ds;
  ds.name = std::move(name);
  ds.class_count = max_label + 1;
  ds.features.resize(static_cast<Eigen::Index>(total), d);
  ds.labels.reserve(total);
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < specs.size(); ++b) {
    Rng rng(seed.child("blob" + std::to_string(b)));
    const Matrix part = sample_blob(specs[b], rng);
    ds.features.middleRows(row, part.rows()) = part;
    row += part.rows();
    ds.labels.insert(ds.labels.end(), specs[b].count, specs[b].label);
  }
  return ds;
}

LabeledDataset make_toy(const RngSeed& seed) {
  const std::vector<GaussianBlobSpec> blobs{
      GaussianBlobSpec::isotropic({0.3, 0.3}, 0.01, 100, 0),
      GaussianBlobSpec::isotropic({0.7, 0.7}, 0.01, 100, 1),
  };
  return generate_blobs(blobs, seed, "toy");
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool parse_real(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, std::size_t label_column,
                        bool has_header) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split_fields(line);
    if (width == 0) {
      width = fields.size();
      if (label_column >= width) {
        throw IngestionError("row " + std::to_string(line_no) + ": label column " +
                             std::to_string(label_column) + " out of range for " +
                             std::to_string(width) + " columns");
      }
      if (width < 2) {
        throw IngestionError("row " + std::to_string(line_no) +
                             ": need at least one feature column besides the label");
      }
    } else if (fields.size() != width) {
      throw IngestionError("row " + std::to_string(line_no) + ": expected " +
                           std::to_string(width) + " columns, found " +
                           std::to_string(fields.size()));
    }
    std::vector<double> values;
    values.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_column) {
        if (fields[c].empty()) {
          throw IngestionError("row " + std::to_string(line_no) + ", column " +
                               std::to_string(c) + ": empty label");
        }
        raw_labels.push_back(fields[c]);
        continue;
      }
      double v = 0.0;
      if (!parse_real(fields[c], v)) {
        throw IngestionError("row " + std::to_string(line_no) + ", column " + std::to_string(c) +
                             ": cannot parse '" + fields[c] + "' as a real");
      }
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw IngestionError("'" + path.string() + "' contains no data rows");

  LabeledDataset ds;
  ds.name = path.stem().string();
  ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(width - 1));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c + 1 < width; ++c) {
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  std::map<std::string, int> codes;
  for (const auto& raw : raw_labels) {
    auto [it, inserted] = codes.emplace(raw, static_cast<int>(codes.size()));
    ds.labels.push_back(it->second);
  }
  ds.class_count = static_cast<int>(codes.size());
  return ds;
}

void save_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (Eigen::Index c = 0; c < ds.features.cols(); ++c) out << 'x' << c << ',';
  out << "label\n";
  char buf[64];
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
      auto res = std::to_chars(buf, buf + sizeof(buf), ds.features(r, c));
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    out << ds.labels[static_cast<std::size_t>(r)] << '\n';
  }
}

namespace {

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const LabeledDataset& ds, const SplitSpec& spec, const RngSeed& seed) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw SplitError("train_fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  if (spec.stratified) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.class_count));
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      const auto& members = by_class[c];
      if (members.empty()) continue;
      if (members.size() < 2) {
        throw SplitError("class " + std::to_string(c) +
                         " has a single sample; stratified split needs at least 2");
      }
      const auto take = round_half_up(spec.train_fraction * static_cast<double>(members.size()));
      const auto perm = rng.permutation(members.size());
      for (std::size_t k = 0; k < perm.size(); ++k) {
        (k < take ? train : test).push_back(members[perm[k]]);
      }
    }
  } else {
    const auto take = round_half_up(spec.train_fraction * static_cast<double>(ds.rows()));
    const auto perm = rng.permutation(ds.rows());
    for (std::size_t k = 0; k < perm.size(); ++k) (k < take ? train : test).push_back(perm[k]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, const SplitSpec& spec,
                                                const RngSeed& seed) {
  const auto [train_idx, test_idx] = split_indices(ds, spec, seed);
  auto train = ds.subset(train_idx);
  auto test = ds.subset(test_idx);
  train.name = ds.name + "/train";
  test.name = ds.name + "/test";
  return {std::move(train), std::move(test)};
}

LabeledDataset minmax_scale(const LabeledDataset& ds) {
  LabeledDataset out = ds;
  for (Eigen::Index c = 0; c < out.features.cols(); ++c) {
    const double lo = out.features.col(c).minCoeff();
    const double hi = out.features.col(c).maxCoeff();
    if (hi > lo) {
      out.features.col(c) = (out.features.col(c).array() - lo) / (hi - lo);
    } else {
      out.features.col(c).setZero();
    }
  }
  return out;
}

LabeledDataset concat_rows(const LabeledDataset& ds, const LabeledDataset& extra) {
  if (extra.rows() == 0) return ds;
  if (extra.features.cols() != ds.features.cols()) {
    throw DimensionError("cannot append rows of width " + std::to_string(extra.cols()) +
                         " to a dataset of width " + std::to_string(ds.cols()));
  }
  LabeledDataset out;
  out.name = ds.name;
  out.class_count = std::max(ds.class_count, extra.class_count);
  out.features.resize(ds.features.rows() + extra.features.rows(), ds.features.cols());
  out.features.topRows(ds.features.rows()) = ds.features;
  out.features.bottomRows(extra.features.rows()) = extra.features;
  out.labels = ds.labels;
  out.labels.insert(out.labels.end(), extra.labels.begin(), extra.labels.end());
  return out;
}

}  // namespace pinoise
