#include "pinoise/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "pinoise/errors.hpp"

namespace pinoise {
namespace {

constexpr double kSumTolerance = 1e-12;

double log_in(double base) {
  if (!(base > 0.0) || base == 1.0) throw InvalidSpecError("log base must be positive and != 1");
  return std::log(base);
}

// -sum p log p in nats with 0 log 0 := 0.
template <typename Range>
double raw_entropy(const Range& probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

void check_probabilities(std::span<const double> probs, const char* what) {
  if (probs.empty()) throw InvalidDistributionError(std::string(what) + " is empty");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InvalidDistributionError(std::string(what) + " has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " sums to " << total << ", not 1";
    throw InvalidDistributionError(msg.str());
  }
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> probabilities,
                                           std::vector<std::string> outcome_labels)
    : probabilities_(std::move(probabilities)), labels_(std::move(outcome_labels)) {
  check_probabilities(probabilities_, "distribution");
  if (!labels_.empty() && labels_.size() != probabilities_.size()) {
    throw InvalidDistributionError("outcome label count differs from outcome count");
  }
}

DiscreteDistribution DiscreteDistribution::uniform(std::size_t outcomes) {
  if (outcomes == 0) throw InvalidDistributionError("uniform over zero outcomes");
  return DiscreteDistribution(
      std::vector<double>(outcomes, 1.0 / static_cast<double>(outcomes)));
}

DiscreteDistribution DiscreteDistribution::point_mass(std::size_t outcomes, std::size_t at) {
  if (at >= outcomes) throw InvalidDistributionError("point mass outside the outcome set");
  std::vector<double> p(outcomes, 0.0);
  p[at] = 1.0;
  return DiscreteDistribution(std::move(p));
}

DiscreteJoint::DiscreteJoint(Matrix table) : table_(std::move(table)) {
  if (table_.size() == 0) throw InvalidDistributionError("joint table is empty");
  check_probabilities(std::span<const double>(table_.data(), static_cast<std::size_t>(table_.size())),
                      "joint table");
}

DiscreteJoint DiscreteJoint::from_counts(const Matrix& counts) {
  if (counts.size() == 0) throw InvalidDistributionError("count table is empty");
  if ((counts.array() < 0.0).any()) throw InvalidDistributionError("negative count");
  const double total = counts.sum();
  if (!(total > 0.0)) throw InvalidDistributionError("count table has zero mass");
  Matrix table = counts / total;
  // Division can leave the sum a few ulps off; push the residue into the largest cell.
  Eigen::Index r = 0, c = 0;
  table.maxCoeff(&r, &c);
  table(r, c) += 1.0 - table.sum();
  return DiscreteJoint(std::move(table));
}

DiscreteJoint DiscreteJoint::product(const DiscreteDistribution& row,
                                     const DiscreteDistribution& col) {
  Matrix table(static_cast<Eigen::Index>(row.size()), static_cast<Eigen::Index>(col.size()));
  for (std::size_t i = 0; i < row.size(); ++i) {
    for (std::size_t j = 0; j < col.size(); ++j) {
      table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          row.probabilities()[i] * col.probabilities()[j];
    }
  }
  return DiscreteJoint(std::move(table));
}

namespace {

DiscreteDistribution renormalized(Vector v) {
  std::vector<double> p(v.data(), v.data() + v.size());
  // Marginal sums of a valid joint can drift by ~1e-16 per cell.
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= total;
  return DiscreteDistribution(std::move(p));
}

}  // namespace

DiscreteDistribution DiscreteJoint::row_marginal() const {
  return renormalized(table_.rowwise().sum());
}

DiscreteDistribution DiscreteJoint::col_marginal() const {
  return renormalized(table_.colwise().sum().transpose());
}

DiscreteJoint DiscreteJoint::transposed() const { return DiscreteJoint(table_.transpose()); }

void to_json(nlohmann::json& j, const DiscreteJoint& joint) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < joint.table().rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(joint.table().cols()));
    for (Eigen::Index c = 0; c < joint.table().cols(); ++c) {
      row[static_cast<std::size_t>(c)] = joint.table()(r, c);
    }
    rows.push_back(std::move(row));
  }
  j = nlohmann::json{{"table", rows}};
}

void from_json(const nlohmann::json& j, DiscreteJoint& joint) {
  const auto rows = j.at("table").get<std::vector<std::vector<double>>>();
  if (rows.empty() || rows.front().empty()) throw InvalidDistributionError("empty joint table");
  Matrix table(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw InvalidDistributionError("ragged joint table");
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  joint = DiscreteJoint(std::move(table));
}

TaskPosterior::TaskPosterior(Matrix rows, std::vector<double> weights)
    : rows_(std::move(rows)), weights_(std::move(weights)) {
  if (rows_.rows() < 1 || rows_.cols() < 1) throw InvalidDistributionError("empty posterior");
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    const Vector row = rows_.row(i).transpose();
    check_probabilities(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                        "posterior row");
  }
  if (weights_.empty()) {
    weights_.assign(static_cast<std::size_t>(rows_.rows()), 1.0 / static_cast<double>(rows_.rows()));
  } else {
    if (weights_.size() != static_cast<std::size_t>(rows_.rows())) {
      throw InvalidDistributionError("posterior weight count differs from row count");
    }
    check_probabilities(weights_, "posterior weights");
  }
}

double MiEstimate::nats() const { return value * std::log(base); }
double MiEstimate::bits() const { return nats() / std::log(2.0); }

void to_json(nlohmann::json& j, const MiEstimate& est) {
  j = nlohmann::json::object();
  j["method"] = est.method == MiMethod::exact ? "exact" : "histogram-plugin";
  j["nats"] = est.nats();
  j["bits"] = est.bits();
  j["raw_nats"] = est.raw_value * std::log(est.base);
  j["clamped"] = est.raw_value < 0.0;
  j["sample_count"] = est.sample_count;
  j["bin_spec"] = est.bin_spec;
}

double entropy(const DiscreteDistribution& p, double base) {
  return raw_entropy(p.probabilities()) / log_in(base);
}

double conditional_entropy(const DiscreteJoint& joint, double base) {
  const double scale = log_in(base);
  // H(x|y) = -sum p(x,y) log p(x|y),  p(x|y) = p(x,y) / p(y)
  const Matrix& t = joint.table();
  const Vector col_mass = t.colwise().sum().transpose();
  double h = 0.0;
  for (Eigen::Index c = 0; c < t.cols(); ++c) {
    if (col_mass(c) <= 0.0) continue;
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      const double pxy = t(r, c);
      if (pxy > 0.0) h -= pxy * std::log(pxy / col_mass(c));
    }
  }
  return std::max(h, 0.0) / scale;
}

MiEstimate mutual_information(const DiscreteJoint& joint, double base) {
  const double scale = log_in(base);
  const double hx = raw_entropy(joint.row_marginal().probabilities());
  const double hx_given_y = conditional_entropy(joint, kNats);
  MiEstimate est;
  est.base = base;
  est.method = MiMethod::exact;
  est.raw_value = (hx - hx_given_y) / scale;
  est.value = std::max(est.raw_value, 0.0);
  est.bin_spec = "exact " + std::to_string(joint.table().rows()) + "x" +
                 std::to_string(joint.table().cols()) + " table";
  return est;
}

double task_entropy(const TaskPosterior& posterior, double base) {
  const double scale = log_in(base);
  const Matrix& rows = posterior.rows();
  double h = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double hi = 0.0;
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const double p = rows(i, c);
      if (p > 0.0) hi -= p * std::log(p);
    }
    h += posterior.weights()[static_cast<std::size_t>(i)] * hi;
  }
  return std::max(h, 0.0) / scale;
}

double expected_task_entropy(std::span<const TaskPosterior> posteriors, double base) {
  if (posteriors.empty()) throw InvalidSpecError("expected task entropy of an empty list");
  double total = 0.0;
  for (const auto& p : posteriors) total += task_entropy(p, base);
  return total / static_cast<double>(posteriors.size());
}

int default_bin_count(std::size_t n) {
  const int b = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
  return std::clamp(b, 1, 64);
}

MiEstimate estimate_mi_histogram(std::span<const int> task_outcomes, const Matrix& noise_samples,
                                 std::optional<int> bins, double base) {
  const auto n = task_outcomes.size();
  if (n == 0) throw InvalidSpecError("histogram MI needs at least one sample");
  if (static_cast<std::size_t>(noise_samples.rows()) != n) {
    throw DimensionError("histogram MI: " + std::to_string(n) + " outcomes vs " +
                         std::to_string(noise_samples.rows()) + " noise rows");
  }
  const auto k = noise_samples.cols();
  if (k < 1 || k > 3) throw DimensionError("histogram MI supports 1 to 3 noise axes");
  const int per_axis = bins.value_or(default_bin_count(n));
  if (per_axis < 1) throw InvalidSpecError("bin count must be >= 1");
  if (static_cast<std::size_t>(per_axis) > n) {
    throw InvalidSpecError("histogram MI needs n >= bins");
  }

  std::ostringstream spec;
  spec << per_axis << " equal-width bins per axis over " << k << " axis(es)";
  std::vector<int> axis_bins(static_cast<std::size_t>(k), per_axis);
  std::vector<double> lo(static_cast<std::size_t>(k)), width(static_cast<std::size_t>(k));
  for (Eigen::Index a = 0; a < k; ++a) {
    const double mn = noise_samples.col(a).minCoeff();
    const double mx = noise_samples.col(a).maxCoeff();
    lo[static_cast<std::size_t>(a)] = mn;
    if (!(mx > mn)) {
      axis_bins[static_cast<std::size_t>(a)] = 1;
      width[static_cast<std::size_t>(a)] = 1.0;
      spec << "; axis " << a << " degenerate (collapsed to 1 bin)";
    } else {
      width[static_cast<std::size_t>(a)] = (mx - mn) / per_axis;
    }
  }

  std::map<int, int> label_index;
  for (int y : task_outcomes) label_index.emplace(y, 0);
  int next = 0;
  for (auto& [label, idx] : label_index) idx = next++;

  long cells = 1;
  for (int b : axis_bins) cells *= b;
  Matrix counts = Matrix::Zero(static_cast<Eigen::Index>(label_index.size()), cells);
  for (std::size_t i = 0; i < n; ++i) {
    long cell = 0;
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto ai = static_cast<std::size_t>(a);
      int b = 0;
      if (axis_bins[ai] > 1) {
        b = static_cast<int>(
            std::floor((noise_samples(static_cast<Eigen::Index>(i), a) - lo[ai]) / width[ai]));
        b = std::clamp(b, 0, axis_bins[ai] - 1);
      }
      cell = cell * axis_bins[ai] + b;
    }
    counts(label_index.at(task_outcomes[i]), cell) += 1.0;
  }

  MiEstimate est = mutual_information(DiscreteJoint::from_counts(counts), base);
  est.method = MiMethod::histogram_plugin;
  est.sample_count = n;
  est.bin_spec = spec.str();
  return est;
}

NoiseClassification classify_noise(const MiEstimate& mi, double alpha) {
  if (!(alpha >= 0.0)) throw InvalidSpecError("alpha must be >= 0");
  NoiseClassification out;
  out.alpha = alpha;
  out.strong = alpha > 0.0;
  out.verdict = mi.value > alpha ? NoiseVerdict::pi_noise : NoiseVerdict::pure_noise;
  return out;
}

std::string_view to_string(NoiseVerdict verdict) {
  return verdict == NoiseVerdict::pi_noise ? "pi-noise" : "pure-noise";
}

}  // namespace pinoise
