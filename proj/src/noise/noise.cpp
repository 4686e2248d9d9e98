#include "pinoise/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>

#include "pinoise/errors.hpp"

namespace pinoise {

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::multiplicative: return "multiplicative";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::dimension: return "dimension";
    case NoiseKind::instance: return "instance";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "multiplicative" || text == "salt-pepper" || text == "salt_pepper") {
    return NoiseKind::multiplicative;
  }
  if (text == "gaussian") return NoiseKind::gaussian;
  if (text == "uniform") return NoiseKind::uniform;
  if (text == "dimension") return NoiseKind::dimension;
  if (text == "instance") return NoiseKind::instance;
  throw InvalidSpecError("unknown noise kind '" + std::string(text) + "'");
}

void ValueRange::validate() const {
  if (!(std::isfinite(min_value) && std::isfinite(max_value) && max_value > min_value)) {
    throw InvalidSpecError("value range needs finite max_value > min_value");
  }
}

ValueRange ValueRange::of(const LabeledDataset& ds) {
  ValueRange r{ds.features.minCoeff(), ds.features.maxCoeff()};
  if (!(r.max_value > r.min_value)) r.max_value = r.min_value + 1.0;
  return r;
}

namespace {

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InvalidSpecError(std::string(what) + " must lie in [0, 1]");
  }
}

std::string fmt(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

void NoiseSpec::validate() const {
  check_unit(ratio, "noise ratio");
  if (range) range->validate();
  switch (kind) {
    case NoiseKind::multiplicative:
      check_unit(degree, "salt-and-pepper degree");
      break;
    case NoiseKind::gaussian:
      if (!(sigma >= 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
        throw InvalidSpecError("gaussian noise needs finite mu and sigma >= 0");
      }
      break;
    case NoiseKind::uniform:
      if (!(high > low) || !std::isfinite(low) || !std::isfinite(high)) {
        throw InvalidSpecError("uniform noise needs finite high > low");
      }
      break;
    case NoiseKind::dimension:
      if (m < 1) throw InvalidSpecError("dimension noise needs m >= 1");
      break;
    case NoiseKind::instance:
      if (!blob) throw InvalidSpecError("instance noise needs a blob");
      blob->validate();
      break;
  }
}

std::string NoiseSpec::label() const {
  switch (kind) {
    case NoiseKind::multiplicative: return "multiplicative(degree=" + fmt(degree) + ")";
    case NoiseKind::gaussian: return "gaussian(mu=" + fmt(mu) + ",sigma=" + fmt(sigma) + ")";
    case NoiseKind::uniform: return "uniform(a=" + fmt(low) + ",b=" + fmt(high) + ")";
    case NoiseKind::dimension: return "dimension(m=" + std::to_string(m) + ")";
    case NoiseKind::instance:
      return "instance(count=" + std::to_string(blob ? blob->count : 0) + ")";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const NoiseSpec& spec) {
  j = nlohmann::json::object();
  j["kind"] = to_string(spec.kind);
  switch (spec.kind) {
    case NoiseKind::multiplicative: j["degree"] = spec.degree; break;
    case NoiseKind::gaussian:
      j["mu"] = spec.mu;
      j["sigma"] = spec.sigma;
      break;
    case NoiseKind::uniform:
      j["low"] = spec.low;
      j["high"] = spec.high;
      break;
    case NoiseKind::dimension: j["m"] = spec.m; break;
    case NoiseKind::instance:
      if (spec.blob) j["blob"] = *spec.blob;
      break;
  }
  if (spec.kind != NoiseKind::dimension && spec.kind != NoiseKind::instance) {
    j["ratio"] = spec.ratio;
  }
  if (spec.range) j["range"] = {spec.range->min_value, spec.range->max_value};
  j["seed"] = spec.seed.seed;
  j["stream"] = spec.seed.stream_label;
}

void from_json(const nlohmann::json& j, NoiseSpec& spec) {
  spec = NoiseSpec{};
  spec.kind = parse_noise_kind(j.at("kind").get<std::string>());
  spec.degree = j.value("degree", 0.0);
  spec.mu = j.value("mu", 0.0);
  spec.sigma = j.value("sigma", 0.0);
  spec.low = j.value("low", 0.0);
  spec.high = j.value("high", 1.0);
  spec.m = j.value("m", 1);
  spec.ratio = j.value("ratio", 1.0);
  if (j.contains("blob")) spec.blob = j.at("blob").get<GaussianBlobSpec>();
  if (j.contains("range")) {
    const auto r = j.at("range").get<std::vector<double>>();
    if (r.size() != 2) throw InvalidSpecError("noise range must be [min, max]");
    spec.range = ValueRange{r[0], r[1]};
  }
  spec.seed.seed = j.value("seed", std::uint64_t{0});
  spec.seed.stream_label = j.value("stream", std::string{});
  spec.validate();
}

std::vector<std::size_t> select_noisy_rows(std::size_t n, double ratio, const RngSeed& seed) {
  check_unit(ratio, "noise ratio");
  const auto count = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  Rng rng(seed.child("rows"));
  return rng.sample_without_replacement(n, count);
}

LabeledDataset apply_salt_pepper(const LabeledDataset& ds, double degree, const ValueRange& range,
                                 double ratio, const RngSeed& seed) {
  check_unit(degree, "salt-and-pepper degree");
  range.validate();
  LabeledDataset out = ds;
  if (degree == 0.0) return out;
  const auto rows = select_noisy_rows(ds.rows(), ratio, seed);
  Rng rng(seed.child("pixels"));
  for (std::size_t r : rows) {
    auto row = out.features.row(static_cast<Eigen::Index>(r));
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      if (rng.uniform() < degree) row(c) = rng.coin() ? range.max_value : range.min_value;
    }
  }
  return out;
}

namespace {

// Normalize to [0,1], add eps, clip, restore. Written as u + eps * width so that
// eps == 0 returns u bit-for-bit.
LabeledDataset additive_pipeline(const LabeledDataset& ds, const ValueRange& range, double ratio,
                                 const RngSeed& seed, const std::function<double(Rng&)>& draw) {
  range.validate();
  LabeledDataset out = ds;
  const double width = range.max_value - range.min_value;
  const auto rows = select_noisy_rows(ds.rows(), ratio, seed);
  Rng rng(seed.child("values"));
  for (std::size_t r : rows) {
    auto row = out.features.row(static_cast<Eigen::Index>(r));
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      const double eps = draw(rng);
      if (eps == 0.0) continue;
      const double normalized = (row(c) - range.min_value) / width + eps;
      if (normalized >= 1.0) {
        row(c) = range.max_value;
      } else if (normalized <= 0.0) {
        row(c) = range.min_value;
      } else {
        row(c) = std::clamp(row(c) + eps * width, range.min_value, range.max_value);
      }
    }
  }
  return out;
}

}  // namespace

LabeledDataset apply_gaussian(const LabeledDataset& ds, double mu, double sigma,
                              const ValueRange& range, double ratio, const RngSeed& seed) {
  if (!(sigma >= 0.0)) throw InvalidSpecError("gaussian sigma must be >= 0");
  return additive_pipeline(ds, range, ratio, seed,
                           [mu, sigma](Rng& rng) { return rng.normal(mu, sigma); });
}

LabeledDataset apply_uniform(const LabeledDataset& ds, double low, double high,
                             const ValueRange& range, double ratio, const RngSeed& seed) {
  if (!(high > low)) throw InvalidSpecError("uniform noise needs high > low");
  return additive_pipeline(ds, range, ratio, seed,
                           [low, high](Rng& rng) { return rng.uniform(low, high); });
}

Matrix dimension_noise_matrix(int m, Eigen::Index d, const RngSeed& seed) {
  if (m < 1) throw InvalidSpecError("dimension noise needs m >= 1");
  Rng rng(seed.child("projection"));
  Matrix p(m, d);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) p(r, c) = rng.uniform();
  }
  return p;
}

LabeledDataset apply_dimension_noise(const LabeledDataset& ds, int m, const RngSeed& seed) {
  const Matrix p = dimension_noise_matrix(m, ds.features.cols(), seed);
  const Matrix projected = ds.features * p.transpose();
  LabeledDataset out;
  out.name = ds.name;
  out.labels = ds.labels;
  out.class_count = ds.class_count;
  out.features.resize(ds.features.rows(), ds.features.cols() + m);
  out.features.leftCols(ds.features.cols()) = ds.features;
  out.features.rightCols(m) = projected.unaryExpr([](double x) {
    return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  });
  return out;
}

LabeledDataset inject_instances(const LabeledDataset& ds, const GaussianBlobSpec& blob,
                                const RngSeed& seed) {
  if (blob.count == 0) return ds;
  if (blob.mean.size() != ds.features.cols()) {
    throw DimensionError("instance blob has dimension " + std::to_string(blob.mean.size()) +
                         ", dataset has " + std::to_string(ds.cols()));
  }
  if (blob.label < 0 || blob.label >= ds.class_count) {
    throw InvalidSpecError("instance blob label " + std::to_string(blob.label) +
                           " outside the dataset's " + std::to_string(ds.class_count) +
                           " classes");
  }
  Rng rng(seed.child("instances"));
  LabeledDataset extra;
  extra.features = sample_blob(blob, rng);
  extra.labels.assign(blob.count, blob.label);
  extra.class_count = ds.class_count;
  return concat_rows(ds, extra);
}

LabeledDataset apply_noise(const LabeledDataset& ds, const NoiseSpec& spec) {
  spec.validate();
  const ValueRange range = spec.range.value_or(ValueRange::of(ds));
  switch (spec.kind) {
    case NoiseKind::multiplicative:
      return apply_salt_pepper(ds, spec.degree, range, spec.ratio, spec.seed);
    case NoiseKind::gaussian:
      return apply_gaussian(ds, spec.mu, spec.sigma, range, spec.ratio, spec.seed);
    case NoiseKind::uniform:
      return apply_uniform(ds, spec.low, spec.high, range, spec.ratio, spec.seed);
    case NoiseKind::dimension: return apply_dimension_noise(ds, spec.m, spec.seed);
    case NoiseKind::instance: return inject_instances(ds, *spec.blob, spec.seed);
  }
  throw InvalidSpecError("unhandled noise kind");
}

}  // namespace pinoise
