#include "pinoise/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

#include "pinoise/errors.hpp"

namespace pinoise {

void to_json(nlohmann::json& j, const NuisanceBackgroundSpec& s) {
  j = nlohmann::json{{"train_count", s.train_count},
                     {"test_count", s.test_count},
                     {"foreground_pixels", s.foreground_pixels},
                     {"background_pixels", s.background_pixels},
                     {"foreground_on", s.foreground_on},
                     {"spurious_correlation", s.spurious_correlation},
                     {"background_jitter", s.background_jitter}};
}

void from_json(const nlohmann::json& j, NuisanceBackgroundSpec& s) {
  const NuisanceBackgroundSpec d;
  s.train_count = j.value("train_count", d.train_count);
  s.test_count = j.value("test_count", d.test_count);
  s.foreground_pixels = j.value("foreground_pixels", d.foreground_pixels);
  s.background_pixels = j.value("background_pixels", d.background_pixels);
  s.foreground_on = j.value("foreground_on", d.foreground_on);
  s.spurious_correlation = j.value("spurious_correlation", d.spurious_correlation);
  s.background_jitter = j.value("background_jitter", d.background_jitter);
}

namespace {

LabeledDataset nuisance_rows(const NuisanceBackgroundSpec& spec, std::size_t n, bool training,
                             Rng& rng, std::string name) {
  const int k = spec.foreground_pixels;
  const int d = 2 * k + spec.background_pixels;
  LabeledDataset ds;
  ds.name = std::move(name);
  ds.class_count = 2;
  ds.features = Matrix::Zero(static_cast<Eigen::Index>(n), d);
  ds.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = static_cast<int>(i % 2);
    const auto row = static_cast<Eigen::Index>(i);
    ds.labels.push_back(cls);
    for (int j = 0; j < k; ++j) {
      ds.features(row, cls * k + j) = rng.uniform() < spec.foreground_on ? 1.0 : 0.0;
    }
    int level = 0;
    if (training) {
      level = rng.uniform() < spec.spurious_correlation ? cls : 1 - cls;
    } else {
      level = rng.coin() ? 1 : 0;
    }
    const double base = level == 1 ? 0.3 : 0.1;
    for (int j = 0; j < spec.background_pixels; ++j) {
      ds.features(row, 2 * k + j) =
          std::clamp(base + rng.normal(0.0, spec.background_jitter), 0.0, 1.0);
    }
  }
  return ds;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> make_nuisance_background(
    const NuisanceBackgroundSpec& spec, const RngSeed& seed) {
  if (spec.foreground_pixels < 1 || spec.background_pixels < 0) {
    throw InvalidSpecError("nuisance-background needs >= 1 foreground pixel per class");
  }
  if (spec.train_count < 2 || spec.test_count < 2) {
    throw InvalidSpecError("nuisance-background needs at least two train and test rows");
  }
  Rng train_rng(seed.child("train"));
  Rng test_rng(seed.child("test"));
  return {nuisance_rows(spec, spec.train_count, true, train_rng, "nuisance-background/train"),
          nuisance_rows(spec, spec.test_count, false, test_rng, "nuisance-background/test")};
}

void to_json(nlohmann::json& j, const SectorSpec& s) {
  j = nlohmann::json{{"count", s.count},
                     {"normal_angle_a", s.normal_angle_a},
                     {"normal_angle_b", s.normal_angle_b}};
}

void from_json(const nlohmann::json& j, SectorSpec& s) {
  const SectorSpec d;
  s.count = j.value("count", d.count);
  s.normal_angle_a = j.value("normal_angle_a", d.normal_angle_a);
  s.normal_angle_b = j.value("normal_angle_b", d.normal_angle_b);
}

LabeledDataset make_sector(const SectorSpec& spec, const RngSeed& seed) {
  if (spec.count < 2) throw InvalidSpecError("sector dataset needs at least two rows");
  const double a = spec.normal_angle_a * std::numbers::pi / 180.0;
  const double b = spec.normal_angle_b * std::numbers::pi / 180.0;
  Rng rng(seed);
  LabeledDataset ds;
  ds.name = "sector";
  ds.class_count = 2;
  ds.features.resize(static_cast<Eigen::Index>(spec.count), 2);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const double x = rng.normal();
    const double y = rng.normal();
    const bool inside = std::cos(a) * x + std::sin(a) * y > 0.0 && std::cos(b) * x + std::sin(b) * y > 0.0;
    ds.features(static_cast<Eigen::Index>(i), 0) = x;
    ds.features(static_cast<Eigen::Index>(i), 1) = y;
    ds.labels.push_back(inside ? 1 : 0);
  }
  return ds;
}

LabeledDataset make_rings(std::size_t count, double jitter, const RngSeed& seed) {
  Rng rng(seed);
  LabeledDataset ds;
  ds.name = "rings";
  ds.class_count = 2;
  ds.features.resize(static_cast<Eigen::Index>(count), 2);
  for (std::size_t i = 0; i < count; ++i) {
    const int cls = static_cast<int>(i % 2);
    const double radius = cls == 0 ? 1.0 : 2.0;
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    ds.features(static_cast<Eigen::Index>(i), 0) = radius * std::cos(theta) + jitter * rng.normal();
    ds.features(static_cast<Eigen::Index>(i), 1) = radius * std::sin(theta) + jitter * rng.normal();
    ds.labels.push_back(cls);
  }
  return ds;
}

std::optional<DatasetShape> benchmark_shape(std::string_view name) {
  static const std::array<DatasetShape, 7> kShapes{{
      {"iris", 150, 4, 3},
      {"wine", 178, 13, 3},
      {"cars", 392, 8, 3},
      {"balance", 624, 4, 3},
      {"australian", 690, 14, 2},
      {"breast", 699, 10, 2},
      {"diabetes", 768, 8, 2},
  }};
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "diabets") lower = "diabetes";
  for (const auto& s : kShapes) {
    if (s.name == lower) return s;
  }
  return std::nullopt;
}

LabeledDataset make_shape_fallback(const DatasetShape& shape, const RngSeed& seed) {
  if (shape.samples < static_cast<std::size_t>(shape.classes) || shape.features < 1 ||
      shape.classes < 1) {
    throw InvalidSpecError("fallback shape is degenerate");
  }
  Rng means_rng(seed.child("means"));
  std::vector<GaussianBlobSpec> blobs;
  const auto c = static_cast<std::size_t>(shape.classes);
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<double> mean(shape.features);
    for (double& m : mean) m = means_rng.normal();
    const std::size_t count = shape.samples / c + (k < shape.samples % c ? 1 : 0);
    blobs.push_back(GaussianBlobSpec::isotropic(std::move(mean), 1.0, count, static_cast<int>(k)));
  }
  return generate_blobs(blobs, seed.child("rows"), shape.name + "-fallback");
}

}  // namespace pinoise
