#include <cmath>

#include <gtest/gtest.h>

#include "pinoise/errors.hpp"
#include "pinoise/noise.hpp"

using namespace pinoise;

namespace {

LabeledDataset constant_rows(std::size_t n, std::size_t d, double value) {
  return LabeledDataset{Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d), value),
                        Labels(n, 0), 1, "const"};
}

LabeledDataset random_pixels(std::size_t n, std::size_t d, const RngSeed& seed) {
  Rng rng(seed);
  LabeledDataset ds{Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)), Labels(n), 2, "px"};
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) ds.features(i, j) = std::floor(rng.uniform(0, 256));
  }
  return ds;
}

const ValueRange k8bit{0.0, 255.0};

}  // namespace

TEST(SelectRows, CountAndOrder) {
  const auto rows = select_noisy_rows(100, 0.25, RngSeed{1, "sel"});
  EXPECT_EQ(rows.size(), 25u);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
  EXPECT_TRUE(select_noisy_rows(100, 0.0, RngSeed{1, "sel"}).empty());
  EXPECT_EQ(select_noisy_rows(100, 1.0, RngSeed{1, "sel"}).size(), 100u);
}

TEST(SaltPepper, ZeroDegreeIsIdentity) {
  const auto ds = random_pixels(20, 30, RngSeed{1, "px"});
  const auto out = apply_salt_pepper(ds, 0.0, k8bit, 1.0, RngSeed{1, "sp"});
  EXPECT_EQ(out.features, ds.features);
  EXPECT_EQ(out.labels, ds.labels);
}

TEST(SaltPepper, FullDegreeSaturates) {
  const auto ds = random_pixels(10, 50, RngSeed{2, "px"});
  const auto out = apply_salt_pepper(ds, 1.0, k8bit, 1.0, RngSeed{2, "sp"});
  for (Eigen::Index i = 0; i < out.features.size(); ++i) {
    const double v = out.features.data()[i];
    EXPECT_TRUE(v == 0.0 || v == 255.0);
  }
}

TEST(SaltPepper, BinomialBand) {
  // 0.3 of 10000 coordinates: mean 3000, sd sqrt(10000 * 0.3 * 0.7) = 45.8, 3 sd band.
  const auto ds = constant_rows(1, 10000, 100.0);
  const auto out = apply_salt_pepper(ds, 0.3, k8bit, 1.0, RngSeed{3, "sp"});
  const auto changed = (out.features.array() != 100.0).count();
  EXPECT_GE(changed, 2863);
  EXPECT_LE(changed, 3137);
}

TEST(SaltPepper, OnlySelectedRowsChange) {
  const auto ds = random_pixels(40, 16, RngSeed{4, "px"});
  const RngSeed seed{4, "sp"};
  const auto out = apply_salt_pepper(ds, 0.5, k8bit, 0.25, seed);
  const auto rows = select_noisy_rows(40, 0.25, seed);
  for (Eigen::Index i = 0; i < 40; ++i) {
    const bool selected = std::binary_search(rows.begin(), rows.end(), static_cast<std::size_t>(i));
    if (!selected) {
      EXPECT_EQ(out.features.row(i), ds.features.row(i));
    }
  }
}

TEST(Gaussian, ZeroNoiseIsIdentity) {
  const auto ds = random_pixels(10, 8, RngSeed{5, "px"});
  const auto out = apply_gaussian(ds, 0.0, 0.0, k8bit, 1.0, RngSeed{5, "g"});
  EXPECT_TRUE(out.features.isApprox(ds.features, 1e-12));
}

TEST(Gaussian, HandComputedClip) {
  // 200/255 = 0.784 plus 0.5 is 1.284, clipped to 1, restored to 255.
  const auto ds = constant_rows(1, 1, 200.0);
  const auto out = apply_gaussian(ds, 0.5, 0.0, k8bit, 1.0, RngSeed{6, "g"});
  EXPECT_DOUBLE_EQ(out.features(0, 0), 255.0);
  // 50/255 + 0.1 = 0.29608, restored: 75.5.
  const auto low = apply_gaussian(constant_rows(1, 1, 50.0), 0.1, 0.0, k8bit, 1.0, RngSeed{6, "g"});
  EXPECT_NEAR(low.features(0, 0), 50.0 + 25.5, 1e-9);
}

TEST(Gaussian, EnhancedSettingStaysInRange) {
  const auto ds = random_pixels(50, 64, RngSeed{7, "px"});
  const auto out = apply_gaussian(ds, 0.5, 0.5, k8bit, 1.0, RngSeed{7, "g"});
  EXPECT_GE(out.features.minCoeff(), 0.0);
  EXPECT_LE(out.features.maxCoeff(), 255.0);
  EXPECT_EQ(out.labels, ds.labels);
}

TEST(Uniform, DegenerateIntervalIsNearIdentity) {
  const auto ds = random_pixels(10, 8, RngSeed{8, "px"});
  const auto out = apply_uniform(ds, 0.0, 1e-12, k8bit, 1.0, RngSeed{8, "u"});
  EXPECT_LE((out.features - ds.features).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Uniform, StaysInRangeAndClipsHigh) {
  const auto ds = random_pixels(50, 64, RngSeed{9, "px"});
  const auto out = apply_uniform(ds, 0.0, 1.0, k8bit, 1.0, RngSeed{9, "u"});
  EXPECT_GE(out.features.minCoeff(), 0.0);
  EXPECT_LE(out.features.maxCoeff(), 255.0);
  // Normalized 0.8 plus draws from [0.2, 0.5) always exceeds 1.
  const auto hi = apply_uniform(constant_rows(1, 100, 0.8 * 255.0), 0.2, 0.5, k8bit, 1.0, RngSeed{9, "u"});
  EXPECT_EQ((hi.features.array() == 255.0).count(), 100);
  EXPECT_THROW(apply_uniform(ds, 1.0, 0.5, k8bit, 1.0, RngSeed{9, "u"}), InvalidSpecError);
}

TEST(Dimension, ZeroRowGetsZeroSigns) {
  const auto ds = constant_rows(3, 4, 0.0);
  const auto out = apply_dimension_noise(ds, 5, RngSeed{1, "dim"});
  ASSERT_EQ(out.cols(), 9u);
  EXPECT_EQ(out.features.rightCols(5).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dimension, PositiveInputsGiveOnes) {
  const auto ds = constant_rows(3, 4, 0.7);
  const auto out = apply_dimension_noise(ds, 6, RngSeed{1, "dim"});
  EXPECT_EQ(out.features.rightCols(6), Matrix::Ones(3, 6));
}

TEST(Dimension, PrefixUnchangedAndSignsMatchOracle) {
  Rng rng(RngSeed{2, "in"});
  LabeledDataset ds{Matrix(30, 5), Labels(30, 0), 1, "x"};
  for (Eigen::Index i = 0; i < ds.features.size(); ++i) ds.features.data()[i] = rng.normal();
  const RngSeed seed{2, "dim"};
  const auto out = apply_dimension_noise(ds, 7, seed);
  EXPECT_EQ(out.features.leftCols(5), ds.features);
  const Matrix p = dimension_noise_matrix(7, 5, seed);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LT(p.maxCoeff(), 1.0);
  for (Eigen::Index i = 0; i < 30; ++i) {
    for (Eigen::Index r = 0; r < 7; ++r) {
      const double dot = p.row(r).dot(ds.features.row(i));
      const double sgn = dot > 0 ? 1.0 : (dot < 0 ? -1.0 : 0.0);
      EXPECT_EQ(out.features(i, 5 + r), sgn);
    }
  }
  EXPECT_THROW(apply_dimension_noise(ds, 0, seed), InvalidSpecError);
}

TEST(Instances, AppendsLabelledRows) {
  const auto toy = make_toy(RngSeed{1, "toy"});
  const auto blob = GaussianBlobSpec::isotropic({0.5, 0.8}, 0.001, 20, 0);
  const auto out = inject_instances(toy, blob, RngSeed{1, "inj"});
  ASSERT_EQ(out.rows(), 220u);
  EXPECT_EQ(out.features.topRows(200), toy.features);
  for (std::size_t i = 200; i < 220; ++i) EXPECT_EQ(out.labels[i], 0);
  const Vector mean = out.features.bottomRows(20).colwise().mean();
  EXPECT_NEAR(mean(0), 0.5, 0.03);
  EXPECT_NEAR(mean(1), 0.8, 0.03);
}

TEST(Instances, ZeroCountIsIdentityAndDimensionChecked) {
  const auto toy = make_toy(RngSeed{1, "toy"});
  const auto out = inject_instances(toy, GaussianBlobSpec::isotropic({0.5, 0.8}, 0.001, 0, 1), RngSeed{1, "inj"});
  EXPECT_EQ(out.features, toy.features);
  EXPECT_EQ(out.labels, toy.labels);
  EXPECT_THROW(inject_instances(toy, GaussianBlobSpec::isotropic({0.5, 0.8, 0.1}, 0.001, 3, 1), RngSeed{1, "inj"}),
               DimensionError);
}

TEST(NoiseSpec, JsonRoundTripAndDispatch) {
  const auto spec = nlohmann::json::parse(R"({"kind":"gaussian","mu":0.5,"sigma":0.5,"ratio":0.2})")
                        .get<NoiseSpec>();
  EXPECT_EQ(spec.kind, NoiseKind::gaussian);
  EXPECT_DOUBLE_EQ(spec.sigma, 0.5);
  const nlohmann::json again = spec;
  EXPECT_EQ(again.get<NoiseSpec>().label(), spec.label());
  NoiseSpec bad = spec;
  bad.ratio = 1.5;
  EXPECT_THROW(bad.validate(), InvalidSpecError);
  EXPECT_THROW(parse_noise_kind("pink"), InvalidSpecError);
}

// Property: every generator keeps labels, is deterministic, and clips into range.
TEST(NoiseProperties, RandomizedSpecs) {
  Rng gen(RngSeed{99, "gen"});
  for (int trial = 0; trial < 60; ++trial) {
    const auto ds = random_pixels(5 + gen.below(20), 1 + gen.below(12), RngSeed{static_cast<std::uint64_t>(trial), "px"});
    NoiseSpec spec;
    spec.kind = static_cast<NoiseKind>(gen.below(3));
    spec.degree = gen.uniform();
    spec.mu = gen.uniform(-1, 1);
    spec.sigma = gen.uniform(0, 1);
    spec.low = gen.uniform(-1, 0.5);
    spec.high = spec.low + gen.uniform(0.01, 1);
    spec.ratio = gen.uniform();
    spec.range = k8bit;
    spec.seed = RngSeed{static_cast<std::uint64_t>(trial), "noise"};
    const auto a = apply_noise(ds, spec);
    const auto b = apply_noise(ds, spec);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, ds.labels);
    EXPECT_GE(a.features.minCoeff(), 0.0);
    EXPECT_LE(a.features.maxCoeff(), 255.0);
  }
}
