#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "pinoise/errors.hpp"
#include "pinoise/harness.hpp"
#include "pinoise/learners.hpp"
#include "pinoise/metrics.hpp"

using namespace pinoise;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  ExperimentConfig cfg = nlohmann::json::parse(text).get<ExperimentConfig>();
  cfg.validate();
  return cfg;
}

const char* kSweep = R"({
  "experiment": "enhanced-sweep", "name": "mini",
  "seeds": [1, 2],
  "dataset": {"source": "nuisance-background",
              "params": {"train_count": 40, "test_count": 100}},
  "noise": [{"kind": "gaussian", "mu": 0.5, "sigma": 0.5, "range": [0, 1]},
            {"kind": "uniform", "low": 0, "high": 1, "range": [0, 1]},
            {"kind": "multiplicative", "degree": 0.3, "range": [0, 1]}],
  "learners": [{"name": "svm"}, {"name": "ridge", "lambda": 1}],
  "ratios": [0.0, 0.3, 0.9]
})";

const char* kDimension = R"({
  "experiment": "dimension-table", "name": "dim",
  "seeds": {"first": 1, "count": 2},
  "dataset": {"source": "sector", "params": {"count": 120}},
  "learners": [{"name": "svm"}, {"name": "lasso"}],
  "dimension_m": [0, 4]
})";

const char* kRectified = R"({
  "experiment": "rectified", "name": "rect",
  "seeds": [1, 2],
  "datasets": [{"name": "toy", "source": "toy"}],
  "cases": [{"dataset": "toy", "learner": "svm",
             "noise_blob": {"mean": [0.5, 0.8], "covariance": [0.001, 0.001], "count": 20, "label": 0},
             "rectifying_blob": {"mean": [0.8, 0.2], "covariance": [0.001, 0.001], "count": 20, "label": 1}}]
})";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pinoise_harness_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, DefaultRatiosAndSeedRange) {
  auto j = nlohmann::json::parse(kSweep);
  j["ratios"] = "default";
  j["seeds"] = {{"first", 5}, {"count", 3}};
  const auto cfg = j.get<ExperimentConfig>();
  ASSERT_EQ(cfg.ratios.size(), 20u);
  EXPECT_DOUBLE_EQ(cfg.ratios[1], 0.05);
  EXPECT_DOUBLE_EQ(cfg.ratios.back(), 0.95);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{5, 6, 7}));
}

TEST(Config, RejectsUnknownKeysAndBadGrids) {
  auto j = nlohmann::json::parse(kSweep);
  j["ratio"] = 0.5;
  EXPECT_THROW(j.get<ExperimentConfig>(), ConfigError);

  const auto invalid = [](const std::function<void(nlohmann::json&)>& edit) {
    auto bad = nlohmann::json::parse(kSweep);
    edit(bad);
    EXPECT_THROW(bad.get<ExperimentConfig>().validate(), ConfigError) << bad.dump();
  };
  invalid([](auto& c) { c["ratios"] = {0.1, 1.5}; });
  invalid([](auto& c) { c["seeds"] = nlohmann::json::array(); });
  invalid([](auto& c) { c["formats"] = {"csv", "pdf"}; });
  invalid([](auto& c) { c["learners"] = {{{"name", "kmeans"}}}; });
  invalid([](auto& c) { c["noise"] = {{{"kind", "dimension"}, {"m", 3}}}; });
}

TEST(Config, LoadConfigWrapsParseErrors) {
  const fs::path dir = scratch("cfg");
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_THROW(load_config(dir / "broken.json"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
  std::ofstream(dir / "ok.json") << kSweep;
  const auto cfg = load_config(dir / "ok.json");
  EXPECT_EQ(cfg.base_dir, dir);
}

TEST(Config, JsonRoundTrip) {
  const auto cfg = parse(kRectified);
  const nlohmann::json j = cfg;
  const auto back = j.get<ExperimentConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
}

TEST(EnhancedSweep, GridCompleteness) {
  const auto cfg = parse(kSweep);
  const auto report = run_enhanced_sweep(cfg);
  EXPECT_EQ(report.cells.size(), cfg.noise.size() * cfg.ratios.size() * cfg.learners.size() * cfg.seeds.size());
  EXPECT_EQ(report.aggregates.size(), cfg.noise.size() * cfg.ratios.size() * cfg.learners.size());
  for (const auto& row : report.aggregates) EXPECT_EQ(row.count, cfg.seeds.size());
  EXPECT_EQ(report.estimates.size(), cfg.noise.size() * cfg.ratios.size());
}

TEST(EnhancedSweep, ZeroRatioEqualsCleanBaseline) {
  const auto cfg = parse(kSweep);
  const auto report = run_enhanced_sweep(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    const auto& src = cfg.datasets.front();
    const auto loaded = load_source(src, RngSeed{seed, "data/" + src.label()}, {}, {});
    const auto& [train, test] = *loaded.fixed_split;
    for (const auto& learner : cfg.learners) {
      const auto model = learner.label() == "svm"
                             ? train_svm(train, 1.0, RngSeed{seed, "learner/svm"})
                             : train_ridge(train, 1.0);
      const double baseline = 100.0 * classification_accuracy(predict(model, test), test.labels);
      for (const auto& noise : cfg.noise) {
        const CellKey key{src.label(), noise.label(), learner.label(), "test", 0.0,
                          std::nullopt, std::nullopt, "accuracy"};
        const auto values = report.values(key);
        ASSERT_EQ(values.size(), cfg.seeds.size());
        const auto idx = static_cast<std::size_t>(seed - cfg.seeds.front());
        EXPECT_EQ(values[idx], baseline) << noise.label() << " " << learner.label();
      }
    }
  }
}

TEST(DimensionTable, ZeroMEqualsBaseline) {
  const auto report = run_dimension_table(parse(kDimension));
  std::size_t checked = 0;
  for (const auto& cell : report.cells) {
    if (cell.key.m != 0 || cell.key.stage != "pi-acc") continue;
    CellKey acc = cell.key;
    acc.stage = "acc";
    const auto base = report.values(acc);
    const auto pi = report.values(cell.key);
    EXPECT_EQ(base, pi);
    ++checked;
  }
  EXPECT_GT(checked, 0u);
  EXPECT_EQ(report.cells.size(), 2u * 2u * 2u * 3u);  // seeds x learners x m x stages
}

TEST(Rectified, StagesAreNested) {
  const auto cfg = parse(kRectified);
  const auto base = make_toy(RngSeed{1, "data/toy"});
  const auto stages = build_rectified_stages(base, cfg.cases.front(), RngSeed{1, "rect"});
  const std::vector<const LabeledDataset*> seq{&stages.original, &stages.noisy, &stages.rectified,
                                               &stages.excessive};
  EXPECT_EQ(stages.noisy.rows(), 220u);
  EXPECT_EQ(stages.rectified.rows(), 240u);
  EXPECT_EQ(stages.excessive.rows(), 320u);  // 5 x 20 rectifying rows in total
  for (std::size_t s = 1; s < seq.size(); ++s) {
    const auto n = static_cast<Eigen::Index>(seq[s - 1]->rows());
    EXPECT_GT(seq[s]->rows(), seq[s - 1]->rows());
    EXPECT_EQ(seq[s]->features.topRows(n), seq[s - 1]->features);
    EXPECT_TRUE(std::equal(seq[s - 1]->labels.begin(), seq[s - 1]->labels.end(), seq[s]->labels.begin()));
  }
}

TEST(Rectified, EmptyBlobsGiveEqualStages) {
  auto j = nlohmann::json::parse(kRectified);
  j["cases"][0]["noise_blob"]["count"] = 0;
  j["cases"][0]["rectifying_blob"]["count"] = 0;
  for (const char* learner : {"svm", "kmeans", "lda"}) {
    j["cases"][0]["learner"] = learner;
    const auto report = run_rectified(j.get<ExperimentConfig>());
    ASSERT_EQ(report.cells.size(), 8u);
    for (std::size_t i = 0; i < report.cells.size(); i += 4) {
      for (std::size_t s = 1; s < 4; ++s) EXPECT_EQ(report.cells[i + s].value, report.cells[i].value) << learner;
    }
  }
}

TEST(Rectified, DimensionMismatchIsReported) {
  auto j = nlohmann::json::parse(kRectified);
  j["cases"][0]["noise_blob"]["mean"] = {0.5, 0.8, 0.1};
  j["cases"][0]["noise_blob"]["covariance"] = {0.001, 0.001, 0.001};
  j["cases"][0]["rectifying_blob"]["mean"] = {0.5, 0.8, 0.1};
  j["cases"][0]["rectifying_blob"]["covariance"] = {0.001, 0.001, 0.001};
  EXPECT_THROW(run_rectified(j.get<ExperimentConfig>()), DimensionError);
}

TEST(Sources, MissingCsvUsesFallbackOrFails) {
  DatasetSource src;
  src.name = "cars";
  src.source = "csv";
  src.path = "definitely_missing.csv";
  EXPECT_THROW(load_source(src, RngSeed{1, "d"}, scratch("src"), {}), IngestionError);
  src.fallback = "cars";
  const auto loaded = load_source(src, RngSeed{1, "d"}, scratch("src"), {});
  EXPECT_TRUE(loaded.fallback_used);
  EXPECT_EQ(loaded.pool.rows(), 392u);
  EXPECT_EQ(loaded.pool.cols(), 8u);
  EXPECT_EQ(loaded.pool.class_count, 3);
}

TEST(Sources, DataDirTakesPrecedence) {
  const fs::path base = scratch("base"), data = scratch("data");
  std::ofstream(base / "t.csv") << "1,a\n2,b\n";
  std::ofstream(data / "t.csv") << "1,a\n2,b\n3,c\n";
  DatasetSource src;
  src.source = "csv";
  src.path = "t.csv";
  src.label_column = 1;
  EXPECT_EQ(load_source(src, RngSeed{1, "d"}, base, data).pool.rows(), 3u);
  EXPECT_EQ(load_source(src, RngSeed{1, "d"}, base, {}).pool.rows(), 2u);
}

TEST(Aggregate, QuantilesByInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.75), 7.0);
  std::vector<ReportCell> cells;
  for (int s = 0; s < 5; ++s) cells.push_back({CellKey{"d", "n", "l", "x", 0.1, {}, {}, "accuracy"},
                                                static_cast<std::uint64_t>(s), static_cast<double>(s * s)});
  const auto rows = aggregate(cells);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].median, 4.0);
  EXPECT_DOUBLE_EQ(rows[0].iqr(), 9.0 - 1.0);
}

TEST(Report, EmptyGridIsHeaderOnlyCsv) {
  ExperimentReport empty;
  empty.name = "empty";
  const std::string csv = report_csv(empty);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_EQ(csv.rfind("dataset,", 0), 0u);
}

TEST(Report, SweepEmitsOneSvgPerNoiseKind) {
  const auto report = run_enhanced_sweep(parse(kSweep));
  EXPECT_EQ(report_svgs(report).size(), 3u);
  for (const auto& [name, svg] : report_svgs(report)) {
    EXPECT_NE(svg.find("<svg"), std::string::npos) << name;
    EXPECT_NE(svg.find("</svg>"), std::string::npos) << name;
  }
}

TEST(Report, JsonRoundTripKeepsCells) {
  const auto report = run_rectified(parse(kRectified));
  const auto back = report_from_json(nlohmann::json::parse(report_to_json(report).dump()));
  ASSERT_EQ(back.cells.size(), report.cells.size());
  for (std::size_t i = 0; i < back.cells.size(); ++i) {
    EXPECT_EQ(back.cells[i].key, report.cells[i].key);
    EXPECT_EQ(back.cells[i].value, report.cells[i].value);
  }
}

TEST(Report, ReRunIsByteIdentical) {
  for (const char* text : {kSweep, kDimension, kRectified}) {
    auto cfg = parse(text);
    std::vector<std::string> first;
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = scratch("det" + std::to_string(run));
      cfg.output_dir = dir;
      auto report = run_experiment(cfg);
      report.wall_clock_seconds = 0.0;
      emit_report(report, dir, {"csv", "json", "svg"});
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file()) files.push_back(e.path().filename().string() + "\n" + slurp(e.path()));
      }
      std::sort(files.begin(), files.end());
      if (run == 0) first = files;
      else EXPECT_EQ(files, first) << cfg.name;
    }
  }
}

TEST(Report, UnwritableDirectoryThrows) {
  const auto report = run_rectified(parse(kRectified));
  EXPECT_ANY_THROW(emit_report(report, "/proc/pinoise_cannot_write", {"csv"}));
  EXPECT_THROW(emit_report(report, scratch("fmt"), {"xml"}), ConfigError);
  EXPECT_EQ(parse_formats(" csv, json ,svg"), (std::vector<std::string>{"csv", "json", "svg"}));
}

TEST(SrSweep, ReportCarriesExactColumn) {
  const auto cfg = parse(R"({"experiment": "sr-sweep", "name": "sr", "seeds": [1],
    "sr": {"signal": "constant", "value": 0.5, "points": 20, "mc_draws": 2000,
           "sigmas": [0.0, 0.5, 1.0]}})");
  const auto report = run_sr_sweep(cfg);
  EXPECT_EQ(report.cells.size(), 3u * 5u);
  const auto exact = report.median(CellKey{"sr-signal", "gaussian", "", "", {}, {}, 1.0, "mi_exact"});
  ASSERT_TRUE(exact.has_value());
  EXPECT_NEAR(*exact, 0.5 * std::erfc(0.5 / std::sqrt(2.0)) * std::log(64.0), 1e-12);
}
