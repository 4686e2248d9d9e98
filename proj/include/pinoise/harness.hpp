#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinoise/dataset.hpp"
#include "pinoise/fixtures.hpp"
#include "pinoise/noise.hpp"
#include "pinoise/sr.hpp"

namespace pinoise {

enum class ExperimentKind { enhanced_sweep, dimension_table, rectified, sr_sweep };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

/// Learner name plus hyperparameters. `name` is one of svm, lasso, ridge (alias
/// dlsr), kmeans, lda. Unset hyperparameters take the learner default.
struct LearnerSpec {
  std::string name;
  std::optional<double> c;       // svm
  std::optional<double> lambda;  // lasso, ridge
  [[nodiscard]] double c_or_default() const { return c.value_or(1.0); }
  [[nodiscard]] double lambda_or_default() const;
  [[nodiscard]] std::string label() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const LearnerSpec& spec);
void from_json(const nlohmann::json& j, LearnerSpec& spec);

/// Where an experiment's rows come from.
///
/// source is "toy", "blobs", "csv", "sector", "rings", "nuisance-background" or
/// "fallback". A csv source that cannot be found at run time is replaced by the
/// shape fallback named in `fallback`, and the substitution is flagged.
struct DatasetSource {
  std::string name;
  std::string source = "toy";
  std::filesystem::path path;
  std::size_t label_column = 0;
  bool has_header = false;
  std::string fallback;
  std::vector<GaussianBlobSpec> blobs;
  NuisanceBackgroundSpec nuisance;
  SectorSpec sector;
  std::size_t rings_count = 400;
  double rings_jitter = 0.1;
  bool minmax = false;
  int pca = 0;  // 0 keeps all features
  bool standardize = false;
  /// dimension-table only: per-learner m lists overriding the global one.
  std::map<std::string, std::vector<int>> m_by_learner;

  [[nodiscard]] std::string label() const { return name.empty() ? source : name; }
  void validate() const;
};

void to_json(nlohmann::json& j, const DatasetSource& src);
void from_json(const nlohmann::json& j, DatasetSource& src);

/// Materialized dataset: either one pool to be split, or a fixed train/test pair.
struct LoadedData {
  LabeledDataset pool;
  std::optional<std::pair<LabeledDataset, LabeledDataset>> fixed_split;
  bool fallback_used = false;
  std::string origin;  // resolved path or generator name
};

/// Builds the rows for `src` (before preprocessing). Relative csv paths are looked
/// up under `data_dir` first, then `base_dir`.
LoadedData load_source(const DatasetSource& src, const RngSeed& seed,
                       const std::filesystem::path& base_dir,
                       const std::filesystem::path& data_dir);

/// Applies minmax scaling and PCA in that order, as configured.
LabeledDataset preprocess(const LabeledDataset& ds, const DatasetSource& src);

/// One rectified experiment: dataset + learner + the two injected blobs.
struct RectifiedCase {
  std::string dataset;  // name of an entry in ExperimentConfig::datasets
  std::string learner;  // svm, kmeans or lda
  GaussianBlobSpec noise_blob;
  GaussianBlobSpec rectifying_blob;
  double excessive_multiplier = 5.0;
  std::optional<double> c;        // svm only, default 1
  std::vector<double> reference;  // published stage values, logged only

  [[nodiscard]] std::string label() const { return dataset + "/" + learner; }
};

void to_json(nlohmann::json& j, const RectifiedCase& rc);
void from_json(const nlohmann::json& j, RectifiedCase& rc);

/// Stochastic-resonance sweep settings.
struct SrSweepSpec {
  std::string signal = "constant";  // constant, sine or csv
  double value = 0.5;               // constant level, or sine offset
  double amplitude = 0.0;           // sine only
  double cycles = 1.0;              // sine only
  std::filesystem::path csv;        // one value per line
  std::size_t points = 100;
  double threshold = 1.0;
  double floor = 0.0;
  double ceiling = 2.0;
  int amplitude_bins = 64;
  std::size_t mc_draws = 1000;
  std::vector<double> sigmas;
  double alpha = 0.0;  // nats

  [[nodiscard]] SrModel model(const std::filesystem::path& base_dir) const;
};

void to_json(nlohmann::json& j, const SrSweepSpec& spec);
void from_json(const nlohmann::json& j, SrSweepSpec& spec);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::enhanced_sweep;
  std::string name = "experiment";
  std::vector<DatasetSource> datasets;
  std::vector<NoiseSpec> noise;
  std::vector<LearnerSpec> learners;
  std::vector<double> ratios;
  std::vector<int> dimension_m;
  std::vector<std::uint64_t> seeds;
  SplitSpec split;
  std::vector<RectifiedCase> cases;
  std::optional<SrSweepSpec> sr;
  double alpha = 0.0;  // threshold for noise verdicts, nats
  std::filesystem::path output_dir;
  std::vector<std::string> formats{"csv", "json"};
  /// Directory that relative paths in the config resolve against.
  std::filesystem::path base_dir;

  /// Throws ConfigError describing the first problem found.
  void validate() const;
  [[nodiscard]] const DatasetSource& dataset(std::string_view name) const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

/// Reads and validates a config file; base_dir becomes the file's directory.
/// Parse errors and validation failures both raise ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Ratios 0, 0.05, ..., 0.95.
std::vector<double> default_ratio_grid();

/// Identifies one point of the experiment grid; unused axes stay empty.
struct CellKey {
  std::string dataset;
  std::string noise;
  std::string learner;
  std::string stage;
  std::optional<double> ratio;
  std::optional<int> m;
  std::optional<double> sigma;
  std::string metric;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

/// One measured value: a grid point under one seed.
struct ReportCell {
  CellKey key;
  std::uint64_t seed = 0;
  double value = 0.0;
};

void to_json(nlohmann::json& j, const ReportCell& cell);
void from_json(const nlohmann::json& j, ReportCell& cell);

/// Median and quartiles of one grid point over seeds.
struct AggregateRow {
  CellKey key;
  std::size_t count = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  [[nodiscard]] double iqr() const { return q3 - q1; }
};

void to_json(nlohmann::json& j, const AggregateRow& row);
void from_json(const nlohmann::json& j, AggregateRow& row);

/// Groups cells by key, in first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<ReportCell>& cells);

/// Quantile with linear interpolation between order statistics (q in [0, 1]).
double quantile(std::vector<double> values, double q);

struct ExperimentReport {
  std::string experiment;
  std::string name;
  nlohmann::json config;          // full config echo
  nlohmann::json datasets;        // metadata per dataset, including fallback flags
  std::vector<ReportCell> cells;
  std::vector<AggregateRow> aggregates;
  nlohmann::json estimates = nlohmann::json::array();  // MI estimates and verdicts
  nlohmann::json notes = nlohmann::json::object();     // reference values, labels
  double wall_clock_seconds = 0.0;

  /// Median over seeds at `key`, if that grid point exists.
  [[nodiscard]] std::optional<double> median(const CellKey& key) const;
  /// Values of every seed at `key`, in seed order.
  [[nodiscard]] std::vector<double> values(const CellKey& key) const;
};

nlohmann::ordered_json report_to_json(const ExperimentReport& report, bool include_wall_clock = true);
ExperimentReport report_from_json(const nlohmann::json& j);

ExperimentReport run_enhanced_sweep(const ExperimentConfig& cfg);
ExperimentReport run_dimension_table(const ExperimentConfig& cfg);
ExperimentReport run_rectified(const ExperimentConfig& cfg);
ExperimentReport run_sr_sweep(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Stage datasets of a rectified run, strictly nested: each appends rows.
struct RectifiedStages {
  LabeledDataset original;
  LabeledDataset noisy;
  LabeledDataset rectified;
  LabeledDataset excessive;
};

RectifiedStages build_rectified_stages(const LabeledDataset& base, const RectifiedCase& rc,
                                       const RngSeed& seed);

std::string report_csv(const ExperimentReport& report);
std::string aggregates_csv(const ExperimentReport& report);
/// (file name, svg document) pairs; one chart per noise spec for sweeps.
std::vector<std::pair<std::string, std::string>> report_svgs(const ExperimentReport& report);

/// Writes <name>.csv, <name>.json, <name>_aggregates.csv and SVG files as
/// requested. Returns written paths. Unknown formats raise ConfigError.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               const std::vector<std::string>& formats);

/// Splits "csv,json" into {"csv", "json"}.
std::vector<std::string> parse_formats(std::string_view text);

}  // namespace pinoise
