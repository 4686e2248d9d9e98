// Command-line front end for the pinoise library.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
// arguments, 3 data that cannot be read or parsed.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinoise/dataset.hpp"
#include "pinoise/entropy.hpp"
#include "pinoise/errors.hpp"
#include "pinoise/fixtures.hpp"
#include "pinoise/harness.hpp"
#include "pinoise/noise.hpp"

namespace fs = std::filesystem;
using namespace pinoise;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIngestion = 3;

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.generic_string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.generic_string() + ": " + e.what());
  }
}

// Inline JSON when the argument starts with '{', a file path otherwise.
nlohmann::json json_argument(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("inline JSON: ") + e.what());
    }
  }
  return read_json_file(text);
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : parse_formats(text)) {
    try {
      out.push_back(static_cast<std::size_t>(std::stoul(item)));
    } catch (const std::exception&) {
      throw ConfigError("not a column index: '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : parse_formats(text)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

void print_written(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << f.generic_string() << "\n";
}

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, CommonFlags& flags, const std::string& default_format) {
  cmd->add_option("--config", flags.config, "JSON configuration file");
  cmd->add_option("--seed", flags.seed, "root seed (u64)");
  cmd->add_option("--out", flags.out, "output directory")->capture_default_str();
  flags.format = default_format;
  cmd->add_option("--format", flags.format, "comma-separated subset of csv,json,svg")
      ->capture_default_str();
}

int cmd_gen_data(const CommonFlags& flags, const std::string& dataset, std::size_t count) {
  const std::uint64_t seed = flags.seed.value_or(1);
  DatasetSource src;
  if (!flags.config.empty()) {
    src = read_json_file(flags.config).get<DatasetSource>();
  } else {
    src.source = dataset;
    src.name = dataset;
    if (const auto shape = benchmark_shape(dataset)) {
      src.source = "fallback";
      src.fallback = shape->name;
    }
    if (count > 0) {
      src.sector.count = count;
      src.rings_count = count;
    }
  }
  try {
    src.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const LoadedData data = load_source(src, RngSeed{seed, "data/" + src.label()}, {}, {});
  const fs::path dir = flags.out.empty() ? fs::path(".") : fs::path(flags.out);
  fs::create_directories(dir);
  std::vector<fs::path> written;
  if (data.fixed_split) {
    written.push_back(dir / (src.label() + "_train.csv"));
    save_csv(data.fixed_split->first, written.back());
    written.push_back(dir / (src.label() + "_test.csv"));
    save_csv(data.fixed_split->second, written.back());
  } else {
    written.push_back(dir / (src.label() + ".csv"));
    save_csv(preprocess(data.pool, src), written.back());
  }
  print_written(written);
  return 0;
}

int cmd_inject_noise(const CommonFlags& flags, const std::string& input, std::size_t label_column,
                     bool header, const std::string& noise_arg, std::optional<double> ratio) {
  const std::string spec_text = !noise_arg.empty() ? noise_arg : flags.config;
  if (spec_text.empty()) throw ConfigError("inject-noise needs --noise or --config");
  NoiseSpec spec;
  try {
    spec = json_argument(spec_text).get<NoiseSpec>();
    if (ratio) spec.ratio = *ratio;
    if (flags.seed) spec.seed = RngSeed{*flags.seed, spec.seed.stream_label};
    spec.validate();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("noise spec: ") + e.what());
  } catch (const InvalidSpecError& e) {
    throw ConfigError(std::string("noise spec: ") + e.what());
  }
  const LabeledDataset ds = load_csv(input, label_column, header);
  const LabeledDataset noisy = apply_noise(ds, spec);
  const fs::path dir = flags.out.empty() ? fs::path(".") : fs::path(flags.out);
  fs::create_directories(dir);
  const fs::path target = dir / (fs::path(input).stem().string() + "_noisy.csv");
  save_csv(noisy, target);
  print_written({target});
  return 0;
}

int cmd_estimate_mi(const CommonFlags& flags, const std::string& input, std::size_t label_column,
                    bool header, const std::string& noise_columns, std::optional<int> bins,
                    double alpha, const std::string& unit, const std::string& joint) {
  const double base = unit == "bits" ? kBits : kNats;
  MiEstimate est;
  if (!joint.empty()) {
    DiscreteJoint table(Matrix::Ones(1, 1));
    try {
      from_json(json_argument(joint), table);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("joint table: ") + e.what());
    } catch (const InvalidDistributionError& e) {
      throw ConfigError(std::string("joint table: ") + e.what());
    }
    est = mutual_information(table, base);
  } else {
    if (input.empty()) throw ConfigError("estimate-mi needs --input or --joint");
    // The noise columns are read as features; everything else is dropped.
    const LabeledDataset ds = load_csv(input, label_column, header);
    std::vector<std::size_t> cols = parse_index_list(noise_columns);
    if (cols.empty()) {
      for (std::size_t c = 0; c < ds.cols(); ++c) cols.push_back(c < label_column ? c : c + 1);
    }
    Matrix noise(ds.features.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      // Column indices refer to the file; skip over the label column.
      std::size_t c = cols[k];
      if (c == label_column) throw ConfigError("noise column equals the label column");
      if (c > label_column) --c;
      if (c >= ds.cols()) throw ConfigError("noise column " + std::to_string(cols[k]) + " out of range");
      noise.col(static_cast<Eigen::Index>(k)) = ds.features.col(static_cast<Eigen::Index>(c));
    }
    est = estimate_mi_histogram(ds.labels, noise, bins, base);
  }
  const auto verdict = classify_noise(est, alpha);
  nlohmann::json out;
  out["estimate"] = est;
  out["alpha"] = alpha;
  out["unit"] = unit;
  out["verdict"] = to_string(verdict.verdict);
  out["strong"] = verdict.strong;
  std::cout << out.dump(2) << "\n";
  if (!flags.out.empty()) {
    fs::create_directories(flags.out);
    std::ofstream(fs::path(flags.out) / "estimate.json") << out.dump(2) << "\n";
  }
  return 0;
}

int cmd_sr_sweep(const CommonFlags& flags, SrSweepSpec spec, const std::string& sigmas) {
  ExperimentConfig cfg;
  if (!flags.config.empty()) {
    cfg = load_config(flags.config);
    if (cfg.experiment != ExperimentKind::sr_sweep) {
      throw ConfigError("sr-sweep --config must describe an sr-sweep experiment");
    }
  } else {
    cfg.experiment = ExperimentKind::sr_sweep;
    cfg.name = "sr_sweep";
    spec.sigmas = parse_number_list(sigmas);
    cfg.sr = spec;
    cfg.seeds = {1};
  }
  if (flags.seed) cfg.seeds = {*flags.seed};
  cfg.formats = parse_formats(flags.format);
  cfg.validate();
  const ExperimentReport report = run_sr_sweep(cfg);
  print_written(emit_report(report, flags.out.empty() ? fs::path("out") : fs::path(flags.out), cfg.formats));
  return 0;
}

int cmd_run(const CommonFlags& flags, bool format_given) {
  if (flags.config.empty()) throw ConfigError("run needs --config");
  ExperimentConfig cfg = load_config(flags.config);
  if (flags.seed) cfg.seeds = {*flags.seed};
  if (format_given) cfg.formats = parse_formats(flags.format);
  if (!flags.out.empty()) {
    cfg.output_dir = flags.out;
  } else if (cfg.output_dir.empty()) {
    cfg.output_dir = "out";
  } else if (cfg.output_dir.is_relative()) {
    cfg.output_dir = cfg.base_dir / cfg.output_dir;
  }
  cfg.validate();
  const ExperimentReport report = run_experiment(cfg);
  print_written(emit_report(report, cfg.output_dir, cfg.formats));
  return 0;
}

int cmd_report(const CommonFlags& flags, const std::string& input) {
  if (input.empty()) throw ConfigError("report needs --input");
  std::ifstream in(input);
  if (!in) throw IngestionError("cannot open report " + input);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(input + ": " + e.what());
  }
  const ExperimentReport report = report_from_json(j);
  print_written(emit_report(report, flags.out.empty() ? fs::path("out") : fs::path(flags.out),
                            parse_formats(flags.format)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-incentive noise toolkit: noise injection, entropy estimates, experiments"};
  app.require_subcommand(1);

  CommonFlags gen_flags, inject_flags, mi_flags, sr_flags, run_flags, report_flags;

  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset to CSV");
  add_common(gen, gen_flags, "csv");
  std::string gen_dataset = "toy";
  std::size_t gen_count = 0;
  gen->add_option("--dataset", gen_dataset,
                  "toy, sector, rings, nuisance-background, or a benchmark shape name")
      ->capture_default_str();
  gen->add_option("--count", gen_count, "row count for sector and rings");

  auto* inject = app.add_subcommand("inject-noise", "apply a noise spec to a CSV dataset");
  add_common(inject, inject_flags, "csv");
  std::string inject_input, inject_noise;
  std::size_t inject_label = 0;
  bool inject_header = false;
  std::optional<double> inject_ratio;
  inject->add_option("--input", inject_input, "input CSV")->required();
  inject->add_option("--label-column", inject_label, "zero-based label column");
  inject->add_flag("--header", inject_header, "first row is a header");
  inject->add_option("--noise", inject_noise, "noise spec as inline JSON or a file path");
  inject->add_option("--ratio", inject_ratio, "override the noisy ratio p");

  auto* mi = app.add_subcommand("estimate-mi", "estimate MI between labels and noise columns");
  add_common(mi, mi_flags, "json");
  std::string mi_input, mi_columns, mi_unit = "bits", mi_joint;
  std::size_t mi_label = 0;
  bool mi_header = false;
  std::optional<int> mi_bins;
  double mi_alpha = 0.0;
  mi->add_option("--input", mi_input, "CSV with a label column and noise columns");
  mi->add_option("--label-column", mi_label, "zero-based label column");
  mi->add_flag("--header", mi_header, "first row is a header");
  mi->add_option("--noise-columns", mi_columns, "comma-separated file columns (1 to 3)");
  mi->add_option("--bins", mi_bins, "bins per noise axis (default ceil(n^(1/3)))");
  mi->add_option("--alpha", mi_alpha, "alpha-strong threshold, same unit as --unit");
  mi->add_option("--unit", mi_unit, "bits or nats")->check(CLI::IsMember({"bits", "nats"}));
  mi->add_option("--joint", mi_joint, "exact joint table {\"table\": [[...]]}, inline or file");

  auto* sr = app.add_subcommand("sr-sweep", "stochastic-resonance entropy versus noise sigma");
  add_common(sr, sr_flags, "csv,json,svg");
  SrSweepSpec sr_spec;
  std::string sr_sigmas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0,1.2,1.4,1.6,1.8,2.0";
  sr->add_option("--signal", sr_spec.signal, "constant or sine")->check(CLI::IsMember({"constant", "sine"}));
  sr->add_option("--value", sr_spec.value, "constant level or sine offset");
  sr->add_option("--amplitude", sr_spec.amplitude, "sine amplitude");
  sr->add_option("--cycles", sr_spec.cycles, "sine cycles over the grid");
  sr->add_option("--points", sr_spec.points, "time grid size");
  sr->add_option("--threshold", sr_spec.threshold, "sensor threshold");
  sr->add_option("--floor", sr_spec.floor, "amplitude range lower end");
  sr->add_option("--ceiling", sr_spec.ceiling, "amplitude range upper end");
  sr->add_option("--bins", sr_spec.amplitude_bins, "amplitude bins B");
  sr->add_option("--draws", sr_spec.mc_draws, "Monte Carlo draws per grid point");
  sr->add_option("--sigmas", sr_sigmas, "comma-separated noise levels")->capture_default_str();
  sr->add_option("--alpha", sr_spec.alpha, "alpha-strong threshold in nats");

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  add_common(run, run_flags, "csv,json,svg");

  auto* rep = app.add_subcommand("report", "re-render a saved JSON report");
  add_common(rep, report_flags, "csv,svg");
  std::string report_input;
  rep->add_option("--input", report_input, "report JSON written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen_data(gen_flags, gen_dataset, gen_count);
    if (*inject) {
      return cmd_inject_noise(inject_flags, inject_input, inject_label, inject_header, inject_noise,
                              inject_ratio);
    }
    if (*mi) {
      return cmd_estimate_mi(mi_flags, mi_input, mi_label, mi_header, mi_columns, mi_bins, mi_alpha,
                             mi_unit, mi_joint);
    }
    if (*sr) return cmd_sr_sweep(sr_flags, sr_spec, sr_sigmas);
    if (*run) return cmd_run(run_flags, run->count("--format") > 0);
    if (*rep) return cmd_report(report_flags, report_input);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidSpecError& e) {
    std::cerr << "invalid specification: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "dimension mismatch: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IngestionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitIngestion;
  } catch (const SplitError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitIngestion;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
