#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "pinoise/entropy.hpp"
#include "pinoise/errors.hpp"
#include "pinoise/harness.hpp"
#include "pinoise/learners.hpp"
#include "pinoise/metrics.hpp"

namespace pinoise {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

fs::path data_dir_from_env() {
  const char* dir = std::getenv("PINOISE_DATA_DIR");
  return dir == nullptr ? fs::path{} : fs::path(dir);
}

ExperimentReport start_report(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.experiment = std::string(to_string(cfg.experiment));
  report.name = cfg.name;
  report.config = cfg;
  report.datasets = nlohmann::json::array();
  return report;
}

void finish_report(ExperimentReport& report, Clock::time_point started) {
  report.aggregates = aggregate(report.cells);
  report.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - started).count();
}

nlohmann::json dataset_record(const DatasetSource& src, const LoadedData& loaded,
                              const LabeledDataset& prepared) {
  nlohmann::json rec = dataset_metadata(prepared);
  rec["name"] = src.label();
  rec["origin"] = loaded.origin;
  rec["synthetic_fallback"] = loaded.fallback_used;
  rec["raw_features"] = loaded.pool.cols();
  return rec;
}

double linear_accuracy(const LearnerSpec& learner, const LabeledDataset& train,
                       const LabeledDataset& test, const RngSeed& seed) {
  LinearModel model;
  const std::string name = learner.label();
  if (name == "svm") {
    model = train_svm(train, learner.c_or_default(), seed);
  } else if (name == "lasso") {
    model = train_lasso(train, learner.lambda_or_default(), seed);
  } else if (name == "ridge") {
    model = train_ridge(train, learner.lambda_or_default());
  } else {
    throw ConfigError("learner '" + name + "' is not a linear classifier");
  }
  return 100.0 * classification_accuracy(predict(model, test), test.labels);
}

// The pool is split unless the source ships its own test set.
std::pair<LabeledDataset, LabeledDataset> train_test(const ExperimentConfig& cfg,
                                                     const DatasetSource& src,
                                                     const LoadedData& loaded,
                                                     const LabeledDataset& prepared,
                                                     std::uint64_t seed) {
  if (loaded.fixed_split) return *loaded.fixed_split;
  return split(prepared, cfg.split, RngSeed{seed, "split/" + src.label()});
}

nlohmann::json estimate_record(const MiEstimate& est, double alpha) {
  const auto verdict = classify_noise(est, alpha);
  return nlohmann::json{{"mi_nats", est.nats()},
                        {"mi_bits", est.bits()},
                        {"raw_nats", est.raw_value * std::log(est.base)},
                        {"method", "histogram-plugin"},
                        {"bins", est.bin_spec},
                        {"samples", est.sample_count},
                        {"alpha_nats", alpha},
                        {"verdict", to_string(verdict.verdict)}};
}

}  // namespace

ExperimentReport run_enhanced_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = Clock::now();
  ExperimentReport report = start_report(cfg);
  const fs::path data_dir = data_dir_from_env();
  report.notes["test_set"] = "never corrupted";
  report.notes["accuracy"] = "percent";
  report.notes["estimates"] =
      "histogram plug-in MI between labels and the row-mean perturbation, first seed only";

  for (const auto& src : cfg.datasets) {
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      const std::uint64_t seed = cfg.seeds[si];
      const LoadedData loaded = load_source(src, RngSeed{seed, "data/" + src.label()}, cfg.base_dir, data_dir);
      const LabeledDataset prepared = preprocess(loaded.pool, src);
      const auto [train, test] = train_test(cfg, src, loaded, prepared, seed);
      if (si == 0) report.datasets.push_back(dataset_record(src, loaded, prepared));

      for (std::size_t ni = 0; ni < cfg.noise.size(); ++ni) {
        const std::string noise_label = cfg.noise[ni].label();
        for (double ratio : cfg.ratios) {
          NoiseSpec spec = cfg.noise[ni];
          spec.ratio = ratio;
          spec.seed = RngSeed{seed, "noise/" + src.label() + "/" + std::to_string(ni)};
          if (!spec.range) spec.range = ValueRange::of(train);
          const LabeledDataset noisy = apply_noise(train, spec);

          for (const auto& learner : cfg.learners) {
            const double acc = linear_accuracy(learner, noisy, test,
                                               RngSeed{seed, "learner/" + learner.label()});
            report.cells.push_back(ReportCell{
                CellKey{src.label(), noise_label, learner.label(), "test", ratio, std::nullopt,
                        std::nullopt, "accuracy"},
                seed, acc});
          }

          if (si == 0) {
            const Matrix perturbation = (noisy.features - train.features).rowwise().mean();
            const MiEstimate est = estimate_mi_histogram(train.labels, perturbation);
            nlohmann::json rec = estimate_record(est, cfg.alpha);
            rec["dataset"] = src.label();
            rec["noise"] = noise_label;
            rec["ratio"] = ratio;
            rec["seed"] = seed;
            report.estimates.push_back(std::move(rec));
          }
        }
      }
    }
  }
  finish_report(report, started);
  return report;
}

ExperimentReport run_dimension_table(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = Clock::now();
  ExperimentReport report = start_report(cfg);
  const fs::path data_dir = data_dir_from_env();
  report.notes["accuracy"] = "percent";
  report.notes["columns"] = "acc = baseline, pi-acc = with u || sgn(Pu), gain = pi-acc - acc";
  report.notes["ridge"] = "ridge least squares on one-hot targets stands in for DLSR";
  report.notes["estimates"] =
      "histogram plug-in MI between labels and up to 3 appended sign features, first seed only";

  for (const auto& src : cfg.datasets) {
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      const std::uint64_t seed = cfg.seeds[si];
      const LoadedData loaded = load_source(src, RngSeed{seed, "data/" + src.label()}, cfg.base_dir, data_dir);
      const LabeledDataset prepared = preprocess(loaded.pool, src);
      const auto [train, test] = train_test(cfg, src, loaded, prepared, seed);
      if (si == 0) report.datasets.push_back(dataset_record(src, loaded, prepared));

      for (const auto& learner : cfg.learners) {
        const RngSeed learner_seed{seed, "learner/" + learner.label()};
        const double acc = linear_accuracy(learner, train, test, learner_seed);
        const auto it = src.m_by_learner.find(learner.label());
        const std::vector<int>& ms = it != src.m_by_learner.end() ? it->second : cfg.dimension_m;
        for (int m : ms) {
          // Train and test share P because both derive it from the same stream.
          // m = 0 is the control: nothing is appended.
          const RngSeed noise_seed{seed, "dimension/" + src.label() + "/m" + std::to_string(m)};
          const LabeledDataset train_pi = m == 0 ? train : apply_dimension_noise(train, m, noise_seed);
          const LabeledDataset test_pi = m == 0 ? test : apply_dimension_noise(test, m, noise_seed);
          const double pi_acc = linear_accuracy(learner, train_pi, test_pi, learner_seed);
          const auto cell = [&](const char* stage, double value) {
            report.cells.push_back(ReportCell{
                CellKey{src.label(), "dimension", learner.label(), stage, std::nullopt, m,
                        std::nullopt, "accuracy"},
                seed, value});
          };
          cell("acc", acc);
          cell("pi-acc", pi_acc);
          cell("gain", pi_acc - acc);

          if (si == 0 && m > 0 && &learner == &cfg.learners.front()) {
            const Eigen::Index d = train.features.cols();
            const Matrix signs = train_pi.features.middleCols(d, std::min(m, 3));
            const MiEstimate est = estimate_mi_histogram(train_pi.labels, signs);
            nlohmann::json rec = estimate_record(est, cfg.alpha);
            rec["dataset"] = src.label();
            rec["m"] = m;
            rec["seed"] = seed;
            report.estimates.push_back(std::move(rec));
          }
        }
      }
    }
  }
  finish_report(report, started);
  return report;
}

RectifiedStages build_rectified_stages(const LabeledDataset& base, const RectifiedCase& rc,
                                       const RngSeed& seed) {
  const auto d = static_cast<Eigen::Index>(base.cols());
  if (rc.noise_blob.mean.size() != d || rc.rectifying_blob.mean.size() != d) {
    throw DimensionError("rectified blobs have dimension " +
                         std::to_string(rc.noise_blob.mean.size()) + "/" +
                         std::to_string(rc.rectifying_blob.mean.size()) + " but '" + base.name +
                         "' has " + std::to_string(d) + " features");
  }
  RectifiedStages stages;
  stages.original = base;
  stages.noisy = inject_instances(stages.original, rc.noise_blob, seed.child("noise"));
  stages.rectified = inject_instances(stages.noisy, rc.rectifying_blob, seed.child("rectify"));
  // The excessive stage holds multiplier x count rectifying rows in total.
  const auto total = static_cast<std::size_t>(
      std::llround(rc.excessive_multiplier * static_cast<double>(rc.rectifying_blob.count)));
  GaussianBlobSpec extra = rc.rectifying_blob;
  extra.count = total > rc.rectifying_blob.count ? total - rc.rectifying_blob.count : 0;
  stages.excessive = inject_instances(stages.rectified, extra, seed.child("excess"));
  return stages;
}

ExperimentReport run_rectified(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = Clock::now();
  ExperimentReport report = start_report(cfg);
  const fs::path data_dir = data_dir_from_env();
  report.notes["metric"] =
      "svm: accuracy on the stage dataset; kmeans: clustering accuracy; lda: angle in degrees "
      "to the original-stage direction";
  report.notes["reference"] = nlohmann::json::object();
  for (const auto& rc : cfg.cases) {
    if (!rc.reference.empty()) report.notes["reference"][rc.label()] = rc.reference;
  }

  static constexpr std::array<const char*, 4> kStages{"original", "noisy", "rectified", "excessive"};
  std::vector<std::string> recorded;
  for (const auto& rc : cfg.cases) {
    const DatasetSource& src = cfg.dataset(rc.dataset);
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      const std::uint64_t seed = cfg.seeds[si];
      const LoadedData loaded = load_source(src, RngSeed{seed, "data/" + src.label()}, cfg.base_dir, data_dir);
      const LabeledDataset prepared = preprocess(loaded.pool, src);
      if (si == 0 && std::find(recorded.begin(), recorded.end(), src.label()) == recorded.end()) {
        report.datasets.push_back(dataset_record(src, loaded, prepared));
        recorded.push_back(src.label());
      }
      const RectifiedStages stages =
          build_rectified_stages(prepared, rc, RngSeed{seed, "rectified/" + rc.label()});
      const std::array<const LabeledDataset*, 4> data{&stages.original, &stages.noisy,
                                                      &stages.rectified, &stages.excessive};

      if (!cfg.output_dir.empty()) {
        const fs::path dir = cfg.output_dir / "stages" / (rc.dataset + "_" + rc.learner);
        fs::create_directories(dir);
        for (std::size_t s = 0; s < 4; ++s) {
          save_csv(*data[s], dir / ("seed" + std::to_string(seed) + "_" + kStages[s] + ".csv"));
        }
      }

      Vector clean_direction;
      for (std::size_t s = 0; s < 4; ++s) {
        const LabeledDataset& stage = *data[s];
        const RngSeed learner_seed{seed, "learner/" + rc.label() + "/" + kStages[s]};
        double value = 0.0;
        std::string metric = "accuracy";
        if (rc.learner == "svm") {
          const LinearModel model = train_svm(stage, rc.c.value_or(1.0), learner_seed);
          value = classification_accuracy(predict(model, stage), stage.labels);
        } else if (rc.learner == "kmeans") {
          const KMeansResult km = kmeans(stage, stage.class_count, learner_seed);
          value = clustering_accuracy(km.assignments, stage.labels, stage.class_count);
        } else {
          const LdaProjection lda = train_lda(stage);
          if (s == 0) clean_direction = lda.direction;
          value = line_angle_degrees(lda.direction, clean_direction);
          metric = "angle_deg";
        }
        if (metric == "accuracy") value *= 100.0;  // percent, like the linear runs
        report.cells.push_back(ReportCell{CellKey{src.label(), "instance", rc.learner, kStages[s],
                                                  std::nullopt, std::nullopt, std::nullopt, metric},
                                          seed, value});
      }
    }
  }
  finish_report(report, started);
  return report;
}

ExperimentReport run_sr_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = Clock::now();
  ExperimentReport report = start_report(cfg);
  const SrSweepSpec& spec = *cfg.sr;
  SrModel model = spec.model(cfg.base_dir);
  model.validate();
  report.notes["units"] = "nats";
  report.notes["mi_exact"] =
      "H - (log B / T) sum_t P(f_t + noise < threshold), the Gaussian closed form";
  report.datasets.push_back(nlohmann::json{{"name", "sr-signal"},
                                           {"signal", spec.signal},
                                           {"points", model.signal.size()},
                                           {"supra_fraction", suprathreshold_fraction(model)}});

  const double log_b = std::log(static_cast<double>(model.amplitude_bins));
  const double h = sr_base_entropy(model);
  const auto exact_mi = [&](double sigma) {
    double missed = 0.0;
    for (double f : model.signal) {
      if (sigma == 0.0) {
        missed += f < model.threshold ? 1.0 : 0.0;
      } else {
        missed += 0.5 * std::erfc((f - model.threshold) / (sigma * std::numbers::sqrt2));
      }
    }
    return h - log_b * missed / static_cast<double>(model.signal.size());
  };

  for (std::uint64_t seed : cfg.seeds) {
    const auto sweep = sr_sigma_sweep(model, spec.sigmas, RngSeed{seed, "sr"});
    for (const auto& r : sweep) {
      const auto cell = [&](const char* metric, double value) {
        report.cells.push_back(ReportCell{CellKey{"sr-signal", "gaussian", "", "", std::nullopt,
                                                  std::nullopt, r.sigma, metric},
                                          seed, value});
      };
      cell("h_unconditioned", r.h_unconditioned);
      cell("h_conditioned", r.h_conditioned);
      cell("mi", r.mi);
      cell("mi_exact", exact_mi(r.sigma));
      cell("standard_error", r.standard_error);

      MiEstimate est;
      est.value = std::max(r.mi, 0.0);
      est.raw_value = r.mi;
      est.base = kNats;
      est.sample_count = model.mc_draws;
      const auto verdict = classify_noise(est, spec.alpha);
      report.estimates.push_back(nlohmann::json{{"sigma", r.sigma},
                                                {"seed", seed},
                                                {"mi_nats", r.mi},
                                                {"standard_error", r.standard_error},
                                                {"mc_tolerance", r.mc_tolerance},
                                                {"alpha_nats", spec.alpha},
                                                {"verdict", to_string(verdict.verdict)}});
    }
  }
  finish_report(report, started);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::enhanced_sweep: return run_enhanced_sweep(cfg);
    case ExperimentKind::dimension_table: return run_dimension_table(cfg);
    case ExperimentKind::rectified: return run_rectified(cfg);
    case ExperimentKind::sr_sweep: return run_sr_sweep(cfg);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace pinoise
