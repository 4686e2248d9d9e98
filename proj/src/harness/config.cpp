#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pinoise/errors.hpp"
#include "pinoise/harness.hpp"
#include "pinoise/pca.hpp"

namespace pinoise {

namespace fs = std::filesystem;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::enhanced_sweep: return "enhanced-sweep";
    case ExperimentKind::dimension_table: return "dimension-table";
    case ExperimentKind::rectified: return "rectified";
    case ExperimentKind::sr_sweep: return "sr-sweep";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  if (text == "enhanced-sweep") return ExperimentKind::enhanced_sweep;
  if (text == "dimension-table") return ExperimentKind::dimension_table;
  if (text == "rectified") return ExperimentKind::rectified;
  if (text == "sr-sweep") return ExperimentKind::sr_sweep;
  throw ConfigError("unknown experiment '" + std::string(text) + "'");
}

namespace {

std::string canonical_learner(const std::string& name) {
  return name == "dlsr" ? std::string("ridge") : name;
}

bool is_linear(const std::string& name) {
  return name == "svm" || name == "lasso" || name == "ridge";
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    const bool found = std::any_of(known.begin(), known.end(),
                                   [&](std::string_view k) { return k == key; });
    require(found, "unknown key '" + key + "' in " + where);
  }
}

}  // namespace

double LearnerSpec::lambda_or_default() const {
  if (lambda) return *lambda;
  return canonical_learner(name) == "lasso" ? 0.01 : 1.0;
}

std::string LearnerSpec::label() const { return canonical_learner(name); }

void LearnerSpec::validate() const {
  const std::string n = canonical_learner(name);
  require(is_linear(n) || n == "kmeans" || n == "lda", "unknown learner '" + name + "'");
  if (c) require(*c > 0.0 && std::isfinite(*c), "svm C must be a positive number");
  if (lambda) require(*lambda >= 0.0 && std::isfinite(*lambda), "lambda must be >= 0");
}

void to_json(nlohmann::json& j, const LearnerSpec& spec) {
  j = nlohmann::json{{"name", spec.label()}};
  const std::string n = spec.label();
  if (n == "svm") j["c"] = spec.c_or_default();
  if (n == "lasso" || n == "ridge") j["lambda"] = spec.lambda_or_default();
}

void from_json(const nlohmann::json& j, LearnerSpec& spec) {
  spec = LearnerSpec{};
  if (j.is_string()) {
    spec.name = j.get<std::string>();
    return;
  }
  reject_unknown_keys(j, {"name", "c", "lambda"}, "learner");
  spec.name = j.at("name").get<std::string>();
  if (j.contains("c")) spec.c = j.at("c").get<double>();
  if (j.contains("lambda")) spec.lambda = j.at("lambda").get<double>();
}

void DatasetSource::validate() const {
  static const std::set<std::string> kSources{"toy", "blobs", "csv", "sector", "rings",
                                              "nuisance-background", "fallback"};
  require(kSources.count(source) == 1, "unknown dataset source '" + source + "'");
  if (source == "blobs") {
    require(!blobs.empty(), "blobs source '" + label() + "' lists no blobs");
    for (const auto& b : blobs) {
      try {
        b.validate();
      } catch (const Error& e) {
        throw ConfigError("dataset '" + label() + "': " + e.what());
      }
    }
  }
  if (source == "csv") require(!path.empty(), "csv source '" + label() + "' needs a path");
  if (source == "fallback" || !fallback.empty()) {
    require(!fallback.empty(), "fallback source '" + label() + "' needs a shape name");
    require(benchmark_shape(fallback).has_value(), "unknown fallback shape '" + fallback + "'");
  }
  require(pca >= 0, "pca dimension must be >= 0");
  require(!(minmax && standardize), "choose either minmax or standardize, not both");
  if (source == "nuisance-background") {
    require(!minmax && !standardize && pca == 0,
            "nuisance-background has a fixed test set and takes no preprocessing");
  }
  for (const auto& [learner, ms] : m_by_learner) {
    require(!ms.empty(), "empty m list for learner '" + learner + "'");
    for (int m : ms) require(m >= 0, "dimension-noise m must be >= 0");
  }
}

void to_json(nlohmann::json& j, const DatasetSource& src) {
  j = nlohmann::json{{"name", src.label()}, {"source", src.source}};
  if (src.source == "csv") {
    j["path"] = src.path.generic_string();
    j["label_column"] = src.label_column;
    j["has_header"] = src.has_header;
  }
  if (!src.fallback.empty()) j["fallback"] = src.fallback;
  if (src.source == "blobs") j["blobs"] = src.blobs;
  if (src.source == "nuisance-background") j["params"] = src.nuisance;
  if (src.source == "sector") j["params"] = src.sector;
  if (src.source == "rings") {
    j["params"] = nlohmann::json{{"count", src.rings_count}, {"jitter", src.rings_jitter}};
  }
  if (src.minmax) j["minmax"] = true;
  if (src.standardize) j["standardize"] = true;
  if (src.pca > 0) j["pca"] = src.pca;
  if (!src.m_by_learner.empty()) j["m_by_learner"] = src.m_by_learner;
}

void from_json(const nlohmann::json& j, DatasetSource& src) {
  src = DatasetSource{};
  reject_unknown_keys(j,
                      {"name", "source", "path", "label_column", "has_header", "fallback", "blobs",
                       "params", "minmax", "standardize", "pca", "m_by_learner"},
                      "dataset");
  src.source = j.value("source", std::string("toy"));
  src.name = j.value("name", src.source);
  src.path = j.value("path", std::string{});
  src.label_column = j.value("label_column", std::size_t{0});
  src.has_header = j.value("has_header", false);
  src.fallback = j.value("fallback", std::string{});
  if (j.contains("blobs")) src.blobs = j.at("blobs").get<std::vector<GaussianBlobSpec>>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  if (src.source == "nuisance-background") src.nuisance = params.get<NuisanceBackgroundSpec>();
  if (src.source == "sector") src.sector = params.get<SectorSpec>();
  if (src.source == "rings") {
    src.rings_count = params.value("count", src.rings_count);
    src.rings_jitter = params.value("jitter", src.rings_jitter);
  }
  src.minmax = j.value("minmax", false);
  src.standardize = j.value("standardize", false);
  src.pca = j.value("pca", 0);
  if (j.contains("m_by_learner")) {
    for (const auto& [learner, ms] : j.at("m_by_learner").items()) {
      src.m_by_learner[canonical_learner(learner)] = ms.get<std::vector<int>>();
    }
  }
}

namespace {

fs::path resolve_csv(const fs::path& path, const fs::path& base_dir, const fs::path& data_dir) {
  if (path.is_absolute()) return path;
  if (!data_dir.empty()) {
    const fs::path candidate = data_dir / path;
    if (fs::exists(candidate)) return candidate;
  }
  return base_dir.empty() ? path : base_dir / path;
}

}  // namespace

LoadedData load_source(const DatasetSource& src, const RngSeed& seed, const fs::path& base_dir,
                       const fs::path& data_dir) {
  LoadedData out;
  const auto use_fallback = [&](const std::string& shape_name) {
    const auto shape = benchmark_shape(shape_name);
    if (!shape) throw ConfigError("unknown fallback shape '" + shape_name + "'");
    out.pool = make_shape_fallback(*shape, seed.child("fallback"));
    out.origin = "synthetic-fallback:" + shape->name;
    out.fallback_used = true;
  };

  if (src.source == "toy") {
    out.pool = make_toy(seed);
    out.origin = "toy";
  } else if (src.source == "blobs") {
    out.pool = generate_blobs(src.blobs, seed, src.label());
    out.origin = "blobs";
  } else if (src.source == "sector") {
    out.pool = make_sector(src.sector, seed);
    out.origin = "sector";
  } else if (src.source == "rings") {
    out.pool = make_rings(src.rings_count, src.rings_jitter, seed);
    out.origin = "rings";
  } else if (src.source == "nuisance-background") {
    out.fixed_split = make_nuisance_background(src.nuisance, seed);
    out.pool = out.fixed_split->first;
    out.origin = "nuisance-background";
  } else if (src.source == "fallback") {
    use_fallback(src.fallback);
  } else if (src.source == "csv") {
    const fs::path resolved = resolve_csv(src.path, base_dir, data_dir);
    if (fs::exists(resolved)) {
      out.pool = load_csv(resolved, src.label_column, src.has_header);
      out.origin = resolved.filename().generic_string();
    } else if (!src.fallback.empty()) {
      use_fallback(src.fallback);
    } else {
      throw IngestionError("dataset file not found: " + resolved.generic_string());
    }
  } else {
    throw ConfigError("unknown dataset source '" + src.source + "'");
  }
  out.pool.name = src.label();
  if (out.fixed_split) {
    out.fixed_split->first.name = src.label() + "/train";
    out.fixed_split->second.name = src.label() + "/test";
  }
  return out;
}

LabeledDataset preprocess(const LabeledDataset& ds, const DatasetSource& src) {
  LabeledDataset out = ds;
  if (src.standardize) {
    const Eigen::RowVectorXd mean = out.features.colwise().mean();
    out.features.rowwise() -= mean;
    for (Eigen::Index c = 0; c < out.features.cols(); ++c) {
      const double sd = std::sqrt(out.features.col(c).squaredNorm() /
                                  static_cast<double>(std::max<Eigen::Index>(out.features.rows() - 1, 1)));
      if (sd > 0.0) out.features.col(c) /= sd;
    }
  }
  if (src.minmax) out = minmax_scale(out);
  if (src.pca > 0) {
    if (static_cast<std::size_t>(src.pca) > out.cols()) {
      throw DimensionError("pca dimension " + std::to_string(src.pca) + " exceeds " +
                           std::to_string(out.cols()) + " features of '" + src.label() + "'");
    }
    LabeledDataset projected = pca_project(out, static_cast<std::size_t>(src.pca)).projected;
    projected.name = out.name;
    out = std::move(projected);
  }
  return out;
}

void to_json(nlohmann::json& j, const RectifiedCase& rc) {
  j = nlohmann::json{{"dataset", rc.dataset},
                     {"learner", rc.learner},
                     {"noise_blob", rc.noise_blob},
                     {"rectifying_blob", rc.rectifying_blob},
                     {"excessive_multiplier", rc.excessive_multiplier}};
  if (rc.c) j["c"] = *rc.c;
  if (!rc.reference.empty()) j["reference"] = rc.reference;
}

void from_json(const nlohmann::json& j, RectifiedCase& rc) {
  rc = RectifiedCase{};
  reject_unknown_keys(j,
                      {"dataset", "learner", "noise_blob", "rectifying_blob",
                       "excessive_multiplier", "c", "reference"},
                      "rectified case");
  rc.dataset = j.at("dataset").get<std::string>();
  rc.learner = j.at("learner").get<std::string>();
  rc.noise_blob = j.at("noise_blob").get<GaussianBlobSpec>();
  rc.rectifying_blob = j.at("rectifying_blob").get<GaussianBlobSpec>();
  rc.excessive_multiplier = j.value("excessive_multiplier", 5.0);
  if (j.contains("c")) rc.c = j.at("c").get<double>();
  rc.reference = j.value("reference", std::vector<double>{});
}

SrModel SrSweepSpec::model(const fs::path& base_dir) const {
  SrModel m;
  if (signal == "constant") {
    m = SrModel::constant(value, points, threshold, floor, ceiling);
  } else if (signal == "sine") {
    m = SrModel::sine(value, amplitude, cycles, points, threshold, floor, ceiling);
  } else if (signal == "csv") {
    const fs::path p = csv.is_absolute() || base_dir.empty() ? csv : base_dir / csv;
    std::ifstream in(p);
    if (!in) throw IngestionError("cannot open signal file " + p.generic_string());
    std::string line;
    std::size_t row = 0;
    m.threshold = threshold;
    m.floor = floor;
    m.ceiling = ceiling;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty() || line == "\r") continue;
      try {
        std::size_t used = 0;
        const double v = std::stod(line, &used);
        m.signal.push_back(v);
      } catch (const std::exception&) {
        throw IngestionError("signal file row " + std::to_string(row) + ": not a number");
      }
    }
    for (std::size_t t = 0; t < m.signal.size(); ++t) m.time_grid.push_back(static_cast<double>(t));
  } else {
    throw ConfigError("unknown sr signal '" + signal + "'");
  }
  m.amplitude_bins = amplitude_bins;
  m.mc_draws = mc_draws;
  return m;
}

void to_json(nlohmann::json& j, const SrSweepSpec& s) {
  j = nlohmann::json{{"signal", s.signal},          {"value", s.value},
                     {"points", s.points},          {"threshold", s.threshold},
                     {"floor", s.floor},            {"ceiling", s.ceiling},
                     {"amplitude_bins", s.amplitude_bins}, {"mc_draws", s.mc_draws},
                     {"sigmas", s.sigmas},          {"alpha", s.alpha}};
  if (s.signal == "sine") {
    j["amplitude"] = s.amplitude;
    j["cycles"] = s.cycles;
  }
  if (s.signal == "csv") j["csv"] = s.csv.generic_string();
}

void from_json(const nlohmann::json& j, SrSweepSpec& s) {
  s = SrSweepSpec{};
  reject_unknown_keys(j,
                      {"signal", "value", "amplitude", "cycles", "csv", "points", "threshold",
                       "floor", "ceiling", "amplitude_bins", "mc_draws", "sigmas", "alpha"},
                      "sr");
  s.signal = j.value("signal", s.signal);
  s.value = j.value("value", s.value);
  s.amplitude = j.value("amplitude", s.amplitude);
  s.cycles = j.value("cycles", s.cycles);
  s.csv = j.value("csv", std::string{});
  s.points = j.value("points", s.points);
  s.threshold = j.value("threshold", s.threshold);
  s.floor = j.value("floor", s.floor);
  s.ceiling = j.value("ceiling", s.ceiling);
  s.amplitude_bins = j.value("amplitude_bins", s.amplitude_bins);
  s.mc_draws = j.value("mc_draws", s.mc_draws);
  s.sigmas = j.value("sigmas", std::vector<double>{});
  s.alpha = j.value("alpha", s.alpha);
}

std::vector<double> default_ratio_grid() {
  std::vector<double> out;
  // Written as i / 20 so every grid value is the nearest double to its decimal.
  for (int i = 0; i < 20; ++i) out.push_back(static_cast<double>(i) / 20.0);
  return out;
}

const DatasetSource& ExperimentConfig::dataset(std::string_view wanted) const {
  for (const auto& d : datasets) {
    if (d.label() == wanted) return d;
  }
  throw ConfigError("no dataset named '" + std::string(wanted) + "'");
}

void ExperimentConfig::validate() const {
  require(!seeds.empty(), "at least one seed is required");
  for (const auto& f : formats) {
    require(f == "csv" || f == "json" || f == "svg", "unknown output format '" + f + "'");
  }
  require(split.train_fraction > 0.0 && split.train_fraction < 1.0,
          "split train_fraction must lie in (0, 1)");
  require(alpha >= 0.0, "alpha must be >= 0");
  std::set<std::string> names;
  for (const auto& d : datasets) {
    d.validate();
    require(names.insert(d.label()).second, "duplicate dataset name '" + d.label() + "'");
  }
  for (const auto& l : learners) l.validate();
  for (double r : ratios) require(r >= 0.0 && r <= 1.0, "ratios must lie in [0, 1]");

  switch (experiment) {
    case ExperimentKind::enhanced_sweep: {
      require(!datasets.empty(), "enhanced-sweep needs a dataset");
      require(!noise.empty(), "enhanced-sweep needs at least one noise spec");
      require(!learners.empty(), "enhanced-sweep needs at least one learner");
      require(!ratios.empty(), "enhanced-sweep needs a ratio list");
      for (const auto& n : noise) {
        require(n.kind == NoiseKind::multiplicative || n.kind == NoiseKind::gaussian ||
                    n.kind == NoiseKind::uniform,
                "enhanced-sweep noise must be multiplicative, gaussian or uniform");
      }
      for (const auto& l : learners) {
        require(is_linear(l.label()), "enhanced-sweep learners must be svm, lasso or ridge");
      }
      break;
    }
    case ExperimentKind::dimension_table: {
      require(!datasets.empty(), "dimension-table needs a dataset");
      require(!learners.empty(), "dimension-table needs at least one learner");
      for (const auto& l : learners) {
        require(is_linear(l.label()), "dimension-table learners must be svm, lasso or ridge");
      }
      for (int m : dimension_m) require(m >= 0, "dimension-noise m must be >= 0");
      for (const auto& d : datasets) {
        for (const auto& l : learners) {
          const bool has = d.m_by_learner.count(l.label()) == 1 || !dimension_m.empty();
          require(has, "no m list for dataset '" + d.label() + "' and learner '" + l.label() + "'");
        }
      }
      break;
    }
    case ExperimentKind::rectified: {
      require(!cases.empty(), "rectified needs at least one case");
      for (const auto& c : cases) {
        require(names.count(c.dataset) == 1, "rectified case refers to unknown dataset '" + c.dataset + "'");
        require(c.learner == "svm" || c.learner == "kmeans" || c.learner == "lda",
                "rectified learner must be svm, kmeans or lda");
        require(c.excessive_multiplier >= 0.0 && std::isfinite(c.excessive_multiplier),
                "excessive_multiplier must be >= 0");
        require(!c.c || (*c.c > 0.0 && std::isfinite(*c.c)), "rectified svm c must be > 0");
        require(c.noise_blob.mean.size() == c.rectifying_blob.mean.size(),
                "noise and rectifying blobs differ in dimension");
        try {
          c.noise_blob.validate();
          c.rectifying_blob.validate();
        } catch (const Error& e) {
          throw ConfigError(std::string("rectified blob: ") + e.what());
        }
        require(dataset(c.dataset).source != "nuisance-background",
                "rectified cases need a single-pool dataset");
      }
      break;
    }
    case ExperimentKind::sr_sweep: {
      require(sr.has_value(), "sr-sweep needs an 'sr' section");
      require(!sr->sigmas.empty(), "sr-sweep needs a sigma list");
      for (double s : sr->sigmas) require(s >= 0.0 && std::isfinite(s), "sigmas must be >= 0");
      require(sr->signal == "constant" || sr->signal == "sine" || sr->signal == "csv",
              "sr signal must be constant, sine or csv");
      require(sr->alpha >= 0.0, "sr alpha must be >= 0");
      if (sr->signal != "csv") {
        try {
          sr->model({}).validate();
        } catch (const Error& e) {
          throw ConfigError(std::string("sr model: ") + e.what());
        }
      }
      break;
    }
  }
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
  j = nlohmann::json{{"experiment", to_string(cfg.experiment)},
                     {"name", cfg.name},
                     {"seeds", cfg.seeds},
                     {"datasets", cfg.datasets},
                     {"learners", cfg.learners},
                     {"split", {{"train_fraction", cfg.split.train_fraction},
                                {"stratified", cfg.split.stratified}}},
                     {"alpha", cfg.alpha},
                     {"formats", cfg.formats}};
  if (!cfg.noise.empty()) j["noise"] = cfg.noise;
  if (!cfg.ratios.empty()) j["ratios"] = cfg.ratios;
  if (!cfg.dimension_m.empty()) j["dimension_m"] = cfg.dimension_m;
  if (!cfg.cases.empty()) j["cases"] = cfg.cases;
  if (cfg.sr) j["sr"] = *cfg.sr;
}

namespace {

std::vector<std::uint64_t> parse_seeds(const nlohmann::json& j) {
  if (j.is_array()) return j.get<std::vector<std::uint64_t>>();
  if (j.is_object()) {
    const auto first = j.at("first").get<std::uint64_t>();
    const auto count = j.at("count").get<std::uint64_t>();
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(first + i);
    return out;
  }
  return {j.get<std::uint64_t>()};
}

}  // namespace

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
  cfg = ExperimentConfig{};
  reject_unknown_keys(j,
                      {"experiment", "name", "seeds", "datasets", "dataset", "noise", "learners",
                       "ratios", "dimension_m", "split", "cases", "sr", "alpha", "output_dir",
                       "formats", "description"},
                      "config");
  cfg.experiment = parse_experiment_kind(j.at("experiment").get<std::string>());
  cfg.name = j.value("name", std::string(to_string(cfg.experiment)));
  if (j.contains("seeds")) cfg.seeds = parse_seeds(j.at("seeds"));
  if (j.contains("dataset")) cfg.datasets.push_back(j.at("dataset").get<DatasetSource>());
  if (j.contains("datasets")) {
    for (const auto& d : j.at("datasets")) cfg.datasets.push_back(d.get<DatasetSource>());
  }
  if (j.contains("noise")) cfg.noise = j.at("noise").get<std::vector<NoiseSpec>>();
  if (j.contains("learners")) cfg.learners = j.at("learners").get<std::vector<LearnerSpec>>();
  if (j.contains("ratios")) {
    const auto& r = j.at("ratios");
    cfg.ratios = r.is_string() && r.get<std::string>() == "default" ? default_ratio_grid()
                                                                   : r.get<std::vector<double>>();
  }
  if (j.contains("dimension_m")) cfg.dimension_m = j.at("dimension_m").get<std::vector<int>>();
  if (j.contains("split")) {
    const auto& s = j.at("split");
    cfg.split.train_fraction = s.value("train_fraction", cfg.split.train_fraction);
    cfg.split.stratified = s.value("stratified", cfg.split.stratified);
  }
  if (j.contains("cases")) cfg.cases = j.at("cases").get<std::vector<RectifiedCase>>();
  if (j.contains("sr")) cfg.sr = j.at("sr").get<SrSweepSpec>();
  cfg.alpha = j.value("alpha", 0.0);
  cfg.output_dir = j.value("output_dir", std::string{});
  if (j.contains("formats")) {
    const auto& f = j.at("formats");
    cfg.formats = f.is_string() ? parse_formats(f.get<std::string>())
                                : f.get<std::vector<std::string>>();
  }
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.generic_string());
  ExperimentConfig cfg;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    cfg = j.get<ExperimentConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.generic_string() + ": " + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("config " + path.generic_string() + ": " + e.what());
  }
  cfg.base_dir = path.parent_path();
  cfg.validate();
  return cfg;
}

std::vector<std::string> parse_formats(std::string_view text) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    out.push_back(item.substr(first, item.find_last_not_of(" \t") - first + 1));
  }
  return out;
}

}  // namespace pinoise
