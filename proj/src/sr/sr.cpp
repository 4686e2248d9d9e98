#include "pinoise/sr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pinoise/errors.hpp"

namespace pinoise {

void SrModel::validate() const {
  if (time_grid.empty()) throw InvalidSpecError("SR time grid is empty");
  if (signal.size() != time_grid.size()) {
    throw InvalidSpecError("SR signal length differs from the time grid");
  }
  for (std::size_t i = 1; i < time_grid.size(); ++i) {
    if (!(time_grid[i] > time_grid[i - 1])) {
      throw InvalidSpecError("SR time grid must be strictly increasing");
    }
  }
  if (!(floor < threshold && threshold <= ceiling)) {
    throw InvalidSpecError("SR model needs floor < threshold <= ceiling");
  }
  if (amplitude_bins < 2) throw InvalidSpecError("SR model needs at least 2 amplitude bins");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw InvalidSpecError("SR noise sigma must be finite and >= 0");
  }
  for (double v : signal) {
    if (!std::isfinite(v)) throw InvalidSpecError("SR signal contains non-finite values");
  }
}

namespace {

std::vector<double> unit_grid(std::size_t points) {
  if (points == 0) throw InvalidSpecError("SR grid needs at least one point");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(points);
  }
  return grid;
}

}  // namespace

SrModel SrModel::constant(double value, std::size_t points, double threshold, double floor,
                          double ceiling) {
  SrModel m;
  m.time_grid = unit_grid(points);
  m.signal.assign(points, value);
  m.threshold = threshold;
  m.floor = floor;
  m.ceiling = ceiling;
  return m;
}

SrModel SrModel::sine(double offset, double amplitude, double cycles, std::size_t points,
                      double threshold, double floor, double ceiling) {
  SrModel m;
  m.time_grid = unit_grid(points);
  m.signal.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    m.signal[i] = offset + amplitude * std::sin(2.0 * std::numbers::pi * cycles * m.time_grid[i]);
  }
  m.threshold = threshold;
  m.floor = floor;
  m.ceiling = ceiling;
  return m;
}

void to_json(nlohmann::json& j, const SrModel& model) {
  j = nlohmann::json{{"time_grid", model.time_grid},
                     {"signal", model.signal},
                     {"threshold", model.threshold},
                     {"floor", model.floor},
                     {"ceiling", model.ceiling},
                     {"amplitude_bins", model.amplitude_bins},
                     {"noise_sigma", model.noise_sigma},
                     {"mc_draws", model.mc_draws}};
}

void from_json(const nlohmann::json& j, SrModel& model) {
  model.time_grid = j.at("time_grid").get<std::vector<double>>();
  model.signal = j.at("signal").get<std::vector<double>>();
  model.threshold = j.at("threshold").get<double>();
  model.floor = j.at("floor").get<double>();
  model.ceiling = j.at("ceiling").get<double>();
  model.amplitude_bins = j.value("amplitude_bins", 64);
  model.noise_sigma = j.value("noise_sigma", 0.0);
  model.mc_draws = j.value("mc_draws", std::size_t{1000});
  model.validate();
}

int amplitude_bin(const SrModel& model, double value) {
  const double width = (model.ceiling - model.floor) / model.amplitude_bins;
  const auto b = static_cast<long>(std::floor((value - model.floor) / width));
  return static_cast<int>(std::clamp<long>(b, 0, model.amplitude_bins - 1));
}

DiscreteDistribution observation_distribution(const SrModel& model, std::size_t t,
                                              double offset) {
  const auto bins = static_cast<std::size_t>(model.amplitude_bins);
  const double observed = model.signal.at(t) + offset;
  if (observed >= model.threshold) {
    return DiscreteDistribution::point_mass(bins, static_cast<std::size_t>(amplitude_bin(model, observed)));
  }
  return DiscreteDistribution::uniform(bins);
}

double suprathreshold_fraction(const SrModel& model) {
  model.validate();
  const auto hits = std::count_if(model.signal.begin(), model.signal.end(),
                                  [&](double v) { return v >= model.threshold; });
  return static_cast<double>(hits) / static_cast<double>(model.signal.size());
}

double sr_base_entropy(const SrModel& model) {
  model.validate();
  // Per-t entropy is log B off the detected set and 0 on it.
  return (1.0 - suprathreshold_fraction(model)) * std::log(static_cast<double>(model.amplitude_bins));
}

McEstimate sr_conditional_entropy(const SrModel& model, const RngSeed& seed) {
  model.validate();
  if (model.mc_draws < 1) throw InvalidSpecError("SR model needs mc_draws >= 1");
  const double log_b = std::log(static_cast<double>(model.amplitude_bins));
  const auto grid = model.signal.size();
  const auto draws = static_cast<double>(model.mc_draws);

  if (model.noise_sigma == 0.0) {
    return {sr_base_entropy(model), 0.0};
  }

  Rng rng(seed);
  double mean_missed = 0.0;
  double variance_sum = 0.0;
  for (std::size_t t = 0; t < grid; ++t) {
    std::size_t detected = 0;
    for (std::size_t k = 0; k < model.mc_draws; ++k) {
      const double eps = rng.normal(0.0, model.noise_sigma);
      if (model.signal[t] + eps >= model.threshold) ++detected;
    }
    const double missed = 1.0 - static_cast<double>(detected) / draws;
    mean_missed += missed;
    const double smoothed = (static_cast<double>(model.mc_draws - detected) + 1.0) / (draws + 2.0);
    variance_sum += smoothed * (1.0 - smoothed) / draws;
  }
  const auto g = static_cast<double>(grid);
  return {log_b * mean_missed / g, log_b * std::sqrt(variance_sum) / g};
}

void to_json(nlohmann::json& j, const SrEntropyReport& r) {
  j = nlohmann::json{{"sigma", r.sigma},
                     {"h_unconditioned", r.h_unconditioned},
                     {"h_conditioned", r.h_conditioned},
                     {"mi", r.mi},
                     {"standard_error", r.standard_error},
                     {"mc_tolerance", r.mc_tolerance},
                     {"supra_fraction", r.supra_fraction}};
}

std::vector<SrEntropyReport> sr_sigma_sweep(const SrModel& model, std::span<const double> sigmas,
                                            const RngSeed& seed) {
  if (sigmas.empty()) throw InvalidSpecError("SR sweep needs at least one sigma");
  model.validate();
  const double base = sr_base_entropy(model);
  const double supra = suprathreshold_fraction(model);
  std::vector<SrEntropyReport> out;
  out.reserve(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    SrModel m = model;
    m.noise_sigma = sigmas[i];
    const auto cond = sr_conditional_entropy(m, seed.child("sigma" + std::to_string(i)));
    SrEntropyReport r;
    r.sigma = sigmas[i];
    r.h_unconditioned = base;
    r.h_conditioned = cond.value;
    r.mi = base - cond.value;
    r.standard_error = cond.standard_error;
    r.mc_tolerance = 3.0 * cond.standard_error;
    r.supra_fraction = supra;
    out.push_back(r);
  }
  return out;
}

}  // namespace pinoise
