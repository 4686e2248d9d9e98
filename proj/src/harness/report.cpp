#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "pinoise/errors.hpp"
#include "pinoise/harness.hpp"

namespace pinoise {

namespace fs = std::filesystem;

namespace {

template <typename T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& value) {
  j[key] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

void key_to_json(nlohmann::json& j, const CellKey& k) {
  j["dataset"] = k.dataset;
  j["noise"] = k.noise;
  j["learner"] = k.learner;
  j["stage"] = k.stage;
  put_optional(j, "ratio", k.ratio);
  put_optional(j, "m", k.m);
  put_optional(j, "sigma", k.sigma);
  j["metric"] = k.metric;
}

CellKey key_from_json(const nlohmann::json& j) {
  CellKey k;
  k.dataset = j.value("dataset", std::string{});
  k.noise = j.value("noise", std::string{});
  k.learner = j.value("learner", std::string{});
  k.stage = j.value("stage", std::string{});
  k.ratio = get_optional<double>(j, "ratio");
  k.m = get_optional<int>(j, "m");
  k.sigma = get_optional<double>(j, "sigma");
  k.metric = j.value("metric", std::string{});
  return k;
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string key_csv(const CellKey& k) {
  std::string line = csv_field(k.dataset) + "," + csv_field(k.noise) + "," + csv_field(k.learner) +
                     "," + csv_field(k.stage) + ",";
  if (k.ratio) line += number(*k.ratio);
  line += ",";
  if (k.m) line += std::to_string(*k.m);
  line += ",";
  if (k.sigma) line += number(*k.sigma);
  line += "," + csv_field(k.metric);
  return line;
}

constexpr const char* kKeyHeader = "dataset,noise,learner,stage,ratio,m,sigma,metric";

}  // namespace

void to_json(nlohmann::json& j, const ReportCell& cell) {
  j = nlohmann::json::object();
  key_to_json(j, cell.key);
  j["seed"] = cell.seed;
  j["value"] = cell.value;
}

void from_json(const nlohmann::json& j, ReportCell& cell) {
  cell.key = key_from_json(j);
  cell.seed = j.at("seed").get<std::uint64_t>();
  cell.value = j.at("value").get<double>();
}

void to_json(nlohmann::json& j, const AggregateRow& row) {
  j = nlohmann::json::object();
  key_to_json(j, row.key);
  j["count"] = row.count;
  j["median"] = row.median;
  j["q1"] = row.q1;
  j["q3"] = row.q3;
  j["iqr"] = row.iqr();
}

void from_json(const nlohmann::json& j, AggregateRow& row) {
  row.key = key_from_json(j);
  row.count = j.at("count").get<std::size_t>();
  row.median = j.at("median").get<double>();
  row.q1 = j.at("q1").get<double>();
  row.q3 = j.at("q3").get<double>();
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidSpecError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidSpecError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<AggregateRow> aggregate(const std::vector<ReportCell>& cells) {
  std::vector<CellKey> order;
  std::vector<std::vector<double>> groups;
  for (const auto& cell : cells) {
    auto it = std::find(order.begin(), order.end(), cell.key);
    if (it == order.end()) {
      order.push_back(cell.key);
      groups.push_back({cell.value});
    } else {
      groups[static_cast<std::size_t>(it - order.begin())].push_back(cell.value);
    }
  }
  std::vector<AggregateRow> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    AggregateRow row;
    row.key = order[i];
    row.count = groups[i].size();
    row.median = quantile(groups[i], 0.5);
    row.q1 = quantile(groups[i], 0.25);
    row.q3 = quantile(groups[i], 0.75);
    out.push_back(std::move(row));
  }
  return out;
}

std::optional<double> ExperimentReport::median(const CellKey& key) const {
  for (const auto& row : aggregates) {
    if (row.key == key) return row.median;
  }
  const auto v = values(key);
  if (v.empty()) return std::nullopt;
  return quantile(v, 0.5);
}

std::vector<double> ExperimentReport::values(const CellKey& key) const {
  std::vector<double> out;
  for (const auto& cell : cells) {
    if (cell.key == key) out.push_back(cell.value);
  }
  return out;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report, bool include_wall_clock) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["name"] = report.name;
  j["config"] = report.config;
  j["datasets"] = report.datasets;
  j["cells"] = nlohmann::json(report.cells);
  j["aggregates"] = nlohmann::json(report.aggregates);
  j["estimates"] = report.estimates;
  j["notes"] = report.notes;
  if (include_wall_clock) j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  try {
    r.experiment = j.at("experiment").get<std::string>();
    r.name = j.value("name", r.experiment);
    r.config = j.value("config", nlohmann::json::object());
    r.datasets = j.value("datasets", nlohmann::json::array());
    r.cells = j.at("cells").get<std::vector<ReportCell>>();
    r.aggregates = j.contains("aggregates") ? j.at("aggregates").get<std::vector<AggregateRow>>()
                                            : aggregate(r.cells);
    r.estimates = j.value("estimates", nlohmann::json::array());
    r.notes = j.value("notes", nlohmann::json::object());
    r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string report_csv(const ExperimentReport& report) {
  std::string out = std::string(kKeyHeader) + ",seed,value\n";
  for (const auto& c : report.cells) {
    out += key_csv(c.key) + "," + std::to_string(c.seed) + "," + number(c.value) + "\n";
  }
  return out;
}

std::string aggregates_csv(const ExperimentReport& report) {
  std::string out = std::string(kKeyHeader) + ",count,median,q1,q3,iqr\n";
  for (const auto& a : report.aggregates) {
    out += key_csv(a.key) + "," + std::to_string(a.count) + "," + number(a.median) + "," +
           number(a.q1) + "," + number(a.q3) + "," + number(a.iqr()) + "\n";
  }
  return out;
}

namespace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Minimal line chart. `x_names`, when given, labels integer x positions.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series,
                       const std::vector<std::string>& x_names = {}) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 1, y1 += 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  const auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  const auto sy = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(kW / 2 - kRight / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double yv = y0 + (y1 - y0) * i / 5.0;
    svg << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << fixed(sy(yv))
        << "\" y2=\"" << fixed(sy(yv)) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(sy(yv) + 4)
        << "\" text-anchor=\"end\">" << fixed(yv) << "</text>\n";
  }
  if (!x_names.empty()) {
    for (std::size_t i = 0; i < x_names.size(); ++i) {
      svg << "<text x=\"" << fixed(sx(static_cast<double>(i))) << "\" y=\"" << kTop + ph + 18
          << "\" text-anchor=\"middle\">" << xml_escape(x_names[i]) << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 5; ++i) {
      const double xv = x0 + (x1 - x0) * i / 5.0;
      svg << "<text x=\"" << fixed(sx(xv)) << "\" y=\"" << kTop + ph + 18
          << "\" text-anchor=\"middle\">" << fixed(xv) << "</text>\n";
    }
  }
  svg << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << kH - 16
      << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << fixed(kTop + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 8];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series[s].points.size(); ++i) {
      if (i > 0) svg << ' ';
      svg << fixed(sx(series[s].points[i].first)) << ',' << fixed(sy(series[s].points[i].second));
    }
    svg << "\"/>\n";
    for (const auto& [x, y] : series[s].points) {
      svg << "<circle cx=\"" << fixed(sx(x)) << "\" cy=\"" << fixed(sy(y)) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kW - kRight + 12 << "\" x2=\"" << kW - kRight + 32 << "\" y1=\""
        << fixed(ly) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kW - kRight + 38 << "\" y=\"" << fixed(ly + 4) << "\">"
        << xml_escape(series[s].name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string file_stem(const std::string& s) {
  std::string out;
  for (char ch : s) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    out += keep ? ch : '_';
  }
  return out;
}

std::string noise_kind_of(const std::string& label) { return label.substr(0, label.find('(')); }

// Ordered unique values of a projection over aggregates.
template <typename F>
std::vector<std::string> unique_in_order(const std::vector<AggregateRow>& rows, F&& pick) {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    std::string v = pick(r);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> report_svgs(const ExperimentReport& report) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto& rows = report.aggregates;
  const std::string stem = file_stem(report.name);

  if (report.experiment == "enhanced-sweep") {
    const auto noises = unique_in_order(rows, [](const AggregateRow& r) { return r.key.noise; });
    std::map<std::string, int> kind_count;
    for (const auto& n : noises) ++kind_count[noise_kind_of(n)];
    std::map<std::string, int> kind_seen;
    for (const auto& noise : noises) {
      std::vector<Series> series;
      for (const auto& r : rows) {
        if (r.key.noise != noise || !r.key.ratio) continue;
        const std::string name = r.key.dataset + "/" + r.key.learner;
        auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
        if (it == series.end()) {
          series.push_back({name, {}});
          it = series.end() - 1;
        }
        it->points.emplace_back(*r.key.ratio, r.median);
      }
      const std::string kind = noise_kind_of(noise);
      std::string file = stem + "_" + file_stem(kind);
      if (kind_count[kind] > 1) file += "_" + std::to_string(kind_seen[kind]++);
      out.emplace_back(file + ".svg",
                       line_chart(noise, "noisy ratio p", "median test accuracy (%)", series));
    }
  } else if (report.experiment == "dimension-table") {
    const auto datasets = unique_in_order(rows, [](const AggregateRow& r) { return r.key.dataset; });
    for (const auto& ds : datasets) {
      std::vector<Series> series;
      for (const auto& r : rows) {
        if (r.key.dataset != ds || r.key.stage != "gain" || !r.key.m) continue;
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const Series& s) { return s.name == r.key.learner; });
        if (it == series.end()) {
          series.push_back({r.key.learner, {}});
          it = series.end() - 1;
        }
        it->points.emplace_back(static_cast<double>(*r.key.m), r.median);
      }
      out.emplace_back(stem + "_" + file_stem(ds) + ".svg",
                       line_chart(ds + ": dimension noise", "appended features m",
                                  "median Pi-ACC - ACC (points)", series));
    }
  } else if (report.experiment == "rectified") {
    const std::vector<std::string> stages{"original", "noisy", "rectified", "excessive"};
    const auto cases = unique_in_order(
        rows, [](const AggregateRow& r) { return r.key.dataset + "/" + r.key.learner; });
    for (const auto& c : cases) {
      Series s{c, {}};
      std::string metric;
      for (const auto& r : rows) {
        if (r.key.dataset + "/" + r.key.learner != c) continue;
        const auto pos = std::find(stages.begin(), stages.end(), r.key.stage) - stages.begin();
        s.points.emplace_back(static_cast<double>(pos), r.median);
        metric = r.key.metric;
      }
      const std::string y = metric == "angle_deg" ? "median angle to clean direction (deg)"
                                                  : "median accuracy (%)";
      out.emplace_back(stem + "_" + file_stem(c) + ".svg",
                       line_chart(c + ": rectified instances", "stage", y, {s}, stages));
    }
  } else if (report.experiment == "sr-sweep") {
    std::vector<Series> series;
    for (const char* metric : {"h_unconditioned", "h_conditioned", "mi", "mi_exact"}) {
      Series s{metric, {}};
      for (const auto& r : rows) {
        if (r.key.metric == metric && r.key.sigma) s.points.emplace_back(*r.key.sigma, r.median);
      }
      series.push_back(std::move(s));
    }
    out.emplace_back(stem + "_entropy.svg",
                     line_chart("task entropy vs noise level", "noise sigma", "nats", series));
  }
  return out;
}

std::vector<fs::path> emit_report(const ExperimentReport& report, const fs::path& dir,
                                  const std::vector<std::string>& formats) {
  for (const auto& f : formats) {
    if (f != "csv" && f != "json" && f != "svg") throw ConfigError("unknown output format '" + f + "'");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.generic_string() + ": " + ec.message());

  std::vector<fs::path> written;
  const auto write = [&](const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.generic_string());
    out << content;
    if (!out) throw Error("failed writing " + path.generic_string());
    written.push_back(path);
  };
  const std::string stem = file_stem(report.name);
  const auto wants = [&](const char* f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };
  if (wants("csv")) {
    write(dir / (stem + ".csv"), report_csv(report));
    write(dir / (stem + "_aggregates.csv"), aggregates_csv(report));
  }
  if (wants("json")) write(dir / (stem + ".json"), report_to_json(report).dump(2) + "\n");
  if (wants("svg")) {
    for (const auto& [name, content] : report_svgs(report)) write(dir / name, content);
  }
  return written;
}

}  // namespace pinoise
