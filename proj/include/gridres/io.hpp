// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridres/duration_model.hpp"
#include "gridres/error.hpp"
#include "gridres/estimators.hpp"
#include "gridres/ingest.hpp"
#include "gridres/rate_function.hpp"

namespace gridres::io {

using nlohmann::json;

inline constexpr const char* kModelFormat = "gridres-model/1";

/// Decimal text with 9 significant digits; the canonical form of every
/// number written to disk.
inline std::string fmt(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

/// x rounded to what fmt() prints.
inline double round9(double x) { return std::strtod(fmt(x).c_str(), nullptr); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << content;
}

/// Comma-separated table with a header row.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  CsvWriter& row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt(values[i]);
    out_ << '\n';
    return *this;
  }

  CsvWriter& raw_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    return *this;
  }

  [[nodiscard]] std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Rate functions and duration models

inline json to_json(const RateFunction& r) {
  json knots = json::array();
  for (const Knot& k : r.knots()) knots.push_back({round9(k.time), round9(k.intensity)});
  return {{"horizon_hours", round9(r.horizon())}, {"knots", knots}};
}

inline RateFunction rate_from_json(const json& j) {
  std::vector<Knot> knots;
  for (const auto& k : j.at("knots")) knots.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
  return RateFunction(std::move(knots), j.at("horizon_hours").get<double>());
}

inline json to_json(const WeibullMixture& g) {
  json comps = json::array();
  for (const auto& c : g.components())
    comps.push_back({{"weight", round9(c.weight)}, {"scale", round9(c.scale)},
                     {"shape", round9(c.shape)}});
  return comps;
}

/// Weights are renormalised on load so 9-digit rounding never trips the
/// sum-to-one check.
inline WeibullMixture mixture_from_json(const json& j) {
  std::vector<WeibullComponent> comps;
  double total = 0.0;
  for (const auto& c : j) {
    comps.push_back({c.at("weight").get<double>(), c.at("scale").get<double>(),
                     c.at("shape").get<double>()});
    total += comps.back().weight;
  }
  detail::require(std::abs(total - 1.0) <= 1e-6, "mixture weights in file do not sum to 1");
  for (auto& c : comps) c.weight /= total;
  return WeibullMixture(std::move(comps));
}

struct ModelFile {
  std::optional<RateFunction> failure_rate;
  double window = kDefaultWindow;
  double bin = kDefaultBin;
  DurationModel durations;
  std::vector<json> interval_info;  ///< fit diagnostics per interval, if any
};

inline json model_to_json(const ModelFile& m, const json& config = json::object()) {
  json out;
  out["format"] = kModelFormat;
  if (m.failure_rate) {
    out["failure_rate"] = to_json(*m.failure_rate);
    out["failure_rate"]["window_hours"] = round9(m.window);
    out["failure_rate"]["bin_hours"] = round9(m.bin);
  }
  json bounds = json::array();
  for (double b : m.durations.boundaries()) bounds.push_back(round9(b));
  json intervals = json::array();
  for (std::size_t i = 0; i < m.durations.interval_count(); ++i) {
    json iv = i < m.interval_info.size() ? m.interval_info[i] : json::object();
    iv["components"] = to_json(m.durations.mixtures()[i]);
    iv["p_below_13h"] = round9(m.durations.mixtures()[i].cdf(13.0));
    intervals.push_back(iv);
  }
  out["duration_model"] = {{"boundaries_hours", bounds},
                           {"tail_policy", m.durations.tail_policy() == TailPolicy::clamp
                                               ? "clamp" : "reject"},
                           {"intervals", intervals}};
  out["config"] = config;
  return out;
}

inline ModelFile model_from_json(const json& j) {
  detail::require(j.value("format", "") == kModelFormat, "not a gridres model file");
  const auto& dm = j.at("duration_model");
  std::vector<double> bounds = dm.at("boundaries_hours").get<std::vector<double>>();
  std::vector<WeibullMixture> mixtures;
  std::vector<json> info;
  for (const auto& iv : dm.at("intervals")) {
    mixtures.push_back(mixture_from_json(iv.at("components")));
    json rest = iv;
    rest.erase("components");
    info.push_back(rest);
  }
  const TailPolicy tail =
      dm.value("tail_policy", "clamp") == "reject" ? TailPolicy::reject : TailPolicy::clamp;
  ModelFile m{std::nullopt, kDefaultWindow, kDefaultBin,
              DurationModel(std::move(bounds), std::move(mixtures), tail), std::move(info)};
  if (j.contains("failure_rate")) {
    m.failure_rate = rate_from_json(j.at("failure_rate"));
    m.window = j.at("failure_rate").value("window_hours", kDefaultWindow);
    m.bin = j.at("failure_rate").value("bin_hours", kDefaultBin);
  }
  return m;
}

inline ModelFile load_model(const std::string& path) {
  try {
    return model_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw ValidationError("malformed model file '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Canonical dataset file: id,timestamp,duration_hours,failure_time_hours

inline std::string dataset_csv(const OutageDataset& ds) {
  CsvWriter w({"id", "timestamp", "duration_hours", "failure_time_hours"});
  for (std::size_t i = 0; i < ds.events.size(); ++i) {
    const auto ts = Timestamp{ds.origin.minutes +
                              static_cast<std::int64_t>(std::llround(ds.events[i].failure_time * 60.0))};
    w.raw_row({i < ds.ids.size() ? ds.ids[i] : std::to_string(i), ts.str(),
               fmt(ds.events[i].duration), fmt(ds.events[i].failure_time)});
  }
  return w.str();
}

/// Events from a canonical dataset file. Rows without `failure_time_hours`
/// fall back to hours since the earliest timestamp.
inline std::vector<OutageEvent> read_dataset_events(const std::string& text) {
  ParseResult parsed = parse_records(text);
  if (!parsed.errors.empty())
    throw ValidationError("dataset line " + std::to_string(parsed.errors.front().line) + ": " +
                          parsed.errors.front().message);
  // Pick up the explicit hours column when present.
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  const auto cols = detail::split(header, header.find('\t') != std::string::npos ? '\t' : ',');
  std::optional<std::size_t> c_hours;
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == "failure_time_hours") c_hours = i;
  std::vector<OutageEvent> events;
  if (c_hours) {
    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
    std::string line;
    std::size_t k = 0;
    while (std::getline(in, line)) {
      if (detail::trim(line).empty()) continue;
      const auto f = detail::split(line, delim);
      const auto t = detail::parse_double(f.at(*c_hours));
      detail::require(t.has_value(), "bad failure_time_hours value");
      const double d = parsed.records.at(k++).duration_hours;
      detail::require(d >= 0.0, "dataset durations must be >= 0");
      events.push_back({*t, d});
    }
  } else {
    Timestamp origin{std::numeric_limits<std::int64_t>::max()};
    for (const auto& r : parsed.records) origin = std::min(origin, r.timestamp);
    for (const auto& r : parsed.records) {
      detail::require(r.duration_hours >= 0.0, "dataset durations must be >= 0");
      events.push_back({static_cast<double>(r.timestamp.minutes - origin.minutes) / 60.0,
                        r.duration_hours});
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const OutageEvent& a, const OutageEvent& b) {
    return a.failure_time < b.failure_time;
  });
  return events;
}

inline json to_json(const Provenance& p) {
  return {{"raw", p.raw},
          {"malformed", p.malformed},
          {"window_dropped", p.window_dropped},
          {"merged", p.merged},
          {"negative_dropped", p.negative_dropped},
          {"emitted", p.emitted},
          {"balanced", p.balanced()}};
}

inline json to_json(const PearsonTestResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"counts", {c.first, c.last}},
                     {"observed", round9(c.observed)},
                     {"expected", round9(c.expected)}});
  json obs = json::array(), exp = json::array();
  for (double o : r.observed) obs.push_back(round9(o));
  for (double e : r.expected) exp.push_back(round9(e));
  return {{"chi_square", round9(r.chi_square)},
          {"dof", r.dof},
          {"threshold", round9(r.threshold)},
          {"alpha", round9(r.alpha)},
          {"decision", r.rejected ? "rejected" : "not rejected"},
          {"intervals", r.intervals},
          {"max_count", r.max_count},
          {"observed", obs},
          {"expected", exp},
          {"cells", cells}};
}

/// "chi2=0.79 dof=2 threshold=5.99 -> not rejected"
inline std::string summary_line(const PearsonTestResult& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "chi2=%.2f dof=%d threshold=%.2f -> %s", r.chi_square, r.dof,
                r.threshold, r.rejected ? "rejected" : "not rejected");
  return buf;
}

}  // namespace gridres::io
