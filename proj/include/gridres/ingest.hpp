// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridres/error.hpp"
#include "gridres/simulator.hpp"

namespace gridres {

/// Wall-clock minute in the configured zone, counted from 1970-01-01 00:00.
/// No zone conversion happens; all records of one dataset share the zone.
struct Timestamp {
  std::int64_t minutes = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

  /// "YYYY-MM-DDTHH:MM", with ' ' accepted for 'T' and optional ":SS"
  /// (seconds are truncated to the minute).
  static std::optional<Timestamp> parse(std::string_view s) {
    auto num = [&](std::size_t pos, std::size_t len, int& out) {
      if (pos + len > s.size()) return false;
      auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
      return r.ec == std::errc{} && r.ptr == s.data() + pos + len;
    };
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (s.size() != 16 && s.size() != 19) return std::nullopt;
    if (!num(0, 4, y) || s[4] != '-' || !num(5, 2, mo) || s[7] != '-' || !num(8, 2, d))
      return std::nullopt;
    if ((s[10] != 'T' && s[10] != ' ') || !num(11, 2, h) || s[13] != ':' || !num(14, 2, mi))
      return std::nullopt;
    if (s.size() == 19 && (s[16] != ':' || !num(17, 2, sec) || sec > 59)) return std::nullopt;
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return Timestamp{static_cast<std::int64_t>(days) * 1440 + h * 60 + mi};
  }

  [[nodiscard]] std::string str() const {
    using namespace std::chrono;
    const std::int64_t day_index = minutes >= 0 ? minutes / 1440 : -((-minutes + 1439) / 1440);
    const std::int64_t in_day = minutes - day_index * 1440;
    const year_month_day ymd{sys_days{days{day_index}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(in_day / 60), static_cast<int>(in_day % 60));
    return buf;
  }
};

inline Timestamp parse_timestamp(std::string_view s) {
  auto t = Timestamp::parse(s);
  if (!t) throw ValidationError("unparseable timestamp '" + std::string(s) + "'");
  return *t;
}

struct RawRecord {
  std::string id;
  Timestamp timestamp;
  double duration_hours = 0.0;  ///< may be negative in raw data
  std::size_t line = 0;         ///< 1-based source line

  [[nodiscard]] bool negative_duration() const noexcept { return duration_hours < 0.0; }
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::vector<RowError> errors;  ///< malformed rows, never silently dropped
  std::size_t data_rows = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

/// Delimited outage records. The header names the columns `id`,
/// `timestamp` and `duration_hours` in any order; other columns are ignored.
/// Comma is the default delimiter, tab is used when the header contains one.
inline ParseResult parse_records(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& out) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    out = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    return true;
  };
  std::string_view header;
  bool have_header = false;
  while (next_line(header))
    if (!detail::trim(header).empty()) {
      have_header = true;
      break;
    }
  if (!have_header) throw ValidationError("missing header row");
  const char delim = header.find('\t') != std::string_view::npos ? '\t' : ',';
  const auto cols = detail::split(header, delim);
  auto column = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i;
    throw ValidationError("missing column '" + std::string(name) + "' in header");
  };
  const std::size_t c_id = column("id");
  const std::size_t c_ts = column("timestamp");
  const std::size_t c_dur = column("duration_hours");

  ParseResult out;
  std::string_view line;
  while (next_line(line)) {
    if (detail::trim(line).empty()) continue;
    ++out.data_rows;
    const auto f = detail::split(line, delim);
    if (f.size() != cols.size()) {
      out.errors.push_back({line_no, "expected " + std::to_string(cols.size()) + " fields, got " +
                                         std::to_string(f.size())});
      continue;
    }
    const auto ts = Timestamp::parse(f[c_ts]);
    if (!ts) {
      out.errors.push_back({line_no, "unparseable timestamp '" + std::string(f[c_ts]) + "'"});
      continue;
    }
    const auto dur = detail::parse_double(f[c_dur]);
    if (!dur) {
      out.errors.push_back({line_no, "unparseable duration '" + std::string(f[c_dur]) + "'"});
      continue;
    }
    out.records.push_back({std::string(f[c_id]), *ts, *dur, line_no});
  }
  return out;
}

namespace detail {

inline void canonical_sort(std::vector<RawRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const RawRecord& a, const RawRecord& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.id != b.id) return a.id < b.id;
    return a.duration_hours < b.duration_hours;
  });
}

}  // namespace detail

/// Records with timestamp in [start, end).
inline std::vector<RawRecord> filter_window(std::vector<RawRecord> records, Timestamp start,
                                            Timestamp end) {
  detail::require(start < end, "window start must precede its end");
  std::erase_if(records, [&](const RawRecord& r) {
    return r.timestamp < start || !(r.timestamp < end);
  });
  return records;
}

/// Duration assigned to a group of dependent failures.
enum class GroupRule { max, first, mean };

inline GroupRule parse_group_rule(std::string_view s) {
  if (s == "max") return GroupRule::max;
  if (s == "first") return GroupRule::first;
  if (s == "mean") return GroupRule::mean;
  throw ValidationError("unknown group rule '" + std::string(s) + "' (max, first, mean)");
}

inline const char* to_string(GroupRule r) {
  switch (r) {
    case GroupRule::max: return "max";
    case GroupRule::first: return "first";
    case GroupRule::mean: return "mean";
  }
  return "?";
}

/// Collapses records that share a `resolution`-minute bucket into one
/// entity stamped at the bucket start. The entity keeps the first id in
/// canonical order (timestamp, id, duration).
inline std::vector<RawRecord> group_dependent(std::vector<RawRecord> records,
                                              int resolution_minutes = 1,
                                              GroupRule rule = GroupRule::max) {
  detail::require(resolution_minutes >= 1, "grouping resolution must be >= 1 minute");
  const std::int64_t res = resolution_minutes;
  auto bucket = [res](Timestamp t) {
    const std::int64_t q = t.minutes >= 0 ? t.minutes / res : -((-t.minutes + res - 1) / res);
    return Timestamp{q * res};
  };
  for (auto& r : records) r.timestamp = bucket(r.timestamp);
  detail::canonical_sort(records);
  std::vector<RawRecord> out;
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    double mx = records[i].duration_hours;
    double sum = 0.0;
    while (j < records.size() && records[j].timestamp == records[i].timestamp) {
      mx = std::max(mx, records[j].duration_hours);
      sum += records[j].duration_hours;
      ++j;
    }
    RawRecord g = records[i];
    switch (rule) {
      case GroupRule::max: g.duration_hours = mx; break;
      case GroupRule::first: break;
      case GroupRule::mean: g.duration_hours = sum / static_cast<double>(j - i); break;
    }
    out.push_back(std::move(g));
    i = j;
  }
  return out;
}

/// Record accounting through the pipeline:
/// raw = emitted + malformed + window_dropped + merged + negative_dropped.
struct Provenance {
  std::size_t raw = 0;
  std::size_t malformed = 0;
  std::size_t window_dropped = 0;
  std::size_t merged = 0;  ///< records absorbed into a dependent-failure group
  std::size_t negative_dropped = 0;
  std::size_t emitted = 0;

  [[nodiscard]] bool balanced() const noexcept {
    return raw == emitted + malformed + window_dropped + merged + negative_dropped;
  }
};

struct OutageDataset {
  std::vector<OutageEvent> events;  ///< hours since origin, sorted by failure time
  std::vector<std::string> ids;     ///< parallel to events
  Timestamp origin;
  Provenance provenance;

  [[nodiscard]] std::vector<double> failure_times() const {
    std::vector<double> t;
    t.reserve(events.size());
    for (const auto& e : events) t.push_back(e.failure_time);
    return t;
  }
  [[nodiscard]] std::vector<double> durations() const {
    std::vector<double> d;
    d.reserve(events.size());
    for (const auto& e : events) d.push_back(e.duration);
    return d;
  }
};

/// Hours since `origin`; negative-duration entities are dropped and counted.
inline OutageDataset to_dataset(std::vector<RawRecord> records, Timestamp origin,
                                Provenance provenance = {}) {
  detail::canonical_sort(records);
  OutageDataset ds;
  ds.origin = origin;
  for (const auto& r : records) {
    if (r.negative_duration()) {
      ++provenance.negative_dropped;
      continue;
    }
    ds.events.push_back({static_cast<double>(r.timestamp.minutes - origin.minutes) / 60.0,
                         r.duration_hours});
    ds.ids.push_back(r.id);
  }
  provenance.emitted = ds.events.size();
  ds.provenance = provenance;
  return ds;
}

struct IngestConfig {
  Timestamp start;
  Timestamp end;
  std::optional<Timestamp> origin;  ///< defaults to `start`
  int resolution_minutes = 1;
  GroupRule rule = GroupRule::max;
  std::string timezone = "CDT";  ///< label only; timestamps are wall-clock
};

/// parse -> filter_window -> group_dependent -> to_dataset, with provenance.
inline OutageDataset ingest_text(std::string_view text, const IngestConfig& cfg,
                                 std::vector<RowError>* errors = nullptr) {
  ParseResult parsed = parse_records(text);
  Provenance p;
  p.raw = parsed.data_rows;
  p.malformed = parsed.errors.size();
  if (errors) *errors = parsed.errors;
  const std::size_t parsed_count = parsed.records.size();
  auto in_window = filter_window(std::move(parsed.records), cfg.start, cfg.end);
  p.window_dropped = parsed_count - in_window.size();
  const std::size_t before_group = in_window.size();
  auto grouped = group_dependent(std::move(in_window), cfg.resolution_minutes, cfg.rule);
  p.merged = before_group - grouped.size();
  return to_dataset(std::move(grouped), cfg.origin.value_or(cfg.start), p);
}

}  // namespace gridres
