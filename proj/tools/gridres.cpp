// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
//
// gridres <ingest|fit|test|simulate|resilience|reconstruct> [flags]

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gridres/gridres.hpp"
#include "gridres/io.hpp"

namespace fs = std::filesystem;
using gridres::io::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Global {
  std::uint64_t seed = 0;
  std::string out = ".";
};

std::string out_path(const Global& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

/// Effective option values of `app` (and its parent's globals) as a JSON
/// object. Paths that only choose where output goes are left out.
json effective_config(const CLI::App& app) {
  json cfg = json::object();
  auto add = [&](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "config" || name == "out") continue;
      std::vector<std::string> values = opt->results();
      if (values.empty()) {
        const std::string def = opt->get_default_str();
        if (def.empty()) continue;
        values.push_back(def);
      }
      if (opt->get_expected_max() > 1 || values.size() > 1)
        cfg[name] = values;
      else
        cfg[name] = values.front();
    }
  };
  if (app.get_parent()) add(*app.get_parent());
  add(app);
  return cfg;
}

std::vector<double> grid_to(double step, double end) {
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::ceil(end / step - 1e-9));
  for (std::size_t i = 0; i <= n; ++i) g.push_back(std::min(static_cast<double>(i) * step, end));
  return g;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string input, start, end, origin, group_rule = "max", timezone = "CDT";
  int resolution = 1;
};

int run_ingest(const Global& g, const IngestArgs& a, const CLI::App& app) {
  gridres::IngestConfig cfg;
  cfg.start = gridres::parse_timestamp(a.start);
  cfg.end = gridres::parse_timestamp(a.end);
  if (!a.origin.empty()) cfg.origin = gridres::parse_timestamp(a.origin);
  cfg.resolution_minutes = a.resolution;
  cfg.rule = gridres::parse_group_rule(a.group_rule);
  cfg.timezone = a.timezone;
  if (!(cfg.start < cfg.end)) throw gridres::ValidationError("--start must precede --end");

  const std::string text = gridres::io::read_file(a.input);
  std::vector<gridres::RowError> errors;
  const auto ds = gridres::ingest_text(text, cfg, &errors);
  if (ds.provenance.raw == 0) throw gridres::ValidationError("input has no data rows");

  json report;
  report["provenance"] = gridres::io::to_json(ds.provenance);
  json errs = json::array();
  for (const auto& e : errors) errs.push_back({{"line", e.line}, {"message", e.message}});
  report["malformed_rows"] = errs;
  report["window"] = {{"start", cfg.start.str()}, {"end", cfg.end.str()},
                      {"origin", cfg.origin.value_or(cfg.start).str()},
                      {"timezone", cfg.timezone}};
  report["config"] = effective_config(app);
  gridres::io::write_file(out_path(g, "dataset.csv"), gridres::io::dataset_csv(ds));
  gridres::io::write_file(out_path(g, "provenance.json"), gridres::io::dump(report));
  const auto& p = ds.provenance;
  std::printf("raw=%zu malformed=%zu window_dropped=%zu merged=%zu negative_dropped=%zu emitted=%zu\n",
              p.raw, p.malformed, p.window_dropped, p.merged, p.negative_dropped, p.emitted);
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string dataset;
  std::vector<double> boundaries;
  std::vector<std::size_t> components{3};
  double tau = gridres::kDefaultWindow;
  double bin = gridres::kDefaultBin;
  double horizon = 0.0;
  std::size_t starts = 5;
  double tol = 1e-8;
  int max_iter = 1000;
};

int run_fit(const Global& g, const FitArgs& a, const CLI::App& app) {
  const auto events = gridres::io::read_dataset_events(gridres::io::read_file(a.dataset));
  if (events.empty()) throw gridres::ValidationError("dataset has no events");
  double last = 0.0;
  for (const auto& e : events) last = std::max(last, e.failure_time);
  double horizon = a.horizon;
  if (horizon <= 0.0) horizon = a.boundaries.empty() ? std::ceil(last) : a.boundaries.back();
  if (horizon <= 0.0) horizon = 1.0;
  std::vector<double> bounds = a.boundaries;
  if (bounds.empty()) bounds = {0.0, horizon};
  gridres::detail::require(bounds.size() >= 2, "--boundaries needs at least two edges");
  const std::size_t m = bounds.size() - 1;
  std::vector<std::size_t> comps = a.components;
  if (comps.size() == 1) comps.assign(m, comps.front());
  gridres::detail::require(comps.size() == m, "--components needs one count or one per interval");

  std::vector<double> times;
  for (const auto& e : events) times.push_back(e.failure_time);
  const auto est = gridres::estimate_rate(times, a.tau, a.bin, horizon);
  for (const auto& w : est.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  gridres::FitOptions opt;
  opt.seed = g.seed;
  opt.starts = a.starts;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;
  opt.threads = gridres::thread_count_from_env();
  const auto fit = gridres::fit_duration_model(events, bounds, comps, opt);

  gridres::io::ModelFile model{est.to_rate_function(), a.tau, a.bin, fit.model, {}};
  for (std::size_t i = 0; i < m; ++i) {
    const auto& f = fit.fits[i];
    model.interval_info.push_back({{"samples", fit.samples[i]},
                                   {"log_likelihood", gridres::io::round9(f.log_likelihood)},
                                   {"iterations", f.iterations},
                                   {"converged", f.converged},
                                   {"dropped_components", f.dropped_components}});
  }
  json doc = gridres::io::model_to_json(model, effective_config(app));
  doc["converged"] = fit.converged();
  gridres::io::write_file(out_path(g, "model.json"), gridres::io::dump(doc));

  gridres::io::CsvWriter rate({"t_hours", "rate_per_hour"});
  for (std::size_t i = 0; i < est.grid.size(); ++i) rate.row({est.grid[i], est.rate[i]});
  gridres::io::write_file(out_path(g, "rate.csv"), rate.str());

  for (std::size_t i = 0; i < m; ++i)
    std::printf("interval %zu [%s, %s): n=%zu P{d<13}=%.4f%s\n", i + 1,
                gridres::io::fmt(bounds[i]).c_str(), gridres::io::fmt(bounds[i + 1]).c_str(),
                fit.samples[i], fit.model.mixtures()[i].cdf(13.0),
                fit.fits[i].converged ? "" : " (not converged)");
  if (!fit.converged()) {
    std::fprintf(stderr, "error: EM did not converge in every interval; results flagged\n");
    return kExitNumerical;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// test

struct TestArgs {
  std::string dataset, model;
  std::size_t intervals = 400;
  double alpha = 0.05;
};

int run_test(const Global& g, const TestArgs& a, const CLI::App& app) {
  const auto model = gridres::io::load_model(a.model);
  if (!model.failure_rate) throw gridres::ValidationError("model file has no failure rate");
  const auto events = gridres::io::read_dataset_events(gridres::io::read_file(a.dataset));
  std::vector<double> times;
  for (const auto& e : events) times.push_back(e.failure_time);
  const auto& rate = *model.failure_rate;
  const auto r = gridres::pearson_nhpp_test(times, rate, a.intervals, a.alpha);

  json report;
  report["pearson"] = gridres::io::to_json(r);
  report["summary"] = gridres::io::summary_line(r);
  gridres::io::CsvWriter qq({"exp_quantile", "rescaled_interarrival"});
  if (times.size() >= 10) {
    const auto pts = gridres::qq_points(times, rate);
    for (const auto& p : pts) qq.row({p.theoretical, p.empirical});
    const auto ks = gridres::stats::ks_test_unit_exponential(
        gridres::rescaled_interarrivals(times, rate));
    report["qq"] = {{"points", pts.size()},
                    {"max_deviation_to_0.9", gridres::io::round9(gridres::qq_max_deviation(pts, 0.9))},
                    {"max_deviation", gridres::io::round9(gridres::qq_max_deviation(pts))},
                    {"ks_statistic", gridres::io::round9(ks.statistic)},
                    {"ks_p_value", gridres::io::round9(ks.p_value)}};
  }
  report["config"] = effective_config(app);
  gridres::io::write_file(out_path(g, "test_report.json"), gridres::io::dump(report));
  gridres::io::write_file(out_path(g, "qq.csv"), qq.str());
  std::printf("%s\n", gridres::io::summary_line(r).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// resilience

struct ResilienceArgs {
  std::string model, dataset, curve;
  std::vector<double> weights;
  bool equal_weights = false;
  double grid_step = gridres::kDefaultGridStep;
  double grid_max = 48.0;
  std::size_t smoothing = gridres::kDefaultSmoothing;
  std::optional<double> d0;
};

std::pair<std::vector<double>, std::vector<double>> read_curve(const std::string& path) {
  std::istringstream in(gridres::io::read_file(path));
  std::string line;
  std::getline(in, line);
  std::vector<double> x, s;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (gridres::detail::trim(line).empty()) continue;
    const auto f = gridres::detail::split(line, ',');
    std::optional<double> a, b;
    if (f.size() >= 2) {
      a = gridres::detail::parse_double(f[0]);
      b = gridres::detail::parse_double(f[1]);
    }
    if (!a || !b) throw gridres::ValidationError("curve line " + std::to_string(n) + ": need x,s");
    x.push_back(*a);
    s.push_back(*b);
  }
  return {x, s};
}

int run_resilience(const Global& g, const ResilienceArgs& a, const CLI::App& app) {
  json report;
  gridres::io::CsvWriter out({"x_hours", "s", "s_smoothed", "s_second_derivative"});
  if (!a.curve.empty()) {
    const auto [x, s] = read_curve(a.curve);
    const auto pick = gridres::pick_threshold(x, s, a.smoothing);
    for (std::size_t i = 0; i < x.size(); ++i)
      out.row({x[i], s[i], pick.smoothed[i], pick.second_derivative[i]});
    gridres::ResilienceCurve c;
    c.grid = x;
    c.values = s;
    const double d0 = a.d0.value_or(pick.d0);
    report["d0_hours"] = gridres::io::round9(d0);
    report["d0_overridden"] = a.d0.has_value();
    report["s_at_d0"] = gridres::io::round9(gridres::resilience_at(c, d0));
    report["shape"] = gridres::to_string(pick.shape);
    report["concave_candidate"] = gridres::io::round9(pick.concave_candidate);
    report["convex_candidate"] = gridres::io::round9(pick.convex_candidate);
  } else {
    if (a.model.empty()) throw gridres::ValidationError("need --model or --curve");
    const auto model = gridres::io::load_model(a.model);
    const auto& dm = model.durations;
    const auto& bounds = dm.boundaries();
    std::vector<double> w;
    std::string source;
    if (!a.weights.empty()) {
      w = a.weights;
      source = "given";
    } else if (a.equal_weights) {
      w.assign(dm.interval_count(), 1.0 / static_cast<double>(dm.interval_count()));
      source = "equal";
    } else if (!a.dataset.empty()) {
      const auto ev = gridres::io::read_dataset_events(gridres::io::read_file(a.dataset));
      std::vector<double> t;
      for (const auto& e : ev) t.push_back(e.failure_time);
      w = gridres::interval_weights(t, bounds);
      source = "dataset";
    } else if (model.failure_rate) {
      w = gridres::interval_weights(*model.failure_rate, bounds);
      source = "failure_rate";
    } else {
      throw gridres::ValidationError("no weights: pass --weights, --equal-weights, --dataset, "
                                     "or a model with a failure rate");
    }
    const auto grid = gridres::uniform_grid(a.grid_step, a.grid_max);
    const auto c = gridres::resilience_curve(w, dm, grid, a.smoothing, a.d0);
    for (std::size_t i = 0; i < c.grid.size(); ++i)
      out.row({c.grid[i], c.values[i], c.pick ? c.pick->smoothed[i] : c.values[i],
               c.pick ? c.pick->second_derivative[i] : 0.0});
    report["d0_hours"] = gridres::io::round9(c.d0);
    report["d0_overridden"] = c.d0_overridden;
    report["s_at_d0"] = gridres::io::round9(c.s_at_d0);
    if (c.pick) {
      report["shape"] = gridres::to_string(c.pick->shape);
      report["concave_candidate"] = gridres::io::round9(c.pick->concave_candidate);
      report["convex_candidate"] = gridres::io::round9(c.pick->convex_candidate);
    }
    json ws = json::array();
    for (double x : w) ws.push_back(gridres::io::round9(x));
    report["weights"] = ws;
    report["weight_source"] = source;
    json split = json::array();
    const auto parts = gridres::infant_aging_split(dm, c.d0);
    for (std::size_t i = 0; i < parts.size(); ++i)
      split.push_back({{"interval", i + 1},
                       {"from_hours", gridres::io::round9(bounds[i])},
                       {"to_hours", gridres::io::round9(bounds[i + 1])},
                       {"infant", gridres::io::round9(parts[i].first)},
                       {"aging", gridres::io::round9(parts[i].second)}});
    report["infant_aging"] = split;
  }
  report["config"] = effective_config(app);
  gridres::io::write_file(out_path(g, "curve.csv"), out.str());
  gridres::io::write_file(out_path(g, "resilience.json"), gridres::io::dump(report));
  std::printf("d0=%s s(d0)=%s\n", gridres::io::fmt(report["d0_hours"].get<double>()).c_str(),
              gridres::io::fmt(report["s_at_d0"].get<double>()).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string model;
  std::optional<double> base_rate, surge_peak, surge_end, horizon;
  std::optional<double> weibull_scale, weibull_shape;
  std::size_t replicas = 1000;
  std::size_t event_replicas = 1;
  double grid_step = 0.5;
  std::string origin = "2000-01-01T00:00";
};

int run_simulate(const Global& g, const SimulateArgs& a, const CLI::App& app) {
  const bool surge = a.surge_peak.has_value() || a.surge_end.has_value();
  std::optional<gridres::io::ModelFile> model;
  if (!a.model.empty()) model = gridres::io::load_model(a.model);

  std::optional<gridres::RateFunction> rate;
  std::optional<gridres::SurgeSpec> spec;
  if (surge || a.base_rate) {
    gridres::detail::require(a.horizon.has_value(), "--horizon is required without a model rate");
    if (surge) {
      gridres::detail::require(a.surge_peak && a.surge_end,
                               "surge needs both --surge-peak and --surge-end");
      spec = gridres::SurgeSpec{a.base_rate.value_or(0.0),
                                gridres::RateFunction::constant(*a.surge_peak, *a.surge_end),
                                *a.surge_end};
      rate = gridres::surge_failure_rate(*spec, *a.horizon);
    } else {
      rate = gridres::RateFunction::constant(*a.base_rate, *a.horizon);
    }
  } else if (model && model->failure_rate) {
    rate = model->failure_rate;
  } else {
    throw gridres::ValidationError("need a model with a failure rate, or --base-rate/--surge-* flags");
  }

  std::optional<gridres::DurationModel> g_model;
  if (a.weibull_scale || a.weibull_shape) {
    gridres::detail::require(a.weibull_scale && a.weibull_shape,
                             "give both --weibull-scale and --weibull-shape");
    g_model = gridres::DurationModel::stationary(
        gridres::WeibullMixture::single(*a.weibull_scale, *a.weibull_shape), rate->horizon());
  } else if (model) {
    g_model = model->durations;
  } else {
    throw gridres::ValidationError("need --model or --weibull-scale/--weibull-shape for durations");
  }

  const unsigned threads = gridres::thread_count_from_env();
  gridres::io::CsvWriter ev({"replica", "failure_time_hours", "duration_hours", "recovery_time_hours"});
  std::size_t first_events = 0;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, std::min(a.event_replicas, a.replicas)); ++r) {
    const auto events = gridres::simulate_events(*rate, *g_model, gridres::derive_seed(g.seed, r));
    if (r == 0) {
      first_events = events.size();
      gridres::OutageDataset ds;
      ds.events = events;
      ds.origin = gridres::parse_timestamp(a.origin);
      for (std::size_t i = 0; i < events.size(); ++i) ds.ids.push_back("S" + std::to_string(i));
      gridres::io::write_file(out_path(g, "sim_dataset.csv"), gridres::io::dataset_csv(ds));
    }
    for (const auto& e : events)
      ev.row({static_cast<double>(r), e.failure_time, e.duration, e.recovery_time()});
  }

  const auto grid = grid_to(a.grid_step, rate->horizon());
  const auto s = gridres::summarize_paths(*rate, *g_model, grid, a.replicas, g.seed, threads);
  std::vector<std::string> cols{"t_hours", "nf_mean", "nf_se", "nr_mean", "nr_se",
                                "n_mean",  "n_se",    "n_expected"};
  if (spec) cols.push_back("n_closed_form");
  gridres::io::CsvWriter paths(cols);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i], s.failures_mean[i], s.failures_se[i], s.recoveries_mean[i],
                            s.recoveries_se[i], s.in_failure_mean[i], s.in_failure_se[i],
                            gridres::expected_in_failure(*rate, *g_model, grid[i])};
    if (spec)
      row.push_back(gridres::surge_expected(*spec, *g_model, grid[i],
                                            gridres::RecoveryRegime::general));
    paths.row(row);
  }
  json report;
  report["replicas"] = a.replicas;
  report["events_in_first_replica"] = first_events;
  report["expected_failures"] = gridres::io::round9(rate->total());
  report["failure_rate"] = gridres::io::to_json(*rate);
  report["config"] = effective_config(app);
  gridres::io::write_file(out_path(g, "events.csv"), ev.str());
  gridres::io::write_file(out_path(g, "paths.csv"), paths.str());
  gridres::io::write_file(out_path(g, "simulate.json"), gridres::io::dump(report));
  std::printf("replicas=%zu events(replica 0)=%zu\n", a.replicas, first_events);
  return 0;
}

// ---------------------------------------------------------------------------
// reconstruct

struct ReconstructArgs {
  std::string model, dataset;
  double grid_step = 0.25;
  double quad_step = gridres::kDefaultQuadStep;
};

int run_reconstruct(const Global& g, const ReconstructArgs& a, const CLI::App& app) {
  const auto model = gridres::io::load_model(a.model);
  if (!model.failure_rate) throw gridres::ValidationError("model file has no failure rate");
  const auto& rate = *model.failure_rate;
  const auto& dm = model.durations;
  const auto w = gridres::interval_weights(rate, dm.boundaries());
  const auto stationary = dm.marginalize(w);
  const auto piece = gridres::reconstruct(rate, dm, a.grid_step, a.quad_step);
  const auto flat = gridres::reconstruct(rate, stationary, a.grid_step, a.quad_step);

  std::optional<gridres::SamplePath> observed;
  if (!a.dataset.empty())
    observed.emplace(gridres::io::read_dataset_events(gridres::io::read_file(a.dataset)));

  std::vector<std::string> cols{"t_hours", "failure_rate", "recovery_rate_piecewise",
                                "recovery_rate_stationary", "n_piecewise", "n_stationary"};
  if (observed) cols.push_back("n_observed");
  gridres::io::CsvWriter out(cols);
  double l1_piece = 0.0, l1_flat = 0.0;
  for (std::size_t i = 0; i < piece.grid.size(); ++i) {
    std::vector<double> row{piece.grid[i], piece.failure_rate[i], piece.recovery_rate[i],
                            flat.recovery_rate[i], piece.in_failure[i], flat.in_failure[i]};
    if (observed) {
      const double n = static_cast<double>(observed->in_failure(piece.grid[i]));
      row.push_back(n);
      l1_piece += std::abs(piece.in_failure[i] - n);
      l1_flat += std::abs(flat.in_failure[i] - n);
    }
    out.row(row);
  }
  json report;
  report["intervals"] = dm.interval_count();
  json ws = json::array();
  for (double x : w) ws.push_back(gridres::io::round9(x));
  report["stationary_weights"] = ws;
  if (observed) {
    const double n = static_cast<double>(piece.grid.size());
    report["mean_abs_error"] = {{"piecewise", gridres::io::round9(l1_piece / n)},
                                {"stationary", gridres::io::round9(l1_flat / n)}};
  }
  report["config"] = effective_config(app);
  gridres::io::write_file(out_path(g, "reconstruct.csv"), out.str());
  gridres::io::write_file(out_path(g, "reconstruct.json"), gridres::io::dump(report));
  if (observed)
    std::printf("mean |N_hat - N|: piecewise=%s stationary=%s\n",
                gridres::io::fmt(l1_piece / static_cast<double>(piece.grid.size())).c_str(),
                gridres::io::fmt(l1_flat / static_cast<double>(piece.grid.size())).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Failure and recovery process modelling for power-grid outages"};
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "Read options from a TOML/INI file ([subcommand] sections)");

  Global g;
  app.add_option("--seed", g.seed, "Root random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  const auto pos = [](double lo) { return CLI::Range(lo, std::numeric_limits<double>::max()); };

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Raw outage records -> dataset.csv + provenance.json");
  ingest->add_option("--input", ia.input, "Raw CSV/TSV with id,timestamp,duration_hours")
      ->required()->check(CLI::ExistingFile);
  ingest->add_option("--start", ia.start, "Window start, YYYY-MM-DDTHH:MM")->required();
  ingest->add_option("--end", ia.end, "Window end (exclusive)")->required();
  ingest->add_option("--origin", ia.origin, "Time zero for failure_time_hours (default: start)");
  ingest->add_option("--resolution", ia.resolution, "Grouping resolution, minutes")
      ->capture_default_str()->check(CLI::Range(1, 1440));
  ingest->add_option("--group-rule", ia.group_rule, "Duration kept per group")
      ->capture_default_str()->check(CLI::IsMember({"max", "first", "mean"}));
  ingest->add_option("--timezone", ia.timezone, "Label for the wall-clock timestamps")
      ->capture_default_str();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Dataset -> model.json (rate knots + Weibull mixtures)");
  fit->add_option("--dataset", fa.dataset, "dataset.csv from ingest")->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--boundaries", fa.boundaries, "Failure-time interval edges, hours")
      ->delimiter(',');
  fit->add_option("--components", fa.components, "Mixture components (one, or one per interval)")
      ->delimiter(',')->capture_default_str();
  fit->add_option("--tau", fa.tau, "Moving-average half window, hours")->capture_default_str()
      ->check(pos(1e-9));
  fit->add_option("--bin", fa.bin, "Rate grid spacing, hours")->capture_default_str()
      ->check(pos(1e-9));
  fit->add_option("--horizon", fa.horizon, "Observation horizon, hours (default: last edge)");
  fit->add_option("--starts", fa.starts, "EM initialisations")->capture_default_str()
      ->check(CLI::Range(1, 1000));
  fit->add_option("--tol", fa.tol, "Relative log-likelihood tolerance")->capture_default_str()
      ->check(pos(0.0));
  fit->add_option("--max-iter", fa.max_iter, "EM iteration cap")->capture_default_str()
      ->check(CLI::Range(1, 1000000));

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Pearson NHPP test + QQ points");
  test->add_option("--dataset", ta.dataset, "dataset.csv")->required()->check(CLI::ExistingFile);
  test->add_option("--model", ta.model, "model.json with a failure rate")->required()
      ->check(CLI::ExistingFile);
  test->add_option("--intervals", ta.intervals, "Number of equal intervals m")
      ->capture_default_str()->check(CLI::Range(10, 10000000));
  test->add_option("--alpha", ta.alpha, "Significance level")->capture_default_str()
      ->check(CLI::Range(1e-9, 0.5));

  ResilienceArgs ra;
  auto* res = app.add_subcommand("resilience", "Resilience curve s(x), threshold d0, s(d0)");
  res->add_option("--model", ra.model, "model.json")->check(CLI::ExistingFile);
  res->add_option("--curve", ra.curve, "Precomputed x,s CSV instead of a model")
      ->check(CLI::ExistingFile);
  res->add_option("--dataset", ra.dataset, "Weights from the failure times in dataset.csv")
      ->check(CLI::ExistingFile);
  res->add_option("--weights", ra.weights, "Interval weights")->delimiter(',');
  res->add_flag("--equal-weights", ra.equal_weights, "Equal interval weights");
  res->add_option("--grid-step", ra.grid_step, "Grid step, hours")->capture_default_str()
      ->check(pos(1e-9));
  res->add_option("--grid-max", ra.grid_max, "Grid end, hours")->capture_default_str()
      ->check(pos(1e-9));
  res->add_option("--smoothing", ra.smoothing, "Moving-average window, grid points")
      ->capture_default_str()->check(CLI::Range(1, 1001));
  res->add_option("--d0", ra.d0, "Threshold override, hours")->check(pos(1e-12));

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo events and path summaries");
  sim->add_option("--model", sa.model, "model.json (rate and/or durations)")
      ->check(CLI::ExistingFile);
  sim->add_option("--base-rate", sa.base_rate, "Day-to-day failure rate, per hour")
      ->check(pos(0.0));
  sim->add_option("--surge-peak", sa.surge_peak, "Surge failure rate over base, per hour")
      ->check(pos(0.0));
  sim->add_option("--surge-end", sa.surge_end, "Surge end t1, hours")->check(pos(1e-12));
  sim->add_option("--horizon", sa.horizon, "Simulation horizon, hours")->check(pos(1e-12));
  sim->add_option("--weibull-scale", sa.weibull_scale, "Single Weibull duration scale, hours")
      ->check(pos(1e-12));
  sim->add_option("--weibull-shape", sa.weibull_shape, "Single Weibull duration shape")
      ->check(pos(1e-12));
  sim->add_option("--replicas", sa.replicas, "Replicas for path summaries")
      ->capture_default_str()->check(CLI::Range(1, 100000000));
  sim->add_option("--event-replicas", sa.event_replicas, "Replicas written to events.csv")
      ->capture_default_str();
  sim->add_option("--grid-step", sa.grid_step, "Path grid step, hours")->capture_default_str()
      ->check(pos(1e-9));
  sim->add_option("--origin", sa.origin, "Clock time of t=0 in sim_dataset.csv")
      ->capture_default_str();

  ReconstructArgs ca;
  auto* rec = app.add_subcommand("reconstruct", "Expected number in failure, piecewise vs stationary g");
  rec->add_option("--model", ca.model, "model.json with a failure rate")->required()
      ->check(CLI::ExistingFile);
  rec->add_option("--dataset", ca.dataset, "dataset.csv to compare against")
      ->check(CLI::ExistingFile);
  rec->add_option("--grid-step", ca.grid_step, "Output grid step, hours")->capture_default_str()
      ->check(pos(1e-9));
  rec->add_option("--quad-step", ca.quad_step, "Quadrature panel width, hours")
      ->capture_default_str()->check(pos(1e-9));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*ingest) return run_ingest(g, ia, *ingest);
    if (*fit) return run_fit(g, fa, *fit);
    if (*test) return run_test(g, ta, *test);
    if (*res) return run_resilience(g, ra, *res);
    if (*sim) return run_simulate(g, sa, *sim);
    if (*rec) return run_reconstruct(g, ca, *rec);
  } catch (const gridres::NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const gridres::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}
