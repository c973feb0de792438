#include "twinbeam/cli.hpp"

#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "twinbeam/calibrator.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/histogram_io.hpp"
#include "twinbeam/moments.hpp"
#include "twinbeam/parallel.hpp"
#include "twinbeam/simulator.hpp"

namespace twinbeam::cli {

namespace {

using nlohmann::json;

struct InputFlags {
  std::string hist;
  std::string dark;
  std::string dark_signal;
  std::string dark_idler;
};

struct FitFlags {
  std::uint32_t pixels_s = 0;
  std::uint32_t pixels_i = 0;
  double grid_step = 0.005;
  double grid_span = 0.5;
  double np_tolerance = 1e-4;
  double simplex_tolerance = 1e-10;
  int simplex_iterations = 200;
  double tail_tolerance = 1e-6;
  std::size_t max_grid = kDefaultMaxGrid;
  std::uint32_t count_margin = 10;
};

struct Settings {
  unsigned threads = 0;
  InputFlags input;
  FitFlags fit;
  // calibrate
  std::string report_out;
  bool no_refine = false;
  std::uint32_t bootstrap = 100;
  std::uint64_t bootstrap_seed = 1;
  double idler_transmission = 0.0;
  std::string export_jpnd;
  std::string export_jpcd;
  std::string export_response_s;
  std::string export_response_i;
  // scan
  std::string surface_out;
  double eta_s_min = 0.0, eta_s_max = 0.0, eta_i_min = 0.0, eta_i_max = 0.0;
  // simulate
  std::string params;
  std::uint64_t shots = 100000;
  std::uint64_t seed = 0;
  std::string out_hist;
  std::string out_dark;
  std::string out_truth;
};

void add_inputs(CLI::App* sub, InputFlags& in) {
  sub->add_option("--hist", in.hist, "Joint photocount histogram CSV (cs,ci,count)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* dark = sub->add_option("--dark", in.dark, "Joint dark-count record CSV (ds,di,count)")
                   ->check(CLI::ExistingFile);
  auto* ds = sub->add_option("--dark-signal", in.dark_signal,
                             "Signal-arm dark counts CSV (d,count); with --dark-idler, merged "
                             "into a product record for independently monitored arms")
                 ->check(CLI::ExistingFile);
  auto* di = sub->add_option("--dark-idler", in.dark_idler, "Idler-arm dark counts CSV (d,count)")
                 ->check(CLI::ExistingFile);
  ds->needs(di);
  di->needs(ds);
  dark->excludes(ds);
  dark->excludes(di);
}

void add_fit(CLI::App* sub, FitFlags& f) {
  sub->add_option("--pixels-s", f.pixels_s, "Pixel count N_s of the signal detector region")
      ->required()
      ->check(CLI::PositiveNumber);
  sub->add_option("--pixels-i", f.pixels_i, "Pixel count N_i of the idler detector region")
      ->required()
      ->check(CLI::PositiveNumber);
  sub->add_option("--grid-step", f.grid_step, "Efficiency grid spacing (absolute efficiency units)")
      ->capture_default_str()
      ->check(CLI::Range(1e-6, 0.5));
  sub->add_option("--grid-span", f.grid_span,
                  "Grid half-width relative to the covariance baseline (fraction)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--np-tolerance", f.np_tolerance,
                  "Relative tolerance of the search over mean pair number (fraction)")
      ->capture_default_str()
      ->check(CLI::Range(1e-12, 0.1));
  sub->add_option("--tail-tolerance", f.tail_tolerance,
                  "Photon-number tail mass dropped per field evaluation (probability)")
      ->capture_default_str()
      ->check(CLI::Range(1e-14, 1e-3));
  sub->add_option("--max-grid", f.max_grid,
                  "Largest photon-number grid per arm (photons + 1)")
      ->capture_default_str()
      ->check(CLI::Range(8, 4096));
  sub->add_option("--count-margin", f.count_margin,
                  "Photocount rows modeled beyond the largest observed count (counts)")
      ->capture_default_str();
}

CalibrationOptions options_from(const Settings& s) {
  CalibrationOptions o;
  o.grid_step = s.fit.grid_step;
  o.grid_span = s.fit.grid_span;
  o.np_rel_tolerance = s.fit.np_tolerance;
  o.simplex_tolerance = s.fit.simplex_tolerance;
  o.simplex_max_iterations = s.fit.simplex_iterations;
  o.tail_tolerance = s.fit.tail_tolerance;
  o.max_grid = s.fit.max_grid;
  o.count_margin = s.fit.count_margin;
  o.refine = !s.no_refine;
  return o;
}

json effective_config(const Settings& s) {
  return {{"pixels-s", s.fit.pixels_s},
          {"pixels-i", s.fit.pixels_i},
          {"grid-step", s.fit.grid_step},
          {"grid-span", s.fit.grid_span},
          {"np-tolerance", s.fit.np_tolerance},
          {"simplex-tolerance", s.fit.simplex_tolerance},
          {"simplex-iterations", s.fit.simplex_iterations},
          {"tail-tolerance", s.fit.tail_tolerance},
          {"max-grid", s.fit.max_grid},
          {"count-margin", s.fit.count_margin},
          {"refine", !s.no_refine},
          {"bootstrap", s.bootstrap},
          {"bootstrap-seed", s.bootstrap_seed},
          {"threads", max_threads()},
          {"hist", s.input.hist},
          {"dark", s.input.dark},
          {"dark-signal", s.input.dark_signal},
          {"dark-idler", s.input.dark_idler}};
}

struct LoadedInputs {
  PhotocountHistogram hist;
  DarkCountRecord dark;
  std::string hist_sha;
  std::string dark_sha;
};

LoadedInputs load_inputs(const InputFlags& in) {
  LoadedInputs out;
  out.hist = load_histogram(in.hist);
  out.hist_sha = file_sha256(in.hist);
  if (!in.dark.empty()) {
    out.dark = load_dark_record(in.dark);
    out.dark_sha = file_sha256(in.dark);
  } else if (!in.dark_signal.empty()) {
    out.dark = product_record(load_arm_counts(in.dark_signal), load_arm_counts(in.dark_idler));
    out.dark_sha = file_sha256(in.dark_signal) + "+" + file_sha256(in.dark_idler);
  } else {
    throw CLI::RequiredError("--dark or --dark-signal/--dark-idler");
  }
  return out;
}

json moment_set_json(const MomentSet& v, const MomentSet& e) {
  return {{"mean_s", v.mean_s},     {"mean_i", v.mean_i},     {"second_s", v.second_s},
          {"second_i", v.second_i}, {"cross", v.cross},       {"mean_s_stderr", e.mean_s},
          {"mean_i_stderr", e.mean_i}, {"second_s_stderr", e.second_s},
          {"second_i_stderr", e.second_i}, {"cross_stderr", e.cross}};
}

int do_moments(const Settings& s, std::ostream& out) {
  const LoadedInputs in = load_inputs(s.input);
  const RawMoments raw = photocount_moments(in.hist);
  const RawMoments dark = photocount_moments(in.dark);
  const PhotoelectronMoments m = subtract_dark(raw, dark);
  json j;
  j["photocounts"] = moment_set_json(raw.value, raw.std_error);
  j["photocounts"]["shots"] = raw.shots;
  j["dark"] = moment_set_json(dark.value, dark.std_error);
  j["dark"]["shots"] = dark.shots;
  j["photoelectrons"] = moment_set_json(m.value, m.std_error);
  j["photoelectrons"]["var_s"] = m.var_s;
  j["photoelectrons"]["var_i"] = m.var_i;
  j["photoelectrons"]["cov"] = m.cov;
  j["photoelectrons"]["var_s_stderr"] = m.var_s_stderr;
  j["photoelectrons"]["var_i_stderr"] = m.var_i_stderr;
  j["photoelectrons"]["cov_stderr"] = m.cov_stderr;
  if (m.value.mean_s > 0.0 && m.value.mean_i > 0.0) {
    const KlyshkoEstimate k = klyshko_estimate(m);
    j["baseline"] = {{"eta_s_klyshko", k.eta_s_cov},       {"eta_i_klyshko", k.eta_i_cov},
                     {"eta_s_klyshko_stderr", k.eta_s_cov_stderr},
                     {"eta_i_klyshko_stderr", k.eta_i_cov_stderr},
                     {"eta_s_raw", k.eta_s_raw},           {"eta_i_raw", k.eta_i_raw}};
  }
  out << j.dump(2) << "\n";
  return kSuccess;
}

int do_calibrate(const Settings& s, std::ostream& out, std::ostream& err) {
  const LoadedInputs in = load_inputs(s.input);
  const Geometry geometry{s.fit.pixels_s, s.fit.pixels_i};
  const CalibrationOptions options = options_from(s);

  Report report;
  report.result = calibrate(in.hist, in.dark, geometry, options);
  if (s.bootstrap > 0) {
    err << "bootstrap: " << s.bootstrap << " replicas\n";
    report.result.bootstrap = bootstrap_uncertainty(in.hist, in.dark, geometry, options,
                                                    report.result, s.bootstrap, s.bootstrap_seed);
  }
  report.histogram_sha256 = in.hist_sha;
  report.dark_sha256 = in.dark_sha;
  report.config = effective_config(s);
  if (s.idler_transmission > 0.0) report.idler_path_transmission = s.idler_transmission;

  const CalibrationResult& r = report.result;
  if (!s.report_out.empty()) write_report(report, s.report_out);
  else out << report_to_json(report).dump(2) << "\n";

  if (!s.export_jpnd.empty()) write_joint_distribution_csv(jpnd(r.model, options.tail_tolerance,
                                                                 options.max_grid),
                                                           s.export_jpnd);
  if (!s.export_response_s.empty() || !s.export_response_i.empty() || !s.export_jpcd.empty()) {
    const JointDistribution field = jpnd(r.model, options.tail_tolerance, options.max_grid);
    const ResponseMatrix ts = detection_matrix(
        {r.detectors.pixels_s, r.point.eta_s, r.detectors.dark_rate_s}, field.cutoff_s(),
        r.diagnostics.c_max_s);
    const ResponseMatrix ti = detection_matrix(
        {r.detectors.pixels_i, r.point.eta_i, r.detectors.dark_rate_i}, field.cutoff_i(),
        r.diagnostics.c_max_i);
    if (!s.export_response_s.empty()) write_response_csv(ts, s.export_response_s);
    if (!s.export_response_i.empty()) write_response_csv(ti, s.export_response_i);
    if (!s.export_jpcd.empty())
      write_joint_distribution_csv(jpcd(field, ts, ti), s.export_jpcd, "cs,ci,p");
  }
  err << std::setprecision(6) << "calibrate: eta_s=" << r.point.eta_s << " eta_i=" << r.point.eta_i
      << " <n_p>=" << r.point.mean_pairs << " D=" << r.declination
      << " status=" << to_string(r.status) << "\n";
  return kSuccess;
}

int do_scan(const Settings& s, std::ostream& out, std::ostream& err) {
  const LoadedInputs in = load_inputs(s.input);
  const RawMoments dark = photocount_moments(in.dark);
  const PhotoelectronMoments m = subtract_dark(photocount_moments(in.hist), dark);
  if (!(m.cov > 0.0))
    throw NonpositiveCovariance("photoelectron covariance is not positive: no-feasible-region");
  const KlyshkoEstimate k = klyshko_estimate(m);
  const DetectorSetup setup = detector_setup({s.fit.pixels_s, s.fit.pixels_i}, dark);

  auto axis = [&](double lo, double hi, double center) {
    if (lo > 0.0 && hi > 0.0) return range_axis(lo, hi, s.fit.grid_step);
    return centered_axis(center, s.fit.grid_span, s.fit.grid_step);
  };
  GridSpec grid{axis(s.eta_s_min, s.eta_s_max, k.eta_s_cov),
                axis(s.eta_i_min, s.eta_i_max, k.eta_i_cov)};
  const Surface surface = scan_surface(m, in.hist, setup, grid, options_from(s));
  if (!s.surface_out.empty()) {
    write_surface_csv(surface, s.surface_out);
  } else {
    out << std::setprecision(17) << "eta_s,eta_i,D\n";
    for (const auto& c : surface.cells) {
      out << c.eta_s << ',' << c.eta_i << ',';
      if (c.declination) out << *c.declination;
      out << '\n';
    }
  }
  err << "scan: " << surface.cells.size() << " cells, " << surface.infeasible_count()
      << " infeasible\n";
  return kSuccess;
}

int do_simulate(const Settings& s, CLI::App* sub, std::ostream& err) {
  SimulationConfig config = truth_from_json(load_json(s.params));
  if (sub->count("--shots") > 0 || config.shots <= 1) config.shots = s.shots;
  if (sub->count("--seed") > 0) config.seed = s.seed;
  const SimulationOutput sim = simulate_experiment(config);
  write_histogram(sim.histogram, s.out_hist);
  if (!s.out_dark.empty()) write_dark_record(sim.dark, s.out_dark);
  if (!s.out_truth.empty()) write_json(truth_to_json(sim.truth), s.out_truth);
  err << "simulate: " << config.shots << " shots, seed " << config.seed << "\n";
  return kSuccess;
}

struct AppBundle {
  CLI::App app{"Absolute efficiency calibration of photon-number-resolving detectors from "
               "twin-beam joint photocount histograms",
               "twinbeam"};
  CLI::App* moments = nullptr;
  CLI::App* calibrate = nullptr;
  CLI::App* scan = nullptr;
  CLI::App* simulate = nullptr;
};

void build(AppBundle& b, Settings& s) {
  CLI::App& app = b.app;
  app.set_config("--config", "", "TOML configuration file; flags given on the command line win");
  app.allow_config_extras(false);
  app.add_option("--threads", s.threads,
                 "Worker thread cap (0 = TWINBEAM_THREADS or hardware concurrency); results do "
                 "not depend on it")
      ->envname("TWINBEAM_THREADS")
      ->capture_default_str();
  app.require_subcommand(1);

  b.moments = app.add_subcommand("moments", "Print photocount, dark and photoelectron moments "
                                            "with the coincidence baseline (JSON to stdout)");
  add_inputs(b.moments, s.input);

  b.calibrate = app.add_subcommand("calibrate", "Fit both detection efficiencies and the field");
  add_inputs(b.calibrate, s.input);
  add_fit(b.calibrate, s.fit);
  b.calibrate->add_option("--out", s.report_out, "Report JSON path (stdout when omitted)");
  b.calibrate->add_option("--simplex-tolerance", s.fit.simplex_tolerance,
                          "Simplex stops when D varies less than this across vertices (absolute)")
      ->capture_default_str();
  b.calibrate->add_option("--simplex-iterations", s.fit.simplex_iterations,
                          "Simplex iteration cap (iterations)")
      ->capture_default_str();
  b.calibrate->add_flag("--no-refine", s.no_refine, "Stop after the coarse grid (no simplex)");
  b.calibrate->add_option("--bootstrap", s.bootstrap,
                          "Bootstrap replicas for standard errors (0 disables)")
      ->capture_default_str();
  b.calibrate->add_option("--bootstrap-seed", s.bootstrap_seed, "Bootstrap root seed")
      ->capture_default_str();
  b.calibrate->add_option("--idler-transmission", s.idler_transmission,
                          "Optional idler path transmission (fraction) reported as a divisor of "
                          "eta_i")
      ->check(CLI::Range(0.0, 1.0));
  b.calibrate->add_option("--export-jpnd", s.export_jpnd,
                          "Write the fitted photon-number distribution as CSV (ns,ni,p)");
  b.calibrate->add_option("--export-jpcd", s.export_jpcd,
                          "Write the fitted photocount distribution as CSV (cs,ci,p)");
  b.calibrate->add_option("--export-response-s", s.export_response_s,
                          "Write the fitted signal response matrix as CSV (c,n,T)");
  b.calibrate->add_option("--export-response-i", s.export_response_i,
                          "Write the fitted idler response matrix as CSV (c,n,T)");

  b.scan = app.add_subcommand("scan", "Minimum declination over <n_p> on an efficiency grid");
  add_inputs(b.scan, s.input);
  add_fit(b.scan, s.fit);
  b.scan->add_option("--out", s.surface_out, "Surface CSV path (eta_s,eta_i,D; stdout when omitted)");
  b.scan->add_option("--eta-s-min", s.eta_s_min,
                     "Lower signal efficiency (fraction; default baseline minus span)");
  b.scan->add_option("--eta-s-max", s.eta_s_max,
                     "Upper signal efficiency (fraction; default baseline plus span)");
  b.scan->add_option("--eta-i-min", s.eta_i_min,
                     "Lower idler efficiency (fraction; default baseline minus span)");
  b.scan->add_option("--eta-i-max", s.eta_i_max,
                     "Upper idler efficiency (fraction; default baseline plus span)");

  b.simulate = app.add_subcommand("simulate", "Monte Carlo twin-beam experiment with known truth");
  b.simulate->add_option("--params", s.params,
                         "Ground-truth JSON (field and detectors, as written by --out-truth)")
      ->required()
      ->check(CLI::ExistingFile);
  b.simulate->add_option("--shots", s.shots, "Number of frames (shots)")->capture_default_str();
  b.simulate->add_option("--seed", s.seed, "Root random seed")->capture_default_str();
  b.simulate->add_option("--out-hist", s.out_hist, "Histogram CSV output path")->required();
  b.simulate->add_option("--out-dark", s.out_dark, "Dark-record CSV output path");
  b.simulate->add_option("--out-truth", s.out_truth, "Ground-truth sidecar JSON output path");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  AppBundle b;
  Settings s;
  build(b, s);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    b.app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    // Renders the selected subcommand's help when there is one.
    out << b.app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << b.app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  }
  set_max_threads(s.threads);
  try {
    if (b.moments->parsed()) return do_moments(s, out);
    if (b.calibrate->parsed()) return do_calibrate(s, out, err);
    if (b.scan->parsed()) return do_scan(s, out, err);
    if (b.simulate->parsed()) return do_simulate(s, b.simulate, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "error [" << e.stage() << "]: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error [model parameters]: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, std::cout, std::cerr);
}

std::vector<std::string> option_names(const std::string& subcommand) {
  AppBundle b;
  Settings s;
  build(b, s);
  const CLI::App* app = subcommand.empty() ? &b.app : b.app.get_subcommand(subcommand);
  std::vector<std::string> names;
  for (const CLI::Option* opt : app->get_options()) {
    for (const std::string& name : opt->get_lnames())
      if (name != "help") names.push_back(name);
  }
  return names;
}

}  // namespace twinbeam::cli
