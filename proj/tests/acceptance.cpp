// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "twinbeam/calibrator.hpp"
#include "twinbeam/detector_model.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/field_model.hpp"
#include "twinbeam/moments.hpp"
#include "twinbeam/parallel.hpp"
#include "twinbeam/simulator.hpp"

using namespace twinbeam;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

const PhotoelectronMoments kReferenceMoments =
    PhotoelectronMoments::from_central(2.411, 2.353, 2.489, 2.449, 0.597);

constexpr double kEtaS = 0.243;
constexpr double kEtaI = 0.235;
constexpr std::uint32_t kPixels = 8192;
constexpr double kDarkRate = 1e-5;

TwinBeamModel reference_model() {
  return {FieldComponent::thermal(170.0, 0.058), FieldComponent::thermal(0.0007, 33.2),
          FieldComponent::thermal(0.0101, 10.6)};
}

SimulationConfig reference_config(std::uint64_t shots, std::uint64_t seed) {
  SimulationConfig c;
  c.model = reference_model();
  c.signal = {kPixels, kEtaS, kDarkRate};
  c.idler = {kPixels, kEtaI, kDarkRate};
  c.shots = shots;
  c.seed = seed;
  return c;
}

// ---------------------------------------------------------------------------

Verdict baseline_reproduction() {
  const KlyshkoEstimate k = klyshko_estimate(kReferenceMoments);
  Verdict v;
  v.pass = std::abs(k.eta_s_cov - 0.254) <= 0.001 && std::abs(k.eta_i_cov - 0.248) <= 0.001;
  v.detail = fmt("eta_s=%.5f eta_i=%.5f (want 0.254, 0.248 +-0.001)", k.eta_s_cov, k.eta_i_cov);
  return v;
}

Verdict field_solution() {
  const auto t0 = Clock::now();
  const auto iv = feasible_np_interval(kReferenceMoments, kEtaS, kEtaI);
  if (!iv) return {false, "empty feasible interval"};

  // Normalized violation of each tolerance; a point passes when all are <= 1.
  auto violations = [](const TwinBeamModel& f) {
    const double ns = f.noise_s.mean();
    // Band check: 1 at either edge of [0.02, 0.05], below 1 inside.
    const double ns_band = std::abs(ns - 0.035) / 0.015;
    return std::vector<double>{std::abs(f.pair.mean_per_mode() - 0.058) / 0.002,
                               std::abs(f.pair.modes() - 170.0) / 3.0,
                               std::abs(f.mean_pairs() - 9.9) / 0.1,
                               ns_band,
                               std::abs(f.noise_i.mean() - 0.10) / 0.02};
  };
  const int steps = 200000;
  double best_worst = INFINITY;
  TwinBeamModel best;
  double best_np = 0;
  bool any = false;
  for (int k = 0; k <= steps; ++k) {
    const double np = iv->lo + iv->width() * k / steps;
    TwinBeamModel f;
    try {
      f = solve_field(kReferenceMoments, {kEtaS, kEtaI, np});
    } catch (const InfeasiblePoint&) {
      continue;
    }
    const auto viol = violations(f);
    const double worst = *std::max_element(viol.begin(), viol.end());
    any |= worst <= 1.0;
    if (worst < best_worst) {
      best_worst = worst;
      best = f;
      best_np = np;
    }
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.pass = any && elapsed < 1.0;
  v.detail = fmt(
      "interval [%.4f, %.4f]; closest <n_p>=%.4f: b_p=%.4f M_p=%.2f pairs=%.3f noise_s=%.4f "
      "noise_i=%.4f (want 0.058+-0.002, 170+-3, 9.9+-0.1, 0.02-0.05, 0.10+-0.02); %.2f s",
      iv->lo, iv->hi, best_np, best.pair.mean_per_mode(), best.pair.modes(), best.mean_pairs(),
      best.noise_s.mean(), best.noise_i.mean(), elapsed);
  return v;
}

// Shared by the round-trip and feasibility criteria.
SimulationOutput reference_scale_data() {
  static const SimulationOutput data = simulate_experiment(reference_config(100000, 1));
  return data;
}

Verdict round_trip() {
  const auto t0 = Clock::now();
  const SimulationOutput data = reference_scale_data();
  const Geometry geometry{kPixels, kPixels};
  const CalibrationOptions options;
  CalibrationResult r = calibrate(data.histogram, data.dark, geometry, options);
  const double fit_seconds = seconds_since(t0);
  const BootstrapSummary b =
      bootstrap_uncertainty(data.histogram, data.dark, geometry, options, r, 100, 1);
  const double elapsed = seconds_since(t0);
  const bool recovered =
      std::abs(r.point.eta_s - kEtaS) <= 0.01 && std::abs(r.point.eta_i - kEtaI) <= 0.01;
  const bool precise = !b.degenerate && b.stderr_values.eta_s <= 2e-3 && b.stderr_values.eta_i <= 2e-3;
  Verdict v;
  v.pass = recovered && precise && elapsed < 600.0;
  v.detail = fmt(
      "fit eta_s=%.4f eta_i=%.4f (truth 0.243, 0.235 +-0.01: %s); D_s=%.3g D_i=%.3g; status=%s; "
      "bootstrap stderr %.4f/%.4f over %u replicas, %u failed (want <= 0.002: %s); "
      "fit %.1f s, total %.1f s",
      r.point.eta_s, r.point.eta_i, recovered ? "ok" : "miss", r.detectors.dark_rate_s,
      r.detectors.dark_rate_i, to_string(r.status).c_str(), b.stderr_values.eta_s,
      b.stderr_values.eta_i, b.replicas, b.failures, precise ? "ok" : "miss", fit_seconds, elapsed);
  return v;
}

Verdict oracle_equivalence() {
  const auto t0 = Clock::now();
  const SimulationConfig config = reference_config(1000000, 2);
  const JointDistribution field = jpnd(config.model, 1e-10, 1024);
  const std::size_t c_max = 60;
  const ResponseMatrix ts = detection_matrix(config.signal, field.cutoff_s(), c_max);
  const ResponseMatrix ti = detection_matrix(config.idler, field.cutoff_i(), c_max);
  const JointDistribution pc = jpcd(field, ts, ti);

  PhotocountHistogram h;
  for (const auto& s : simulate_shot_list(config)) h.add(s.first, s.second);
  const double n = static_cast<double>(h.shots());
  double tv = 0.0;
  double covered = 0.0;
  for (std::size_t a = 0; a <= c_max; ++a)
    for (std::size_t b = 0; b <= c_max; ++b) {
      const double p = pc.probabilities(a, b);
      const double f = static_cast<double>(h.count(a, b)) / n;
      tv += std::abs(p - f);
      covered += f;
    }
  // Mass outside either table counts fully.
  tv = 0.5 * (tv + (1.0 - covered) + std::max(0.0, 1.0 - pc.total_mass()));

  const DetectorParams det = config.signal;
  const ResponseMatrix t = detection_matrix(det, 20, c_max);
  double worst_z = 0.0, worst_z_populated = 0.0;
  std::string worst_at = "-";
  std::uint64_t seed = 100;
  for (std::size_t col : {0u, 1u, 5u, 20u}) {
    const std::uint64_t trials = 1000000;
    const auto freq = camera_frequencies(static_cast<std::uint32_t>(col), det, trials, seed++);
    for (std::size_t c = 0; c <= std::max<std::size_t>(c_max, freq.size()); ++c) {
      const double p = c <= c_max ? t(c, col) : 0.0;
      const double f = c < freq.size() ? static_cast<double>(freq[c]) / trials : 0.0;
      const double sigma = std::sqrt(p * (1.0 - p) / trials);
      const double z = sigma > 0 ? std::abs(f - p) / sigma : (f == p ? 0.0 : INFINITY);
      if (p * trials >= 5) worst_z_populated = std::max(worst_z_populated, z);
      if (z > worst_z) {
        worst_z = z;
        worst_at = fmt("T(%zu,%zu)", c, col);
      }
    }
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.pass = tv < 5e-3 && worst_z <= 4.0 && elapsed < 300.0;
  v.detail = fmt("total variation %.5f (want < 0.005); worst column cell %s at %.2f sigma "
                 "(want <= 4), %.2f sigma over cells expecting >= 5 events; %.1f s",
                 tv, worst_at.c_str(), worst_z, worst_z_populated, elapsed);
  return v;
}

// Each property returns an empty string on success.
using Property = std::function<std::string()>;

std::string column_stochasticity() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ue(0.01, 1.0), ud(0.0, 0.1);
  double worst = 0;
  for (std::uint32_t n_pix : {1u, 2u, 5u, 17u, 64u, 300u}) {
    const ResponseMatrix t = detection_matrix({n_pix, ue(rng), ud(rng)}, 400, n_pix);
    for (std::size_t n = 0; n <= t.n_max(); ++n) {
      double s = 0;
      for (std::size_t c = 0; c <= n_pix; ++c) s += t(c, n);
      worst = std::max(worst, std::abs(s - 1.0));
    }
  }
  const ResponseMatrix big = detection_matrix({kPixels, kEtaS, kDarkRate}, 80, 120);
  for (std::size_t n = 0; n <= big.n_max(); ++n) {
    double s = big.column_tail[n];
    for (std::size_t c = 0; c <= big.c_max(); ++c) s += big(c, n);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst <= 1e-9 ? "" : fmt("column sums off by %.3g", worst);
}

std::string no_photon_reduction() {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  auto choose = [](unsigned n, unsigned k) {
    cpp_int r = 1;
    for (unsigned j = 0; j < k; ++j) r = r * (n - j) / (j + 1);
    return r;
  };
  auto power = [](cpp_rational b, unsigned e) {
    cpp_rational r = 1;
    for (unsigned k = 0; k < e; ++k) r *= b;
    return r;
  };
  // Series at n = 0 collapses to the dark binomial identically.
  for (unsigned n_pix : {1u, 3u, 7u, 20u, 45u})
    for (const cpp_rational& d : {cpp_rational(1, 10), cpp_rational(3, 7), cpp_rational(1, 1000)})
      for (unsigned c = 0; c <= n_pix; ++c) {
        cpp_rational series = 0;
        for (unsigned l = 0; l <= c; ++l) {
          const cpp_rational term = cpp_rational(choose(c, l)) * power(1 - d, n_pix - l);
          series += ((c - l) % 2 == 0) ? term : cpp_rational(-term);
        }
        series *= cpp_rational(choose(n_pix, c));
        if (series != cpp_rational(choose(n_pix, c)) * power(d, c) * power(1 - d, n_pix - c))
          return fmt("rational identity fails at N=%u c=%u", n_pix, c);
      }
  // The evaluated matrix column agrees with a 50-digit binomial.
  using boost::multiprecision::cpp_bin_float_50;
  for (const DetectorParams det : {DetectorParams{kPixels, kEtaS, kDarkRate},
                                   DetectorParams{300, 0.5, 0.02}, DetectorParams{20, 0.9, 0.3}}) {
    const std::size_t c_max = std::min<std::size_t>(det.pixels, 40);
    const ResponseMatrix t = detection_matrix(det, 0, c_max);
    for (std::size_t c = 0; c <= c_max; ++c) {
      const cpp_bin_float_50 p = det.dark_rate;
      cpp_bin_float_50 want = pow(1 - p, det.pixels - c) * pow(p, c);
      for (std::size_t j = 0; j < c; ++j) want = want * (det.pixels - j) / (j + 1);
      if (rel(t(c, 0), static_cast<double>(want)) > 1e-13)
        return fmt("T(%zu,0) differs from the dark binomial at N=%u", c, det.pixels);
    }
  }
  return "";
}

std::string jpnd_normalization() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TwinBeamModel> models{reference_model()};
  for (int k = 0; k < 20; ++k)
    models.push_back({FieldComponent::thermal(0.5 + 200 * u(rng), 0.01 + 0.5 * u(rng)),
                      FieldComponent::thermal(0.001 + 2 * u(rng), 0.1 + 5 * u(rng)),
                      FieldComponent::thermal(0.001 + 2 * u(rng), 0.1 + 5 * u(rng))});
  for (double tol : {1e-6, 1e-9}) {
    for (const auto& m : models) {
      const JointDistribution p = jpnd(m, tol, 1024);
      if (p.truncated_mass > tol) return fmt("recorded truncation %.3g above %.0e", p.truncated_mass, tol);
      if (std::abs(p.total_mass() + p.truncated_mass - 1.0) > 1e-9)
        return fmt("mass %.15f plus truncation %.3g is not 1", p.total_mass(), p.truncated_mass);
    }
  }
  return "";
}

std::string moment_round_trip() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lm(std::log(1e-3), std::log(1e4));
  std::uniform_real_distribution<double> lb(std::log(1e-6), std::log(1e3));
  double worst = 0;
  for (int k = 0; k < 20000; ++k) {
    const double m = std::exp(lm(rng)), b = std::exp(lb(rng));
    const ComponentMoments cm = component_moments(FieldComponent::thermal(m, b));
    const FieldComponent back = component_from_moments(cm.mean, cm.variance);
    if (back.kind() != FieldComponent::Kind::thermal) return fmt("M=%g b=%g lost its kind", m, b);
    worst = std::max({worst, rel(back.modes(), m), rel(back.mean_per_mode(), b)});
  }
  return worst <= 1e-12 ? "" : fmt("relative error %.3g", worst);
}

std::string convolution_law() {
  std::mt19937_64 rng(17);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::uint32_t> light(0, 2 + trial % 9), noise(0, 1 + trial % 3);
    std::vector<CountPair> m(20 + trial), d(10 + trial % 17);
    for (auto& s : m) {
      const std::uint32_t pair = light(rng);
      s = {pair + light(rng) / 2, pair + light(rng) / 3};
    }
    for (auto& s : d) s = {noise(rng), noise(rng) * (trial % 2)};
    // Every (light, dark) combination once: the two are exactly independent.
    PhotocountHistogram hm, hd, hc;
    for (const auto& s : m) hm.add(s.first, s.second);
    for (const auto& s : d) hd.add(s.first, s.second);
    for (const auto& a : m)
      for (const auto& b : d) hc.add(a.first + b.first, a.second + b.second);
    const MomentSet want = photocount_moments(hm).value;
    const MomentSet got = subtract_dark(photocount_moments(hc), photocount_moments(hd)).value;
    worst = std::max({worst, rel(got.mean_s, want.mean_s), rel(got.mean_i, want.mean_i),
                      rel(got.second_s, want.second_s), rel(got.second_i, want.second_i),
                      rel(got.cross, want.cross)});
  }
  return worst <= 1e-9 ? "" : fmt("relative error %.3g", worst);
}

std::string forward_inverse() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  int checked = 0;
  for (int t = 0; t < 20000 && checked < 2000; ++t) {
    const double ms = 0.5 + 4 * u(rng), mi = 0.5 + 4 * u(rng);
    const double cov = 0.05 + 0.5 * u(rng) * std::min(ms, mi);
    const auto m = PhotoelectronMoments::from_central(ms, mi, ms + cov + 2 * u(rng),
                                                      mi + cov + 2 * u(rng), cov);
    const double es = 0.05 + 0.9 * u(rng), ei = 0.05 + 0.9 * u(rng);
    const auto iv = feasible_np_interval(m, es, ei);
    if (!iv || !(iv->width() > 0)) continue;
    const double np = iv->lo + (0.02 + 0.96 * u(rng)) * iv->width();
    const MomentSet back = forward_moments(solve_field(m, {es, ei, np}), es, ei).value;
    worst = std::max({worst, rel(back.mean_s, m.value.mean_s), rel(back.mean_i, m.value.mean_i),
                      rel(back.second_s, m.value.second_s), rel(back.second_i, m.value.second_i),
                      rel(back.cross, m.value.cross)});
    ++checked;
  }
  if (checked < 2000) return fmt("only %d feasible points", checked);
  return worst <= 1e-10 ? "" : fmt("relative error %.3g", worst);
}

std::string thread_determinism() {
  const SimulationConfig config = reference_config(30000, 9);
  set_max_threads(1);
  const SimulationOutput a = simulate_experiment(config);
  const CalibrationResult ra = calibrate(a.histogram, a.dark, {kPixels, kPixels});
  set_max_threads(4);
  const SimulationOutput b = simulate_experiment(config);
  const CalibrationResult rb = calibrate(b.histogram, b.dark, {kPixels, kPixels});
  set_max_threads(0);
  if (!(a.histogram == b.histogram) || !(a.dark == b.dark)) return "simulation differs";
  if (ra.point.eta_s != rb.point.eta_s || ra.point.eta_i != rb.point.eta_i ||
      ra.point.mean_pairs != rb.point.mean_pairs || ra.declination != rb.declination)
    return "calibration differs";
  return "";
}

Verdict property_suites() {
  const std::pair<const char*, Property> props[] = {
      {"column stochasticity", column_stochasticity},
      {"no-photon reduction", no_photon_reduction},
      {"jpnd normalization", jpnd_normalization},
      {"moment round trip", moment_round_trip},
      {"convolution law", convolution_law},
      {"forward-inverse", forward_inverse},
      {"thread determinism", thread_determinism}};
  Verdict v;
  std::ostringstream os;
  for (const auto& [name, check] : props) {
    std::string failure;
    try {
      failure = check();
    } catch (const std::exception& e) {
      failure = std::string("threw: ") + e.what();
    }
    if (!failure.empty()) v.pass = false;
    os << name << ' ' << (failure.empty() ? "ok" : "FAILED (" + failure + ")") << "; ";
  }
  v.detail = os.str();
  v.detail.resize(v.detail.size() - 2);
  return v;
}

Verdict feasibility_structure() {
  const auto t0 = Clock::now();
  const SimulationOutput data = reference_scale_data();
  const RawMoments dark = photocount_moments(data.dark);
  const PhotoelectronMoments m = subtract_dark(photocount_moments(data.histogram), dark);
  const KlyshkoEstimate k = klyshko_estimate(m);
  const double step = 0.02;
  const GridSpec grid{range_axis(step, 1.0, step), range_axis(step, 1.0, step)};
  const Surface s = scan_surface(m, data.histogram, detector_setup({kPixels, kPixels}, dark), grid);
  const std::size_t ns = grid.eta_s.size(), ni = grid.eta_i.size();

  // Infeasible cells must sit in the band between the axes and the baseline
  // estimates, and cover the row and column nearest each axis.
  std::size_t infeasible = 0, outside_band = 0;
  bool row_blocked = true, col_blocked = true;
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = 0; b < ni; ++b) {
      const bool bad = !s.at(a, b).declination;
      if (!bad) {
        if (a == 0) row_blocked = false;
        if (b == 0) col_blocked = false;
        continue;
      }
      ++infeasible;
      if (grid.eta_s[a] >= k.eta_s_cov && grid.eta_i[b] >= k.eta_i_cov) ++outside_band;
    }
  const bool near_axes = infeasible > 0 && outside_band == 0 && row_blocked && col_blocked;

  // Strict local minima over feasible 8-neighbours.
  std::size_t minima = 0;
  std::string where;
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = 0; b < ni; ++b) {
      const auto& d = s.at(a, b).declination;
      if (!d) continue;
      bool lowest = true;
      for (int da = -1; da <= 1 && lowest; ++da)
        for (int db = -1; db <= 1; ++db) {
          if (da == 0 && db == 0) continue;
          const long x = static_cast<long>(a) + da, y = static_cast<long>(b) + db;
          if (x < 0 || y < 0 || x >= static_cast<long>(ns) || y >= static_cast<long>(ni)) continue;
          const auto& e = s.at(x, y).declination;
          if (e && *e <= *d) {
            lowest = false;
            break;
          }
        }
      if (lowest) {
        ++minima;
        where += fmt(" (%.2f, %.2f) D=%.6g", grid.eta_s[a], grid.eta_i[b], *d);
      }
    }
  const auto best = s.argmin();
  double es = 0, ei = 0;
  bool close = false;
  if (best) {
    es = s.cells[*best].eta_s;
    ei = s.cells[*best].eta_i;
    close = std::abs(es - kEtaS) <= step + 1e-12 && std::abs(ei - kEtaI) <= step + 1e-12;
  }
  Verdict v;
  v.pass = near_axes && minima == 1 && close;
  v.detail = fmt("%zu of %zu cells infeasible, %zu beyond the baseline band, axis row/column "
                 "blocked %s/%s; %zu local minima (want 1):%s; minimum at (%.2f, %.2f), truth "
                 "(0.243, 0.235), step %.2f: %s; %.1f s",
                 infeasible, s.cells.size(), outside_band, row_blocked ? "yes" : "no",
                 col_blocked ? "yes" : "no", minima, where.c_str(), es, ei, step, close ? "ok" : "miss",
                 seconds_since(t0));
  return v;
}

Verdict convergence_of_methods() {
  const auto t0 = Clock::now();
  // Pure pairs: the covariance estimate exceeds the truth by eta * b_p, so the
  // schedule holds b_p <n_p> fixed while <n_p> grows.
  const double levels[] = {2.0, 4.0, 8.0, 16.0};
  const int seeds = 10;
  std::vector<double> gap_s, gap_i;
  int failed = 0;
  for (double np : levels) {
    const double b = 0.4 / np;
    double sum_s = 0, sum_i = 0;
    int done = 0;
    for (int seed = 1; seed <= seeds; ++seed) {
      SimulationConfig c = reference_config(100000, 1000 * static_cast<std::uint64_t>(np) + seed);
      c.model = {FieldComponent::thermal(np / b, b), {}, {}};
      const SimulationOutput data = simulate_experiment(c);
      try {
        const CalibrationResult r = calibrate(data.histogram, data.dark, {kPixels, kPixels});
        sum_s += std::abs(r.baseline.eta_s_cov - r.point.eta_s);
        sum_i += std::abs(r.baseline.eta_i_cov - r.point.eta_i);
        ++done;
      } catch (const Error&) {
        ++failed;
      }
    }
    gap_s.push_back(done ? sum_s / done : NAN);
    gap_i.push_back(done ? sum_i / done : NAN);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < gap_s.size(); ++k)
    monotone &= gap_s[k] < gap_s[k - 1] && gap_i[k] < gap_i[k - 1];
  Verdict v;
  v.pass = monotone && failed == 0;
  std::ostringstream os;
  for (std::size_t k = 0; k < gap_s.size(); ++k)
    os << "<n_p>=" << levels[k] << ": " << fmt("%.4f/%.4f", gap_s[k], gap_i[k]) << "; ";
  v.detail = "mean |baseline - fit| signal/idler over " + std::to_string(seeds) + " seeds, " +
             os.str() + fmt("%d fits failed; %.1f s", failed, seconds_since(t0));
  return v;
}

}  // namespace

int main() {
  const std::pair<int, Verdict (*)()> criteria[] = {
      {1, baseline_reproduction}, {2, field_solution},       {3, round_trip},
      {4, oracle_equivalence},    {5, property_suites},      {6, feasibility_structure},
      {7, convergence_of_methods}};
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("criterion %d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
