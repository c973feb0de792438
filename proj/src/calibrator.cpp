#include "twinbeam/calibrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "twinbeam/errors.hpp"
#include "twinbeam/numeric.hpp"
#include "twinbeam/parallel.hpp"

namespace twinbeam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_efficiency(double eta, const char* arm) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    std::ostringstream os;
    os << arm << " efficiency " << eta << " outside (0, 1]";
    throw std::invalid_argument(os.str());
  }
}

// Dense normalized histogram on the modeled photocount grid.
class NormalizedHistogram {
 public:
  NormalizedHistogram(const PhotocountHistogram& f, std::size_t rows, std::size_t cols)
      : dense_(rows, cols) {
    const double shots = static_cast<double>(f.shots());
    for (const auto& [key, count] : f.entries()) {
      const double v = static_cast<double>(count) / shots;
      if (key.first < rows && key.second < cols)
        dense_(key.first, key.second) = v;
      else
        outside_sq_ += v * v;
    }
  }

  double declination(const Matrix& p) const {
    CompensatedSum s;
    s += outside_sq_;
    const auto& pd = p.data();
    const auto& fd = dense_.data();
    for (std::size_t k = 0; k < pd.size(); ++k) {
      if (pd[k] > kSupportFloor || fd[k] > 0.0) {
        const double d = pd[k] - fd[k];
        s += d * d;
      }
    }
    return std::sqrt(s.value());
  }

 private:
  Matrix dense_;
  double outside_sq_ = 0.0;
};

// Evaluates D(eta_s, eta_i, <n_p>) against one histogram.
class Objective {
 public:
  Objective(const PhotoelectronMoments& m, const PhotocountHistogram& f,
            const DetectorSetup& det, const CalibrationOptions& opt)
      : moments_(m),
        detectors_(det),
        options_(opt),
        c_max_s_(std::min<std::uint32_t>(det.pixels_s, f.max_signal() + opt.count_margin)),
        c_max_i_(std::min<std::uint32_t>(det.pixels_i, f.max_idler() + opt.count_margin)),
        target_(f, c_max_s_ + 1, c_max_i_ + 1) {}

  ResponseMatrix response_s(double eta) const {
    return detection_matrix({detectors_.pixels_s, eta, detectors_.dark_rate_s},
                            options_.max_grid - 1, c_max_s_);
  }
  ResponseMatrix response_i(double eta) const {
    return detection_matrix({detectors_.pixels_i, eta, detectors_.dark_rate_i},
                            options_.max_grid - 1, c_max_i_);
  }

  /// +inf when the point admits no valid field or the field grid overflows.
  double evaluate(const CandidatePoint& point, const ResponseMatrix& t_s,
                  const ResponseMatrix& t_i) const {
    try {
      const TwinBeamModel model = solve_field(moments_, point);
      const ComponentPmfs pmfs = component_pmfs(model, options_.tail_tolerance, options_.max_grid);
      const JointDistribution p_c = jpcd_from_components(pmfs, t_s, t_i);
      return target_.declination(p_c.probabilities);
    } catch (const InfeasiblePoint&) {
    } catch (const SubPoissonianComponent&) {
    } catch (const CutoffOverflow&) {
    }
    return kInf;
  }

  const PhotoelectronMoments& moments() const { return moments_; }
  std::uint32_t c_max_s() const { return c_max_s_; }
  std::uint32_t c_max_i() const { return c_max_i_; }

 private:
  PhotoelectronMoments moments_;
  DetectorSetup detectors_;
  CalibrationOptions options_;
  std::uint32_t c_max_s_;
  std::uint32_t c_max_i_;
  NormalizedHistogram target_;
};

struct LineMinimum {
  double x = 0.0;
  double value = kInf;
  std::uint32_t evaluations = 0;
};

template <class F>
LineMinimum golden_section(double lo, double hi, double rel_tol, F&& f) {
  constexpr double kInvPhi = 0.6180339887498949;
  LineMinimum best;
  auto eval = [&](double x) {
    const double v = f(x);
    ++best.evaluations;
    if (v < best.value || (v == best.value && x < best.x)) {
      best.value = v;
      best.x = x;
    }
    return v;
  };
  double a = lo, b = hi;
  if (!(b - a > rel_tol * std::max(std::fabs(a), std::fabs(b)))) {
    eval(0.5 * (a + b));
    return best;
  }
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > rel_tol * 0.5 * (std::fabs(c) + std::fabs(d))) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = eval(d);
    }
  }
  return best;
}

SurfaceCell minimize_cell(const Objective& obj, double eta_s, double eta_i,
                          const ResponseMatrix& t_s, const ResponseMatrix& t_i, double rel_tol) {
  SurfaceCell cell;
  cell.eta_s = eta_s;
  cell.eta_i = eta_i;
  const auto interval = feasible_np_interval(obj.moments(), eta_s, eta_i);
  if (!interval) return cell;
  const LineMinimum best = golden_section(interval->lo, interval->hi, rel_tol, [&](double np) {
    return obj.evaluate({eta_s, eta_i, np}, t_s, t_i);
  });
  cell.evaluations = best.evaluations;
  if (std::isfinite(best.value)) {
    cell.declination = best.value;
    cell.mean_pairs = best.x;
  }
  return cell;
}

Surface scan_with(const Objective& obj, const GridSpec& grid, double rel_tol) {
  std::vector<ResponseMatrix> ts(grid.eta_s.size()), ti(grid.eta_i.size());
  parallel_for(ts.size(), [&](std::size_t k) { ts[k] = obj.response_s(grid.eta_s[k]); });
  parallel_for(ti.size(), [&](std::size_t k) { ti[k] = obj.response_i(grid.eta_i[k]); });

  Surface out;
  out.grid = grid;
  out.cells.resize(grid.eta_s.size() * grid.eta_i.size());
  const std::size_t ni = grid.eta_i.size();
  parallel_for(out.cells.size(), [&](std::size_t k) {
    const std::size_t is = k / ni;
    const std::size_t ii = k % ni;
    out.cells[k] = minimize_cell(obj, grid.eta_s[is], grid.eta_i[ii], ts[is], ti[ii], rel_tol);
  });
  return out;
}

// Simplex search over (eta_s, eta_i, t) where <n_p> = lo + t (hi - lo) on
// the feasible interval at (eta_s, eta_i); this keeps the feasible set a box
// in the third coordinate.
struct SimplexOutcome {
  CandidatePoint point;
  double value = kInf;
  int iterations = 0;
  std::uint64_t evaluations = 0;
};

// The simplex stays inside the scanned efficiency box; outside it the
// surface is unexplored and far-off spurious minima exist.
SimplexOutcome refine_simplex(const Objective& obj, const CandidatePoint& start,
                              const GridSpec& box, double step, double tol, int max_iterations) {
  using Vec = std::array<double, 3>;
  SimplexOutcome out;
  const double s_lo = std::max(box.eta_s.front(), 0.0), s_hi = std::min(box.eta_s.back(), 1.0);
  const double i_lo = std::max(box.eta_i.front(), 0.0), i_hi = std::min(box.eta_i.back(), 1.0);

  auto to_point = [&](const Vec& x) -> std::optional<CandidatePoint> {
    if (!(x[0] > 0.0 && x[0] >= s_lo && x[0] <= s_hi)) return std::nullopt;
    if (!(x[1] > 0.0 && x[1] >= i_lo && x[1] <= i_hi)) return std::nullopt;
    if (!(x[2] >= 0.0 && x[2] <= 1.0)) return std::nullopt;
    const auto iv = feasible_np_interval(obj.moments(), x[0], x[1]);
    if (!iv) return std::nullopt;
    return CandidatePoint{x[0], x[1], iv->lo + x[2] * iv->width()};
  };
  auto f = [&](const Vec& x) {
    ++out.evaluations;
    const auto p = to_point(x);
    if (!p) return kInf;
    return obj.evaluate(*p, obj.response_s(p->eta_s), obj.response_i(p->eta_i));
  };

  const auto iv0 = feasible_np_interval(obj.moments(), start.eta_s, start.eta_i);
  double t0 = 0.5;
  if (iv0 && iv0->width() > 0.0) t0 = std::clamp((start.mean_pairs - iv0->lo) / iv0->width(), 0.0, 1.0);
  const double dt = t0 > 0.5 ? -0.05 : 0.05;

  const double ds = start.eta_s + step <= s_hi ? step : -step;
  const double di = start.eta_i + step <= i_hi ? step : -step;
  std::array<Vec, 4> x = {Vec{start.eta_s, start.eta_i, t0}, Vec{start.eta_s + ds, start.eta_i, t0},
                          Vec{start.eta_s, start.eta_i + di, t0},
                          Vec{start.eta_s, start.eta_i, t0 + dt}};
  std::array<double, 4> fx;
  for (int k = 0; k < 4; ++k) fx[k] = f(x[k]);

  auto order = [&] {
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    std::array<Vec, 4> xs;
    std::array<double, 4> fs;
    for (int k = 0; k < 4; ++k) {
      xs[k] = x[idx[k]];
      fs[k] = fx[idx[k]];
    }
    x = xs;
    fx = fs;
  };
  auto lerp = [](const Vec& a, const Vec& b, double t) {
    return Vec{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])};
  };

  int it = 0;
  for (; it < max_iterations; ++it) {
    order();
    if (std::isfinite(fx[3]) && fx[3] - fx[0] < tol) break;
    Vec c{0.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 3; ++d) c[d] += x[k][d] / 3.0;
    const Vec xr = lerp(c, x[3], -1.0);
    const double fr = f(xr);
    if (fr < fx[0]) {
      const Vec xe = lerp(c, x[3], -2.0);
      const double fe = f(xe);
      if (fe < fr) {
        x[3] = xe;
        fx[3] = fe;
      } else {
        x[3] = xr;
        fx[3] = fr;
      }
      continue;
    }
    if (fr < fx[2]) {
      x[3] = xr;
      fx[3] = fr;
      continue;
    }
    bool shrink = false;
    if (fr < fx[3]) {
      const Vec xc = lerp(c, xr, 0.5);
      const double fc = f(xc);
      if (fc <= fr) {
        x[3] = xc;
        fx[3] = fc;
      } else {
        shrink = true;
      }
    } else {
      const Vec xc = lerp(c, x[3], 0.5);
      const double fc = f(xc);
      if (fc < fx[3]) {
        x[3] = xc;
        fx[3] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (int k = 1; k < 4; ++k) {
        x[k] = lerp(x[0], x[k], 0.5);
        fx[k] = f(x[k]);
      }
    }
  }
  order();
  out.iterations = it;
  out.value = fx[0];
  if (const auto p = to_point(x[0])) out.point = *p;
  return out;
}

}  // namespace

bool NpInterval::contains(double x, double rel_slack) const {
  const double slack = rel_slack * std::max({std::fabs(lo), std::fabs(hi), 1.0});
  return x >= lo - slack && x <= hi + slack;
}

std::optional<NpInterval> feasible_np_interval(const PhotoelectronMoments& m, double eta_s,
                                               double eta_i) {
  check_efficiency(eta_s, "signal");
  check_efficiency(eta_i, "idler");
  if (!(m.cov > 0.0)) {
    std::ostringstream os;
    os << "photoelectron covariance " << m.cov
       << " is not positive: no paired signal, no-feasible-region";
    throw NonpositiveCovariance(os.str());
  }
  const FieldMoments fm = field_moments(m, {eta_s, eta_i, 0.0});
  // With <n_p> = 0 the noise moments equal the per-arm totals.
  const long double total_s = fm.noise_s.mean;
  const long double total_i = fm.noise_i.mean;
  const long double var_p = fm.pair.variance;
  long double lo =
      std::max({0.0L, total_s - fm.noise_s.variance, total_i - fm.noise_i.variance});
  const long double hi = std::min({var_p, total_s, total_i});
  if (!(hi > 0.0L)) return std::nullopt;
  // Noise-free data pin lo == hi; rounding may leave lo an ulp above.
  if (lo > hi && lo - hi <= 1e-12L * hi) lo = hi;
  if (lo > hi) return std::nullopt;
  return NpInterval{static_cast<double>(lo), static_cast<double>(hi)};
}

FieldMoments field_moments(const PhotoelectronMoments& m, const CandidatePoint& point) {
  const long double es = point.eta_s;
  const long double ei = point.eta_i;
  const long double np = point.mean_pairs;
  const long double ms = m.value.mean_s;
  const long double mi = m.value.mean_i;
  const long double var_p = static_cast<long double>(m.cov) / (es * ei);
  FieldMoments out;
  out.pair = {np, var_p};
  out.noise_s = {ms / es - np,
                 static_cast<long double>(m.var_s) / (es * es) - var_p - (1.0L - es) / (es * es) * ms};
  out.noise_i = {mi / ei - np,
                 static_cast<long double>(m.var_i) / (ei * ei) - var_p - (1.0L - ei) / (ei * ei) * mi};
  return out;
}

TwinBeamModel solve_field(const PhotoelectronMoments& m, const CandidatePoint& point) {
  const auto interval = feasible_np_interval(m, point.eta_s, point.eta_i);
  if (!interval || !interval->contains(point.mean_pairs)) {
    std::ostringstream os;
    os << "<n_p> = " << point.mean_pairs << " at (eta_s, eta_i) = (" << point.eta_s << ", "
       << point.eta_i << ") lies outside the feasible interval";
    if (interval) os << " [" << interval->lo << ", " << interval->hi << "]";
    throw InfeasiblePoint(os.str());
  }
  const FieldMoments fm = field_moments(m, point);
  TwinBeamModel model;
  model.pair = component_from_moments(fm.pair.mean, fm.pair.variance);
  model.noise_s = component_from_moments(fm.noise_s.mean, fm.noise_s.variance);
  model.noise_i = component_from_moments(fm.noise_i.mean, fm.noise_i.variance);
  return model;
}

PhotoelectronMoments forward_moments(const TwinBeamModel& model, double eta_s, double eta_i) {
  const ComponentMoments p = component_moments(model.pair);
  const ComponentMoments s = component_moments(model.noise_s);
  const ComponentMoments i = component_moments(model.noise_i);
  const long double es = eta_s, ei = eta_i;
  const long double ns = p.mean + s.mean, ni = p.mean + i.mean;
  const long double vs = es * es * (p.variance + s.variance) + es * (1.0L - es) * ns;
  const long double vi = ei * ei * (p.variance + i.variance) + ei * (1.0L - ei) * ni;
  return PhotoelectronMoments::from_central(static_cast<double>(es * ns), static_cast<double>(ei * ni),
                                            static_cast<double>(vs), static_cast<double>(vi),
                                            static_cast<double>(es * ei * p.variance));
}

double declination(const JointDistribution& p_c, const PhotocountHistogram& f) {
  const Matrix& p = p_c.probabilities;
  const double shots = static_cast<double>(f.shots());
  CompensatedSum s;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    for (std::size_t c = 0; c < p.cols(); ++c) {
      const double fv = static_cast<double>(f.count(r, c)) / shots;
      if (p(r, c) > kSupportFloor || fv > 0.0) {
        const double d = p(r, c) - fv;
        s += d * d;
      }
    }
  }
  for (const auto& [key, count] : f.entries()) {
    if (key.first < p.rows() && key.second < p.cols()) continue;
    const double fv = static_cast<double>(count) / shots;
    s += fv * fv;
  }
  return std::sqrt(s.value());
}

DetectorSetup detector_setup(const Geometry& geometry, const RawMoments& dark) {
  if (geometry.pixels_s == 0 || geometry.pixels_i == 0)
    throw std::invalid_argument("pixel counts must be positive");
  DetectorSetup d;
  d.pixels_s = geometry.pixels_s;
  d.pixels_i = geometry.pixels_i;
  d.dark_rate_s = dark.value.mean_s / geometry.pixels_s;
  d.dark_rate_i = dark.value.mean_i / geometry.pixels_i;
  return d;
}

std::vector<double> centered_axis(double center, double span, double step) {
  if (!(step > 0.0) || !(span >= 0.0)) throw std::invalid_argument("grid needs step > 0, span >= 0");
  const long k_max = static_cast<long>(std::floor(span * center / step + 1e-9));
  std::vector<double> out;
  for (long k = -k_max; k <= k_max; ++k) {
    const double v = center + static_cast<double>(k) * step;
    if (v > 0.0 && v <= 1.0) out.push_back(v);
  }
  return out;
}

std::vector<double> range_axis(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("grid needs step > 0 and lo <= hi");
  std::vector<double> out;
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (v > 0.0 && v <= 1.0) out.push_back(v);
  }
  return out;
}

std::optional<std::size_t> Surface::argmin() const {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!cells[k].declination) continue;
    if (!best || *cells[k].declination < *cells[*best].declination) best = k;
  }
  return best;
}

std::size_t Surface::infeasible_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const SurfaceCell& c) { return !c.declination; }));
}

Surface scan_surface(const PhotoelectronMoments& m, const PhotocountHistogram& f,
                     const DetectorSetup& detectors, const GridSpec& grid,
                     const CalibrationOptions& options) {
  if (f.empty()) throw EmptyHistogram("cannot scan against an empty histogram");
  if (!(m.cov > 0.0))
    throw NonpositiveCovariance("photoelectron covariance is not positive: no-feasible-region");
  const Objective obj(m, f, detectors, options);
  return scan_with(obj, grid, options.np_rel_tolerance);
}

std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::boundary: return "boundary";
    case FitStatus::infeasible: return "infeasible-everywhere";
  }
  return "unknown";
}

FitStatus fit_status_from_string(const std::string& s) {
  if (s == "converged") return FitStatus::converged;
  if (s == "boundary") return FitStatus::boundary;
  if (s == "infeasible-everywhere") return FitStatus::infeasible;
  throw std::invalid_argument("unknown fit status '" + s + "'");
}

CalibrationResult calibrate(const PhotocountHistogram& hist, const DarkCountRecord& dark,
                            const Geometry& geometry, const CalibrationOptions& options) {
  if (hist.empty()) throw EmptyHistogram("photocount histogram is empty");
  if (dark.empty()) throw EmptyHistogram("dark-count record is empty");

  CalibrationResult result;
  const RawMoments raw = photocount_moments(hist);
  const RawMoments dark_raw = photocount_moments(dark);
  result.moments = subtract_dark(raw, dark_raw);
  if (!(result.moments.cov > 0.0)) {
    std::ostringstream os;
    os << "photoelectron covariance " << result.moments.cov
       << " is not positive: no paired signal, no-feasible-region";
    throw NonpositiveCovariance(os.str());
  }
  result.baseline = klyshko_estimate(result.moments);
  result.detectors = detector_setup(geometry, dark_raw);

  GridSpec grid;
  grid.eta_s = centered_axis(options.center_eta_s.value_or(result.baseline.eta_s_cov),
                             options.grid_span, options.grid_step);
  grid.eta_i = centered_axis(options.center_eta_i.value_or(result.baseline.eta_i_cov),
                             options.grid_span, options.grid_step);
  if (grid.eta_s.empty() || grid.eta_i.empty())
    throw NoFeasibleRegion("efficiency grid is empty: no-feasible-region");

  const Objective obj(result.moments, hist, result.detectors, options);
  const Surface surface = scan_with(obj, grid, options.np_rel_tolerance);

  FitDiagnostics& diag = result.diagnostics;
  diag.grid_cells = static_cast<std::uint32_t>(surface.cells.size());
  diag.infeasible_cells = static_cast<std::uint32_t>(surface.infeasible_count());
  diag.grid_step = options.grid_step;
  diag.c_max_s = obj.c_max_s();
  diag.c_max_i = obj.c_max_i();
  for (const auto& c : surface.cells) diag.evaluations += c.evaluations;

  const auto best = surface.argmin();
  if (!best) {
    std::ostringstream os;
    os << "no-feasible-region: all " << surface.cells.size()
       << " efficiency grid cells admit no valid three-component field";
    throw NoFeasibleRegion(os.str());
  }
  const SurfaceCell& cell = surface.cells[*best];
  const std::size_t is = *best / grid.eta_i.size();
  const std::size_t ii = *best % grid.eta_i.size();
  const bool on_edge = (grid.eta_s.size() > 1 && (is == 0 || is + 1 == grid.eta_s.size())) ||
                       (grid.eta_i.size() > 1 && (ii == 0 || ii + 1 == grid.eta_i.size()));

  result.point = {cell.eta_s, cell.eta_i, cell.mean_pairs};
  result.declination = *cell.declination;
  if (options.refine) {
    const SimplexOutcome s = refine_simplex(obj, result.point, grid, options.grid_step,
                                            options.simplex_tolerance,
                                            options.simplex_max_iterations);
    diag.simplex_iterations = s.iterations;
    diag.evaluations += s.evaluations;
    if (s.value < result.declination) {
      result.point = s.point;
      result.declination = s.value;
    }
  }
  result.status = on_edge ? FitStatus::boundary : FitStatus::converged;

  result.model = solve_field(result.moments, result.point);
  const ComponentPmfs pmfs = component_pmfs(result.model, options.tail_tolerance, options.max_grid);
  diag.field_truncated_mass = pmfs.truncated_mass;
  diag.counts_truncated_mass =
      jpcd_from_components(pmfs, obj.response_s(result.point.eta_s),
                           obj.response_i(result.point.eta_i))
          .truncated_mass;
  return result;
}

BootstrapSummary bootstrap_uncertainty(const PhotocountHistogram& hist,
                                       const DarkCountRecord& dark, const Geometry& geometry,
                                       const CalibrationOptions& options,
                                       const CalibrationResult& original, std::uint32_t replicas,
                                       std::uint64_t seed) {
  if (replicas == 0) throw std::invalid_argument("bootstrap needs at least one replica");
  CalibrationOptions warm = options;
  warm.center_eta_s = original.point.eta_s;
  warm.center_eta_i = original.point.eta_i;
  warm.grid_span = 0.1;

  std::vector<std::optional<CandidatePoint>> fits(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    const PhotocountHistogram h = resample(hist, rng);
    const DarkCountRecord d = resample(dark, rng);
    try {
      fits[r] = calibrate(h, d, geometry, warm).point;
    } catch (const Error&) {
    }
  });

  BootstrapSummary out;
  out.replicas = replicas;
  out.seed = seed;
  std::vector<CandidatePoint> ok;
  for (const auto& f : fits) {
    if (f)
      ok.push_back(*f);
    else
      ++out.failures;
  }
  if (out.failures * 10 > replicas) {
    std::ostringstream os;
    os << out.failures << " of " << replicas << " bootstrap replicas failed to calibrate";
    throw BootstrapFailure(os.str());
  }
  if (ok.size() < 2) {
    out.degenerate = true;
    return out;
  }
  auto sd = [&](auto member) {
    double mean = 0.0;
    for (const auto& p : ok) mean += p.*member;
    mean /= static_cast<double>(ok.size());
    double ss = 0.0;
    for (const auto& p : ok) ss += (p.*member - mean) * (p.*member - mean);
    return std::sqrt(ss / static_cast<double>(ok.size() - 1));
  };
  out.stderr_values = {sd(&CandidatePoint::eta_s), sd(&CandidatePoint::eta_i),
                       sd(&CandidatePoint::mean_pairs)};
  return out;
}

}  // namespace twinbeam
