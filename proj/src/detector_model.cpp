#include "twinbeam/detector_model.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "twinbeam/errors.hpp"
#include "twinbeam/numeric.hpp"
#include "twinbeam/parallel.hpp"

namespace twinbeam {

namespace {

using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<400>>;

constexpr double kClampFloor = -1e-12;

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

Big big_pow(const Big& base, std::size_t exponent) {
  Big result = 1;
  Big b = base;
  while (exponent != 0) {
    if (exponent & 1u) result *= b;
    exponent >>= 1;
    if (exponent != 0) b *= b;
  }
  return result;
}

[[noreturn]] void throw_unstable(std::size_t c, std::size_t n, double rel) {
  std::ostringstream os;
  os << "alternating series for T(" << c << ", " << n << ") lost precision (relative uncertainty "
     << rel << ")";
  throw NumericalInstability(os.str());
}

// Binomial(k; trials, p) for k = 0..k_max. Ratio recursion from P(0) in
// long double; log-gamma only when P(0) would underflow even there.
std::vector<double> binomial_pmf(std::size_t trials, double p, std::size_t k_max) {
  std::vector<double> out(k_max + 1, 0.0);
  if (p == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const std::size_t k_end = std::min(k_max, trials);
  const long double log_p0 = static_cast<long double>(trials) * std::log1p(-static_cast<long double>(p));
  if (log_p0 > -11000.0L) {
    const long double ratio = static_cast<long double>(p) / (1.0L - static_cast<long double>(p));
    long double v = std::exp(log_p0);
    for (std::size_t k = 0; k <= k_end; ++k) {
      out[k] = static_cast<double>(v);
      v *= ratio * static_cast<long double>(trials - k) / static_cast<long double>(k + 1);
    }
    return out;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double nd = static_cast<double>(trials);
  for (std::size_t k = 0; k <= k_end; ++k) {
    const double kd = static_cast<double>(k);
    out[k] = std::exp(log_choose(nd, kd) + kd * lp + (nd - kd) * lq);
  }
  return out;
}

void fill_occupancy(const DetectorParams& det, ResponseMatrix& out) {
  const std::size_t c_max = out.c_max();
  const std::size_t n_max = out.n_max();
  const double n_pix = det.pixels;
  const double eta = det.efficiency;
  const std::size_t j_max = std::min<std::size_t>(c_max, det.pixels);

  // dark[j][k]: k dark-fired pixels among the N - j not hit by photons.
  std::vector<std::vector<double>> dark(j_max + 1);
  for (std::size_t j = 0; j <= j_max; ++j)
    dark[j] = binomial_pmf(det.pixels - j, det.dark_rate, c_max - j);

  // occupied[j]: probability that exactly j distinct pixels hold a detected
  // photon after the photons seen so far. Mass above j_max never returns to
  // rows <= c_max and is dropped.
  std::vector<double> occupied(j_max + 1, 0.0);
  occupied[0] = 1.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    for (std::size_t c = 0; c <= c_max; ++c) {
      double t = 0.0;
      for (std::size_t j = 0; j <= std::min(c, j_max); ++j) t += occupied[j] * dark[j][c - j];
      out.values(c, n) = t;
    }
    if (n == n_max) break;
    for (std::size_t j = j_max + 1; j-- > 0;) {
      const double jd = static_cast<double>(j);
      double v = occupied[j] * ((1.0 - eta) + eta * jd / n_pix);
      if (j > 0) v += occupied[j - 1] * eta * (n_pix - jd + 1.0) / n_pix;
      occupied[j] = v;
    }
  }
}

struct SeriesValue {
  double value;
  double rel_uncertainty;
};

// Inclusion-exclusion series in double precision.
SeriesValue alternating_double(const DetectorParams& det, std::size_t c, std::size_t n) {
  const double n_pix = det.pixels;
  const double eta = det.efficiency;
  const double eps = std::numeric_limits<double>::epsilon();
  if (det.dark_rate == 0.0 && c > n) return {0.0, 0.0};  // c-th difference of a degree-n polynomial

  const double log_lead = log_choose(n_pix, static_cast<double>(c));
  const double log_keep = std::log1p(-det.dark_rate);
  struct Term {
    double log_mag;
    double sign;
    double log_err_scale;
  };
  std::vector<Term> terms;
  terms.reserve(c + 1);
  for (std::size_t l = 0; l <= c; ++l) {
    const double ld = static_cast<double>(l);
    const double base = (1.0 - eta) + eta * ld / n_pix;
    double log_pow;
    if (n == 0)
      log_pow = 0.0;
    else if (base == 0.0)
      continue;
    else
      log_pow = static_cast<double>(n) * std::log(base);
    const double lc = log_choose(static_cast<double>(c), ld);
    const double ld_keep = (n_pix - ld) * log_keep;
    const double log_mag = log_lead + lc + ld_keep + log_pow;
    const double scale = std::fabs(log_lead) + std::fabs(lc) + std::fabs(ld_keep) +
                         std::fabs(log_pow) + 4.0;
    terms.push_back({log_mag, ((c - l) % 2 == 0) ? 1.0 : -1.0, scale});
  }
  if (terms.empty()) return {0.0, 0.0};
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.log_mag > b.log_mag; });
  const double ref = terms.front().log_mag;
  CompensatedSum sum;
  double err = 0.0;
  for (const Term& t : terms) {
    const double mag = std::exp(t.log_mag - ref);
    sum += t.sign * mag;
    err += mag * eps * (t.log_err_scale + static_cast<double>(terms.size()));
  }
  const double scaled = sum.value();
  const double value = std::exp(ref) * scaled;
  const double rel = scaled == 0.0 ? std::numeric_limits<double>::infinity()
                                   : err / std::fabs(scaled);
  return {value, rel};
}

double clamp_entry(double v, std::size_t c, std::size_t n, std::size_t& clamped) {
  if (v < 0.0) {
    if (v < kClampFloor) throw_unstable(c, n, std::fabs(v));
    ++clamped;
    return 0.0;
  }
  if (v > 1.0) {
    if (v > 1.0 + 1e-12) throw_unstable(c, n, v - 1.0);
    return 1.0;
  }
  return v;
}

void fill_alternating(const DetectorParams& det, const ResponseOptions& opt, ResponseMatrix& out) {
  const std::size_t rows = out.values.rows();
  const std::size_t cols = out.values.cols();
  std::vector<std::size_t> clamped(cols, 0), exact(cols, 0);
  parallel_for(cols, [&](std::size_t n) {
    for (std::size_t c = 0; c < rows; ++c) {
      double v;
      if (opt.method == ResponseMethod::alternating_exact) {
        v = detection_probability_exact(det, c, n);
        ++exact[n];
      } else {
        const SeriesValue s = alternating_double(det, c, n);
        if (s.rel_uncertainty > opt.instability_tolerance) {
          if (!opt.exact_fallback) throw_unstable(c, n, s.rel_uncertainty);
          v = detection_probability_exact(det, c, n);
          ++exact[n];
        } else {
          v = s.value;
        }
      }
      out.values(c, n) = clamp_entry(v, c, n, clamped[n]);
    }
  });
  for (std::size_t n = 0; n < cols; ++n) {
    out.clamped_entries += clamped[n];
    out.exact_entries += exact[n];
  }
}

}  // namespace

void DetectorParams::validate() const {
  if (pixels < 1) throw std::invalid_argument("detector needs at least one pixel");
  if (!(efficiency > 0.0 && efficiency <= 1.0))
    throw std::invalid_argument("detection efficiency must lie in (0, 1]");
  if (!(dark_rate >= 0.0 && dark_rate < 1.0))
    throw std::invalid_argument("dark-count rate must lie in [0, 1)");
}

double detection_probability_exact(const DetectorParams& det, std::size_t c, std::size_t n) {
  det.validate();
  if (c > det.pixels) return 0.0;
  const Big n_pix = det.pixels;
  const Big eta = det.efficiency;
  const Big keep = Big(1) - Big(det.dark_rate);

  Big lead = 1;  // C(N, c)
  for (std::size_t k = 0; k < c; ++k) lead = lead * (n_pix - k) / (k + 1);

  Big sum = 0;
  Big largest = 0;
  Big choose = 1;  // C(c, l)
  for (std::size_t l = 0; l <= c; ++l) {
    if (l > 0) choose = choose * (c - l + 1) / l;
    const Big base = Big(1) - eta + eta * Big(l) / n_pix;
    const Big term = choose * big_pow(keep, det.pixels - l) * (n == 0 ? Big(1) : big_pow(base, n));
    largest = std::max(largest, term);
    if ((c - l) % 2 == 0)
      sum += term;
    else
      sum -= term;
  }
  // 400 decimal digits leave ample room; anything left of the cancellation
  // below ~1e-380 of the largest term is noise.
  if (largest != 0 && abs(sum) < largest * Big("1e-380") && sum != 0) throw_unstable(c, n, 1.0);
  return static_cast<double>(lead * sum);
}

ResponseMatrix detection_matrix(const DetectorParams& detector, std::size_t n_max,
                                std::size_t c_max, const ResponseOptions& options) {
  detector.validate();
  if (c_max > detector.pixels) {
    std::ostringstream os;
    os << "c_max " << c_max << " exceeds the pixel count " << detector.pixels;
    throw std::invalid_argument(os.str());
  }
  ResponseMatrix out;
  out.detector = detector;
  out.values = Matrix(c_max + 1, n_max + 1);
  if (options.method == ResponseMethod::occupancy)
    fill_occupancy(detector, out);
  else
    fill_alternating(detector, options, out);

  out.column_tail.assign(n_max + 1, 0.0);
  for (std::size_t n = 0; n <= n_max; ++n) {
    CompensatedSum s;
    for (std::size_t c = 0; c <= c_max; ++c) s += out.values(c, n);
    out.column_tail[n] = std::max(0.0, 1.0 - s.value());
  }
  return out;
}

JointDistribution jpcd(const JointDistribution& field, const ResponseMatrix& t_s,
                       const ResponseMatrix& t_i) {
  const Matrix& p = field.probabilities;
  if (t_s.values.cols() < p.rows() || t_i.values.cols() < p.cols()) {
    std::ostringstream os;
    os << "response matrices cover n <= (" << t_s.n_max() << ", " << t_i.n_max()
       << ") but the field grid needs (" << field.cutoff_s() << ", " << field.cutoff_i() << ")";
    throw DimensionMismatch(os.str());
  }
  const std::size_t cs_n = t_s.values.rows();
  const std::size_t ci_n = t_i.values.rows();

  // half(n_s, c_i) = sum_{n_i} p(n_s, n_i) T_i(c_i, n_i)
  Matrix half(p.rows(), ci_n);
  for (std::size_t ns = 0; ns < p.rows(); ++ns) {
    const double* prow = p.row(ns);
    double* hrow = half.row(ns);
    for (std::size_t ci = 0; ci < ci_n; ++ci) {
      const double* trow = t_i.values.row(ci);
      double acc = 0.0;
      for (std::size_t ni = 0; ni < p.cols(); ++ni) acc += prow[ni] * trow[ni];
      hrow[ci] = acc;
    }
  }
  JointDistribution out;
  out.probabilities = Matrix(cs_n, ci_n);
  for (std::size_t cs = 0; cs < cs_n; ++cs) {
    const double* trow = t_s.values.row(cs);
    double* orow = out.probabilities.row(cs);
    for (std::size_t ns = 0; ns < p.rows(); ++ns) {
      const double w = trow[ns];
      if (w == 0.0) continue;
      const double* hrow = half.row(ns);
      for (std::size_t ci = 0; ci < ci_n; ++ci) orow[ci] += w * hrow[ci];
    }
  }
  out.truncated_mass = std::max(0.0, 1.0 - out.total_mass());
  return out;
}

ComponentPmfs component_pmfs(const TwinBeamModel& model, double tail_tolerance,
                             std::size_t max_grid) {
  if (!(tail_tolerance > 0.0) || tail_tolerance > 1e-3)
    throw std::invalid_argument("tail tolerance must lie in (0, 1e-3]");
  ComponentPmfs out;
  const double per = tail_tolerance / 3.0;
  out.pair = component_pmf(model.pair, per, max_grid);
  out.noise_s = component_pmf(model.noise_s, per, max_grid);
  out.noise_i = component_pmf(model.noise_i, per, max_grid);
  const std::size_t rows = out.pair.size() + out.noise_s.size() - 1;
  const std::size_t cols = out.pair.size() + out.noise_i.size() - 1;
  if (rows > max_grid || cols > max_grid) {
    std::ostringstream os;
    os << "joint photon-number grid " << rows << "x" << cols << " exceeds the maximum "
       << max_grid << "x" << max_grid;
    throw CutoffOverflow(os.str());
  }
  auto mass = [](const std::vector<double>& v) {
    CompensatedSum s;
    for (double x : v) s += x;
    return s.value();
  };
  out.truncated_mass =
      std::max(0.0, 1.0 - mass(out.pair) * mass(out.noise_s) * mass(out.noise_i));
  return out;
}

JointDistribution jpcd_from_components(const ComponentPmfs& pmfs, const ResponseMatrix& t_s,
                                       const ResponseMatrix& t_i) {
  const std::size_t kp = pmfs.pair.size();
  if (t_s.values.cols() < kp + pmfs.noise_s.size() - 1 ||
      t_i.values.cols() < kp + pmfs.noise_i.size() - 1) {
    std::ostringstream os;
    os << "response matrices cover n <= (" << t_s.n_max() << ", " << t_i.n_max()
       << ") but the field needs (" << kp + pmfs.noise_s.size() - 2 << ", "
       << kp + pmfs.noise_i.size() - 2 << ")";
    throw DimensionMismatch(os.str());
  }
  // arm(c, n) = sum_k T(c, n + k) q(k): counts given n pair photons plus noise.
  auto fold = [kp](const ResponseMatrix& t, const std::vector<double>& q) {
    const std::size_t rows = t.values.rows();
    Matrix arm(rows, kp);
    for (std::size_t c = 0; c < rows; ++c) {
      const double* trow = t.values.row(c);
      double* arow = arm.row(c);
      for (std::size_t n = 0; n < kp; ++n) {
        double acc = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) acc += trow[n + k] * q[k];
        arow[n] = acc;
      }
    }
    return arm;
  };
  const Matrix arm_s = fold(t_s, pmfs.noise_s);
  const Matrix arm_i = fold(t_i, pmfs.noise_i);

  JointDistribution out;
  out.probabilities = Matrix(arm_s.rows(), arm_i.rows());
  std::vector<double> weighted(kp);
  for (std::size_t cs = 0; cs < arm_s.rows(); ++cs) {
    const double* srow = arm_s.row(cs);
    for (std::size_t n = 0; n < kp; ++n) weighted[n] = pmfs.pair[n] * srow[n];
    double* orow = out.probabilities.row(cs);
    for (std::size_t ci = 0; ci < arm_i.rows(); ++ci) {
      const double* irow = arm_i.row(ci);
      double acc = 0.0;
      for (std::size_t n = 0; n < kp; ++n) acc += weighted[n] * irow[n];
      orow[ci] = acc;
    }
  }
  out.truncated_mass = std::max(0.0, 1.0 - out.total_mass());
  return out;
}

std::vector<double> single_arm_counts(const std::vector<double>& photon_pmf,
                                      const ResponseMatrix& t) {
  if (t.values.cols() < photon_pmf.size())
    throw DimensionMismatch("response matrix narrower than the photon-number distribution");
  std::vector<double> out(t.values.rows(), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    CompensatedSum s;
    for (std::size_t n = 0; n < photon_pmf.size(); ++n) s += t(c, n) * photon_pmf[n];
    out[c] = s.value();
  }
  return out;
}

}  // namespace twinbeam
