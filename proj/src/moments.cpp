#include "twinbeam/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twinbeam/errors.hpp"

namespace twinbeam {

namespace {

double quad(std::initializer_list<double> terms) {
  double s = 0.0;
  for (double t : terms) s += t * t;
  return std::sqrt(s);
}

double ratio_stderr(double num, double num_se, double den, double den_se,
                    double covariance = 0.0) {
  const double r = num / den;
  const double v = (num_se * num_se - 2.0 * r * covariance + r * r * den_se * den_se) / (den * den);
  return std::sqrt(std::max(0.0, v));
}

}  // namespace

PhotoelectronMoments PhotoelectronMoments::from_central(double mean_s, double mean_i,
                                                        double var_s, double var_i,
                                                        double cov) {
  PhotoelectronMoments m;
  m.value.mean_s = mean_s;
  m.value.mean_i = mean_i;
  m.value.second_s = var_s + mean_s * mean_s;
  m.value.second_i = var_i + mean_i * mean_i;
  m.value.cross = cov + mean_s * mean_i;
  m.var_s = var_s;
  m.var_i = var_i;
  m.cov = cov;
  return m;
}

RawMoments photocount_moments(const PhotocountHistogram& hist) {
  // Accumulate first through fourth order sums needed for the moments and
  // the sample variances of their estimators.
  double s1 = 0, i1 = 0, s2 = 0, i2 = 0, x = 0;
  double s4 = 0, i4 = 0, x2 = 0;
  for (const auto& [key, count] : hist.entries()) {
    const double cs = key.first;
    const double ci = key.second;
    const double w = static_cast<double>(count);
    s1 += w * cs;
    i1 += w * ci;
    s2 += w * cs * cs;
    i2 += w * ci * ci;
    x += w * cs * ci;
    s4 += w * cs * cs * cs * cs;
    i4 += w * ci * ci * ci * ci;
    x2 += w * cs * cs * ci * ci;
  }
  const double n = static_cast<double>(hist.shots());
  RawMoments r;
  r.shots = hist.shots();
  if (hist.shots() == 0) return r;
  r.value = {s1 / n, i1 / n, s2 / n, i2 / n, x / n};
  auto se = [n](double second, double first) {
    return std::sqrt(std::max(0.0, second - first * first) / n);
  };
  r.std_error.mean_s = se(r.value.second_s, r.value.mean_s);
  r.std_error.mean_i = se(r.value.second_i, r.value.mean_i);
  r.std_error.second_s = se(s4 / n, r.value.second_s);
  r.std_error.second_i = se(i4 / n, r.value.second_i);
  r.std_error.cross = se(x2 / n, r.value.cross);

  // Second pass for central moments.
  const double ms = r.value.mean_s, mi = r.value.mean_i;
  double vs = 0, vi = 0, cv = 0, vs2 = 0, vi2 = 0, cv2 = 0, ssi = 0, sii = 0;
  for (const auto& [key, count] : hist.entries()) {
    const double ds = key.first - ms;
    const double di = key.second - mi;
    const double w = static_cast<double>(count);
    vs += w * ds * ds;
    vi += w * di * di;
    cv += w * ds * di;
    vs2 += w * ds * ds * ds * ds;
    vi2 += w * di * di * di * di;
    cv2 += w * ds * ds * di * di;
    ssi += w * ds * ds * di;
    sii += w * ds * di * di;
  }
  vs /= n;
  vi /= n;
  cv /= n;
  r.var_s_stderr = se(vs2 / n, vs);
  r.var_i_stderr = se(vi2 / n, vi);
  r.cov_stderr = se(cv2 / n, cv);
  r.cov_mean_s_covariance = ssi / n / n;
  r.cov_mean_i_covariance = sii / n / n;
  return r;
}

PhotoelectronMoments subtract_dark(const RawMoments& raw, const RawMoments& dark) {
  const MomentSet& c = raw.value;
  const MomentSet& d = dark.value;
  const MomentSet& ce = raw.std_error;
  const MomentSet& de = dark.std_error;

  auto check = [](double signal, double background, const char* arm) {
    if (signal < background) {
      std::ostringstream os;
      os << "dark mean " << background << " exceeds measured mean " << signal << " in the "
         << arm << " arm";
      throw NegativeMeanAfterSubtraction(os.str());
    }
  };
  check(c.mean_s, d.mean_s, "signal");
  check(c.mean_i, d.mean_i, "idler");

  PhotoelectronMoments m;
  MomentSet& v = m.value;
  MomentSet& e = m.std_error;

  v.mean_s = c.mean_s - d.mean_s;
  v.mean_i = c.mean_i - d.mean_i;
  e.mean_s = quad({ce.mean_s, de.mean_s});
  e.mean_i = quad({ce.mean_i, de.mean_i});

  v.second_s = c.second_s - 2.0 * v.mean_s * d.mean_s - d.second_s;
  v.second_i = c.second_i - 2.0 * v.mean_i * d.mean_i - d.second_i;
  // d<m^2>/d<d> = -2<c> + 4<d>
  e.second_s = quad({ce.second_s, 2.0 * d.mean_s * ce.mean_s,
                     (4.0 * d.mean_s - 2.0 * c.mean_s) * de.mean_s, de.second_s});
  e.second_i = quad({ce.second_i, 2.0 * d.mean_i * ce.mean_i,
                     (4.0 * d.mean_i - 2.0 * c.mean_i) * de.mean_i, de.second_i});

  v.cross = c.cross - v.mean_s * d.mean_i - v.mean_i * d.mean_s - d.cross;
  e.cross = quad({ce.cross, d.mean_i * ce.mean_s, d.mean_s * ce.mean_i,
                  (v.mean_s - d.mean_s) * de.mean_i, (v.mean_i - d.mean_i) * de.mean_s,
                  de.cross});

  m.var_s = v.second_s - v.mean_s * v.mean_s;
  m.var_i = v.second_i - v.mean_i * v.mean_i;
  m.cov = v.cross - v.mean_s * v.mean_i;
  // Photoelectron variances and covariance are differences of the
  // independent measured and dark ones.
  m.var_s_stderr = quad({raw.var_s_stderr, dark.var_s_stderr});
  m.var_i_stderr = quad({raw.var_i_stderr, dark.var_i_stderr});
  m.cov_stderr = quad({raw.cov_stderr, dark.cov_stderr});
  m.cov_mean_s_covariance = raw.cov_mean_s_covariance + dark.cov_mean_s_covariance;
  m.cov_mean_i_covariance = raw.cov_mean_i_covariance + dark.cov_mean_i_covariance;
  return m;
}

KlyshkoEstimate klyshko_estimate(const PhotoelectronMoments& m) {
  const MomentSet& v = m.value;
  const MomentSet& e = m.std_error;
  if (!(v.mean_s > 0.0) || !(v.mean_i > 0.0)) {
    std::ostringstream os;
    os << "Klyshko estimate needs positive means in both arms (got " << v.mean_s << ", "
       << v.mean_i << ")";
    throw ZeroMeanArm(os.str());
  }
  KlyshkoEstimate k;
  k.eta_s_cov = m.cov / v.mean_i;
  k.eta_i_cov = m.cov / v.mean_s;
  k.eta_s_raw = v.cross / v.mean_i;
  k.eta_i_raw = v.cross / v.mean_s;
  k.eta_s_cov_stderr =
      ratio_stderr(m.cov, m.cov_stderr, v.mean_i, e.mean_i, m.cov_mean_i_covariance);
  k.eta_i_cov_stderr =
      ratio_stderr(m.cov, m.cov_stderr, v.mean_s, e.mean_s, m.cov_mean_s_covariance);
  k.eta_s_raw_stderr = ratio_stderr(v.cross, e.cross, v.mean_i, e.mean_i);
  k.eta_i_raw_stderr = ratio_stderr(v.cross, e.cross, v.mean_s, e.mean_s);
  return k;
}

double noise_corrected_idler_efficiency(const PhotoelectronMoments& m, double idler_noise_mean) {
  if (!(m.value.mean_s > 0.0)) throw ZeroMeanArm("signal mean must be positive");
  return m.value.cross / m.value.mean_s - idler_noise_mean;
}

}  // namespace twinbeam
