#include "twinbeam/field_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "twinbeam/errors.hpp"
#include "twinbeam/numeric.hpp"

namespace twinbeam {

FieldComponent FieldComponent::thermal(double modes, double mean_per_mode) {
  if (!(modes > 0.0) || !std::isfinite(modes))
    throw std::invalid_argument("thermal component needs a positive finite mode count");
  if (!(mean_per_mode >= 0.0) || !std::isfinite(mean_per_mode))
    throw std::invalid_argument("thermal component needs a nonnegative mean per mode");
  if (mean_per_mode == 0.0) return vacuum();
  FieldComponent c;
  c.kind_ = Kind::thermal;
  c.modes_ = modes;
  c.b_ = mean_per_mode;
  return c;
}

FieldComponent FieldComponent::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("Poisson component needs a nonnegative mean");
  if (mean == 0.0) return vacuum();
  FieldComponent c;
  c.kind_ = Kind::poisson;
  c.b_ = mean;
  return c;
}

double FieldComponent::modes() const noexcept {
  switch (kind_) {
    case Kind::thermal: return modes_;
    case Kind::poisson: return std::numeric_limits<double>::infinity();
    case Kind::vacuum: break;
  }
  return 0.0;
}

double FieldComponent::mean() const noexcept {
  if (kind_ == Kind::poisson) return b_;
  return static_cast<double>(component_moments(*this).mean);
}

double FieldComponent::variance() const noexcept {
  return static_cast<double>(component_moments(*this).variance);
}

ComponentMoments component_moments(const FieldComponent& c) {
  switch (c.kind()) {
    case FieldComponent::Kind::thermal: {
      const long double m = c.modes();
      const long double b = c.mean_per_mode();
      return {m * b, m * b * (1.0L + b)};
    }
    case FieldComponent::Kind::poisson: {
      const long double mu = c.mean();  // stored directly for this kind
      return {mu, mu};
    }
    case FieldComponent::Kind::vacuum: break;
  }
  return {0.0L, 0.0L};
}

FieldComponent component_from_moments(long double mean, long double variance) {
  if (!std::isfinite(static_cast<double>(mean)) || !std::isfinite(static_cast<double>(variance)))
    throw std::invalid_argument("component moments must be finite");
  if (mean < kVacuumMeanTolerance) {
    if (mean < -kVacuumMeanTolerance) {
      std::ostringstream os;
      os << "negative component mean " << static_cast<double>(mean);
      throw SubPoissonianComponent(os.str());
    }
    return FieldComponent::vacuum();
  }
  const long double excess = variance - mean;
  if (std::fabs(static_cast<double>(excess)) <= kPoissonRelTolerance * static_cast<double>(mean))
    return FieldComponent::poisson(static_cast<double>(mean));
  if (excess < 0.0L) {
    std::ostringstream os;
    os << "variance " << static_cast<double>(variance) << " below mean "
       << static_cast<double>(mean) << " is not representable by a Mandel-Rice component";
    throw SubPoissonianComponent(os.str());
  }
  const long double b = excess / mean;
  const long double modes = mean * mean / excess;
  return FieldComponent::thermal(static_cast<double>(modes), static_cast<double>(b));
}

double mandel_rice_pmf(std::size_t n, const FieldComponent& c) {
  const double nd = static_cast<double>(n);
  switch (c.kind()) {
    case FieldComponent::Kind::vacuum:
      return n == 0 ? 1.0 : 0.0;
    case FieldComponent::Kind::poisson: {
      const double mu = c.mean();
      return std::exp(nd * std::log(mu) - mu - std::lgamma(nd + 1.0));
    }
    case FieldComponent::Kind::thermal: {
      const double m = c.modes();
      const double b = c.mean_per_mode();
      if (n == 0) return std::exp(-m * std::log1p(b));
      const double log_p = std::lgamma(nd + m) - std::lgamma(nd + 1.0) - std::lgamma(m) +
                           nd * std::log(b) - (nd + m) * std::log1p(b);
      return std::exp(log_p);
    }
  }
  return 0.0;
}

double pmf_tail_bound(const FieldComponent& c, std::size_t k, double pmf_at_k) {
  const double kd = static_cast<double>(k);
  double ratio = 0.0;  // sup over n >= k of p(n+1)/p(n)
  switch (c.kind()) {
    case FieldComponent::Kind::vacuum:
      return 0.0;
    case FieldComponent::Kind::poisson:
      ratio = c.mean() / (kd + 1.0);
      break;
    case FieldComponent::Kind::thermal: {
      const double r = c.mean_per_mode() / (1.0 + c.mean_per_mode());
      const double m = c.modes();
      ratio = m <= 1.0 ? r : (kd + m) / (kd + 1.0) * r;
      break;
    }
  }
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return pmf_at_k * ratio / (1.0 - ratio);
}

std::vector<double> component_pmf(const FieldComponent& c, double mass_tolerance,
                                  std::size_t max_len) {
  if (!(mass_tolerance > 0.0)) throw std::invalid_argument("mass tolerance must be positive");
  std::vector<double> p;
  CompensatedSum cumulative;
  for (std::size_t n = 0;; ++n) {
    if (n >= max_len) {
      std::ostringstream os;
      os << "component with mean " << c.mean() << " needs more than " << max_len
         << " photon numbers to reach tail mass " << mass_tolerance;
      throw CutoffOverflow(os.str());
    }
    const double pn = mandel_rice_pmf(n, c);
    p.push_back(pn);
    cumulative += pn;
    if (cumulative.value() >= 1.0 - mass_tolerance) break;
    if (static_cast<double>(n) > c.mean() && pmf_tail_bound(c, n, pn) < mass_tolerance) break;
  }
  return p;
}

double JointDistribution::total_mass() const {
  CompensatedSum s;
  for (double v : probabilities.data()) s += v;
  return s.value();
}

JointDistribution jpnd(const TwinBeamModel& model, double tail_tolerance, std::size_t max_grid) {
  if (!(tail_tolerance > 0.0) || tail_tolerance > 1e-3)
    throw std::invalid_argument("tail tolerance must lie in (0, 1e-3]");
  const double per_component = tail_tolerance / 3.0;
  const auto pair = component_pmf(model.pair, per_component, max_grid);
  const auto noise_s = component_pmf(model.noise_s, per_component, max_grid);
  const auto noise_i = component_pmf(model.noise_i, per_component, max_grid);

  const std::size_t rows = pair.size() + noise_s.size() - 1;
  const std::size_t cols = pair.size() + noise_i.size() - 1;
  if (rows > max_grid || cols > max_grid) {
    std::ostringstream os;
    os << "joint photon-number grid " << rows << "x" << cols << " exceeds the maximum "
       << max_grid << "x" << max_grid;
    throw CutoffOverflow(os.str());
  }

  JointDistribution out;
  out.probabilities = Matrix(rows, cols);
  for (std::size_t n = 0; n < pair.size(); ++n) {
    const double pn = pair[n];
    if (pn == 0.0) continue;
    for (std::size_t a = 0; a < noise_s.size(); ++a) {
      const double w = pn * noise_s[a];
      if (w == 0.0) continue;
      double* row = out.probabilities.row(n + a) + n;
      for (std::size_t b = 0; b < noise_i.size(); ++b) row[b] += w * noise_i[b];
    }
  }
  out.truncated_mass = std::max(0.0, 1.0 - out.total_mass());
  return out;
}

JointMoments joint_moments(const JointDistribution& p) {
  CompensatedSum mass, s1, i1, s2, i2, x;
  const Matrix& m = p.probabilities;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double rd = static_cast<double>(r);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (v == 0.0) continue;
      const double cd = static_cast<double>(c);
      mass += v;
      s1 += v * rd;
      i1 += v * cd;
      s2 += v * rd * rd;
      i2 += v * cd * cd;
      x += v * rd * cd;
    }
  }
  // Moments of the retained (renormalized) mass.
  const double z = mass.value();
  JointMoments out;
  out.mean_s = s1.value() / z;
  out.mean_i = i1.value() / z;
  out.var_s = s2.value() / z - out.mean_s * out.mean_s;
  out.var_i = i2.value() / z - out.mean_i * out.mean_i;
  out.cov = x.value() / z - out.mean_s * out.mean_i;
  return out;
}

std::string to_string(FieldComponent::Kind kind) {
  switch (kind) {
    case FieldComponent::Kind::vacuum: return "vacuum";
    case FieldComponent::Kind::thermal: return "thermal";
    case FieldComponent::Kind::poisson: return "poisson";
  }
  return "unknown";
}

}  // namespace twinbeam
