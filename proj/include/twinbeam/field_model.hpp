#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "twinbeam/matrix.hpp"

namespace twinbeam {

/// One multimode-thermal (Mandel-Rice) field component: M equally
/// populated modes with b mean photons per mode.
///
/// Two limits get dedicated representations: the vacuum (no photons) and
/// the Poisson limit M -> inf at fixed mean, which Mandel-Rice reaches when
/// the variance equals the mean.
class FieldComponent {
 public:
  enum class Kind { vacuum, thermal, poisson };

  /// Empty component.
  FieldComponent() = default;

  static FieldComponent vacuum() { return {}; }
  /// Throws std::invalid_argument unless modes > 0 and mean_per_mode >= 0.
  static FieldComponent thermal(double modes, double mean_per_mode);
  /// Throws std::invalid_argument unless mean >= 0.
  static FieldComponent poisson(double mean);

  Kind kind() const noexcept { return kind_; }
  /// Mode count M; +inf for the Poisson limit, 0 for the vacuum.
  double modes() const noexcept;
  /// Mean photons per mode b; 0 for the Poisson limit and the vacuum.
  double mean_per_mode() const noexcept { return kind_ == Kind::thermal ? b_ : 0.0; }

  double mean() const noexcept;
  double variance() const noexcept;

  friend bool operator==(const FieldComponent&, const FieldComponent&) = default;

 private:
  Kind kind_ = Kind::vacuum;
  double modes_ = 0.0;  // thermal: M
  double b_ = 0.0;      // thermal: b, poisson: mean
};

/// First and second photon-number moments of a component. Carried in
/// extended precision so that super-Poissonian excess variance survives
/// when b is small.
struct ComponentMoments {
  long double mean = 0.0L;
  long double variance = 0.0L;
};

/// Exact closed forms: mean = M b, variance = M b (1 + b).
ComponentMoments component_moments(const FieldComponent& c);

/// Relative tolerance under which variance == mean selects the Poisson limit.
inline constexpr double kPoissonRelTolerance = 1e-9;
/// Means below this are represented as the vacuum.
inline constexpr double kVacuumMeanTolerance = 1e-14;

/// Inverts the moment map: b = variance/mean - 1, M = mean^2/(variance - mean).
/// Throws SubPoissonianComponent when variance < mean beyond tolerance.
FieldComponent component_from_moments(long double mean, long double variance);

/// Mandel-Rice probability p(n; M, b), evaluated via log-gamma.
double mandel_rice_pmf(std::size_t n, const FieldComponent& c);

/// Truncated PMF p(0..K) of a component where K is the smallest index with
/// cumulative mass >= 1 - mass_tolerance. Throws CutoffOverflow when K
/// would exceed max_len - 1.
std::vector<double> component_pmf(const FieldComponent& c, double mass_tolerance,
                                  std::size_t max_len = 1u << 20);

/// Upper bound on the probability mass strictly beyond index K, given the
/// PMF value p(K).
double pmf_tail_bound(const FieldComponent& c, std::size_t k, double pmf_at_k);

/// Field in front of the detectors: a paired component plus independent
/// unpaired noise in each arm.
struct TwinBeamModel {
  FieldComponent pair;
  FieldComponent noise_s;
  FieldComponent noise_i;

  double mean_pairs() const { return pair.mean(); }

  friend bool operator==(const TwinBeamModel&, const TwinBeamModel&) = default;
};

/// Joint probability table over (row, column) counts with the probability
/// mass lost to truncation.
struct JointDistribution {
  Matrix probabilities;
  double truncated_mass = 0.0;

  std::size_t cutoff_s() const { return probabilities.rows() - 1; }
  std::size_t cutoff_i() const { return probabilities.cols() - 1; }
  double total_mass() const;
};

inline constexpr std::size_t kDefaultMaxGrid = 512;

/// Joint photon-number distribution of the three-component field: the
/// convolution of the pair PMF (on the diagonal) with the two noise PMFs.
/// Each component is cut where its tail mass drops below tail_tolerance/3.
JointDistribution jpnd(const TwinBeamModel& model, double tail_tolerance,
                       std::size_t max_grid = kDefaultMaxGrid);

/// Means, variances and covariance of a joint distribution's marginals.
struct JointMoments {
  double mean_s = 0.0;
  double mean_i = 0.0;
  double var_s = 0.0;
  double var_i = 0.0;
  double cov = 0.0;
};
JointMoments joint_moments(const JointDistribution& p);

std::string to_string(FieldComponent::Kind kind);

}  // namespace twinbeam
