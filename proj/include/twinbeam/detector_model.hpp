#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "twinbeam/field_model.hpp"
#include "twinbeam/matrix.hpp"

namespace twinbeam {

/// Pixelated photon-number-resolving detector: N identical independent
/// pixels, detection efficiency eta, and per-pixel per-frame dark-count
/// probability D.
struct DetectorParams {
  std::uint32_t pixels = 1;
  double efficiency = 1.0;
  double dark_rate = 0.0;

  /// Throws std::invalid_argument unless N >= 1, 0 < eta <= 1, 0 <= D < 1.
  void validate() const;

  friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

/// How T(c, n) is evaluated.
///
/// `occupancy` propagates the distribution of distinct photon-hit pixels
/// photon by photon and then folds in the binomial dark pixels. Every term
/// is nonnegative, so it is accurate for all (c, n).
///
/// `alternating` sums the closed-form inclusion-exclusion series over l in
/// double precision (log-magnitude terms, largest first, compensated
/// accumulation) and throws NumericalInstability when cancellation leaves a
/// relative uncertainty above `instability_tolerance`.
///
/// `alternating_exact` evaluates the same series in 400-digit binary
/// floating point. Slow; intended for validation.
enum class ResponseMethod { occupancy, alternating, alternating_exact };

struct ResponseOptions {
  ResponseMethod method = ResponseMethod::occupancy;
  double instability_tolerance = 1e-6;
  /// With `alternating`, re-evaluate flagged entries exactly instead of throwing.
  bool exact_fallback = false;
};

/// T(c, n): probability of c photocounts given n incident photons, for
/// c in 0..c_max (rows) and n in 0..n_max (columns).
struct ResponseMatrix {
  DetectorParams detector;
  Matrix values;
  /// Per-column probability of more than c_max counts.
  std::vector<double> column_tail;
  /// Entries in (-1e-12, 0) that were clamped to zero.
  std::size_t clamped_entries = 0;
  /// Entries re-evaluated on the exact path (alternating + exact_fallback).
  std::size_t exact_entries = 0;

  std::size_t c_max() const { return values.rows() - 1; }
  std::size_t n_max() const { return values.cols() - 1; }
  double operator()(std::size_t c, std::size_t n) const { return values(c, n); }
};

/// Builds T(c, n). Requires c_max <= N.
ResponseMatrix detection_matrix(const DetectorParams& detector, std::size_t n_max,
                                std::size_t c_max, const ResponseOptions& options = {});

/// Single T(c, n) by the exact alternating series; independent of the
/// double-precision paths and used as their reference.
double detection_probability_exact(const DetectorParams& detector, std::size_t c, std::size_t n);

/// Joint photocount distribution p_c = T_s * p * T_i^T over the field grid.
/// Throws DimensionMismatch if a response matrix has fewer photon-number
/// columns than the field's cutoff requires.
JointDistribution jpcd(const JointDistribution& field, const ResponseMatrix& t_s,
                       const ResponseMatrix& t_i);

/// Truncated PMFs of the three field components.
struct ComponentPmfs {
  std::vector<double> pair;
  std::vector<double> noise_s;
  std::vector<double> noise_i;
  double truncated_mass = 0.0;
};

ComponentPmfs component_pmfs(const TwinBeamModel& model, double tail_tolerance,
                             std::size_t max_grid = kDefaultMaxGrid);

/// Same quantity as jpcd(jpnd(model), T_s, T_i) with the sums reordered:
/// each arm's noise is folded into its response first, then the pair PMF
/// couples the arms. Much cheaper when the pair component is narrow.
JointDistribution jpcd_from_components(const ComponentPmfs& pmfs, const ResponseMatrix& t_s,
                                       const ResponseMatrix& t_i);

/// Single-arm photocount distribution sum_n T(c, n) p(n).
std::vector<double> single_arm_counts(const std::vector<double>& photon_pmf,
                                      const ResponseMatrix& t);

}  // namespace twinbeam
