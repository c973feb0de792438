#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twinbeam/detector_model.hpp"
#include "twinbeam/field_model.hpp"
#include "twinbeam/histogram.hpp"
#include "twinbeam/moments.hpp"

namespace twinbeam {

/// Trial values of the two efficiencies and the mean photon-pair number.
struct CandidatePoint {
  double eta_s = 0.0;
  double eta_i = 0.0;
  double mean_pairs = 0.0;
};

/// Closed interval of admissible mean pair numbers.
struct NpInterval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x, double rel_slack = 1e-12) const;
};

/// Range of <n_p> for which the moment equations give a valid
/// three-component field at the given efficiencies:
///   <n_p> < cov/(eta_s eta_i)               (pair component super-Poissonian)
///   <n_p> <= <m_a>/eta_a                    (nonnegative noise means)
///   <n_p> >= <m_a>/eta_a - <(dn_a)^2>       (noise variance >= noise mean)
/// Returns nullopt when the constraints conflict. Throws
/// NonpositiveCovariance when the photoelectron covariance is <= 0.
std::optional<NpInterval> feasible_np_interval(const PhotoelectronMoments& m, double eta_s,
                                               double eta_i);

/// Photon-number moments of the three components implied by the measured
/// moments at a candidate point (before mapping to (M, b)).
struct FieldMoments {
  ComponentMoments pair;
  ComponentMoments noise_s;
  ComponentMoments noise_i;
};
FieldMoments field_moments(const PhotoelectronMoments& m, const CandidatePoint& point);

/// Solves the one-parameter family for the field at `point` and maps each
/// component to (M, b). Throws InfeasiblePoint outside the feasible interval.
TwinBeamModel solve_field(const PhotoelectronMoments& m, const CandidatePoint& point);

/// Photoelectron moments produced by a field seen through detectors of the
/// given efficiencies (no dark counts).
PhotoelectronMoments forward_moments(const TwinBeamModel& model, double eta_s, double eta_i);

/// Model probabilities below this are treated as outside the model support.
inline constexpr double kSupportFloor = 1e-15;

/// Euclidean distance between a model photocount distribution and the
/// frequency-normalized histogram, summed over the union of supports.
double declination(const JointDistribution& p_c, const PhotocountHistogram& f);

/// Pixel counts of the two detector regions.
struct Geometry {
  std::uint32_t pixels_s = 0;
  std::uint32_t pixels_i = 0;
};

/// Pixel counts and per-pixel dark rates of both arms.
struct DetectorSetup {
  std::uint32_t pixels_s = 0;
  std::uint32_t pixels_i = 0;
  double dark_rate_s = 0.0;
  double dark_rate_i = 0.0;
};

/// Per-pixel dark rates D_a = <d_a>/N_a from a dark record.
DetectorSetup detector_setup(const Geometry& geometry, const RawMoments& dark);

struct CalibrationOptions {
  /// Relative half-width of the coarse efficiency grid around its center.
  double grid_span = 0.5;
  /// Coarse grid spacing in efficiency units.
  double grid_step = 0.005;
  /// Grid center; defaults to the covariance baseline estimates.
  std::optional<double> center_eta_s;
  std::optional<double> center_eta_i;
  /// Relative tolerance of the golden-section search over <n_p>.
  double np_rel_tolerance = 1e-4;
  /// Simplex stops when the spread of D over its vertices falls below this.
  double simplex_tolerance = 1e-10;
  int simplex_max_iterations = 200;
  bool refine = true;
  /// Photon-number tail mass allowed per evaluation of the field.
  double tail_tolerance = 1e-6;
  std::size_t max_grid = kDefaultMaxGrid;
  /// Photocount rows modeled beyond the largest observed count.
  std::uint32_t count_margin = 10;
};

/// Efficiency values of a scan, each axis ascending.
struct GridSpec {
  std::vector<double> eta_s;
  std::vector<double> eta_i;
};

/// center +- span*center in steps of `step`, clipped to (0, 1].
std::vector<double> centered_axis(double center, double span, double step);
/// lo, lo+step, ..., <= hi, clipped to (0, 1].
std::vector<double> range_axis(double lo, double hi, double step);

struct SurfaceCell {
  double eta_s = 0.0;
  double eta_i = 0.0;
  /// Minimum D over the feasible <n_p> interval; empty when infeasible.
  std::optional<double> declination;
  double mean_pairs = 0.0;
  std::uint32_t evaluations = 0;
};

/// Inner minima over a grid, row-major with eta_s as the slow axis.
struct Surface {
  GridSpec grid;
  std::vector<SurfaceCell> cells;

  const SurfaceCell& at(std::size_t is, std::size_t ii) const {
    return cells[is * grid.eta_i.size() + ii];
  }
  /// Index of the minimal feasible cell, ties broken by smallest
  /// (eta_s, eta_i); nullopt if every cell is infeasible.
  std::optional<std::size_t> argmin() const;
  std::size_t infeasible_count() const;
};

/// For every grid cell, the golden-section minimum of D over the feasible
/// <n_p> interval, or an infeasible marker.
Surface scan_surface(const PhotoelectronMoments& m, const PhotocountHistogram& f,
                     const DetectorSetup& detectors, const GridSpec& grid,
                     const CalibrationOptions& options = {});

enum class FitStatus { converged, boundary, infeasible };
std::string to_string(FitStatus s);
FitStatus fit_status_from_string(const std::string& s);

struct ParameterErrors {
  double eta_s = 0.0;
  double eta_i = 0.0;
  double mean_pairs = 0.0;
};

struct BootstrapSummary {
  ParameterErrors stderr_values;
  std::uint32_t replicas = 0;
  std::uint32_t failures = 0;
  std::uint64_t seed = 0;
  /// Fewer than two successful replicas: the spread is undefined and set to zero.
  bool degenerate = false;
};

struct FitDiagnostics {
  std::uint64_t evaluations = 0;
  std::uint32_t grid_cells = 0;
  std::uint32_t infeasible_cells = 0;
  double grid_step = 0.0;
  int simplex_iterations = 0;
  std::uint32_t c_max_s = 0;
  std::uint32_t c_max_i = 0;
  double field_truncated_mass = 0.0;
  double counts_truncated_mass = 0.0;
};

struct CalibrationResult {
  CandidatePoint point;
  TwinBeamModel model;
  double declination = 0.0;
  PhotoelectronMoments moments;
  DetectorSetup detectors;
  KlyshkoEstimate baseline;
  FitStatus status = FitStatus::converged;
  FitDiagnostics diagnostics;
  std::optional<BootstrapSummary> bootstrap;
};

/// Full pipeline: moments, dark subtraction, baseline, coarse grid with
/// inner golden-section search, then simplex refinement over
/// (eta_s, eta_i, <n_p>). Deterministic for fixed inputs and options.
///
/// Throws NoFeasibleRegion (NonpositiveCovariance when the data carry no
/// positive covariance) if no grid cell admits a valid field.
CalibrationResult calibrate(const PhotocountHistogram& hist, const DarkCountRecord& dark,
                            const Geometry& geometry, const CalibrationOptions& options = {});

/// Multinomial resampling of histogram and dark record, re-running
/// calibrate around the original optimum (+-10% grid) for each replica.
/// Throws BootstrapFailure when more than 10% of replicas fail.
BootstrapSummary bootstrap_uncertainty(const PhotocountHistogram& hist,
                                       const DarkCountRecord& dark, const Geometry& geometry,
                                       const CalibrationOptions& options,
                                       const CalibrationResult& original, std::uint32_t replicas,
                                       std::uint64_t seed);

/// Multinomial resample of a histogram with the same number of shots.
template <class Rng>
PhotocountHistogram resample(const PhotocountHistogram& hist, Rng& rng);

}  // namespace twinbeam

#include "twinbeam/resample_impl.hpp"
