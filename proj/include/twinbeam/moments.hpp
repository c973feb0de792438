#pragma once

#include <cstdint>

#include "twinbeam/histogram.hpp"

namespace twinbeam {

/// The five first/second joint moments of a two-arm counting record,
/// as used throughout: <x_s>, <x_i>, <x_s^2>, <x_i^2>, <x_s x_i>.
struct MomentSet {
  double mean_s = 0.0;
  double mean_i = 0.0;
  double second_s = 0.0;
  double second_i = 0.0;
  double cross = 0.0;
};

/// Sample moments of measured photocounts (or dark counts), with the
/// standard error of each estimator.
struct RawMoments {
  MomentSet value;
  MomentSet std_error;
  std::uint64_t shots = 0;
  /// Delta-method errors of the central moments, and the sampling
  /// covariance of the covariance estimator with each mean.
  double var_s_stderr = 0.0;
  double var_i_stderr = 0.0;
  double cov_stderr = 0.0;
  double cov_mean_s_covariance = 0.0;
  double cov_mean_i_covariance = 0.0;
};

/// Photoelectron moments after dark-count elimination, plus the derived
/// variances and covariance.
struct PhotoelectronMoments {
  MomentSet value;
  MomentSet std_error;
  double var_s = 0.0;
  double var_i = 0.0;
  double cov = 0.0;
  double var_s_stderr = 0.0;
  double var_i_stderr = 0.0;
  double cov_stderr = 0.0;
  double cov_mean_s_covariance = 0.0;
  double cov_mean_i_covariance = 0.0;

  /// Builds moments directly from means, variances and covariance (no
  /// standard errors). Convenient for tabulated values.
  static PhotoelectronMoments from_central(double mean_s, double mean_i, double var_s,
                                           double var_i, double cov);
};

/// Sample moments weighted by histogram counts. Standard errors are the
/// square root of each estimator's sample variance divided by shots
/// (no n-1 correction).
RawMoments photocount_moments(const PhotocountHistogram& hist);

/// Removes the dark-count contribution from measured moments: means first,
/// then second moments using the already corrected means, then the cross
/// moment. Raw-moment errors propagate in quadrature through the linear
/// terms; central-moment errors combine the two independent records.
///
/// Throws NegativeMeanAfterSubtraction when a dark mean exceeds the
/// signal mean in either arm.
PhotoelectronMoments subtract_dark(const RawMoments& raw, const RawMoments& dark);

/// Coincidence-to-singles efficiency estimates. The covariance variant
/// divides <dm_s dm_i> by the opposite arm's mean; the raw variant uses
/// <m_s m_i> instead.
struct KlyshkoEstimate {
  double eta_s_cov = 0.0;
  double eta_i_cov = 0.0;
  double eta_s_raw = 0.0;
  double eta_i_raw = 0.0;
  double eta_s_cov_stderr = 0.0;
  double eta_i_cov_stderr = 0.0;
  double eta_s_raw_stderr = 0.0;
  double eta_i_raw_stderr = 0.0;
};

/// Throws ZeroMeanArm when either mean is not positive.
KlyshkoEstimate klyshko_estimate(const PhotoelectronMoments& m);

/// Diagnostic only: idler efficiency corrected by a user-supplied mean
/// number of unpaired idler noise counts, <m_s m_i>/<m_s> - noise.
double noise_corrected_idler_efficiency(const PhotoelectronMoments& m, double idler_noise_mean);

}  // namespace twinbeam
