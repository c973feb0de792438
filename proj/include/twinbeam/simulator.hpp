#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "twinbeam/detector_model.hpp"
#include "twinbeam/field_model.hpp"
#include "twinbeam/histogram.hpp"

namespace twinbeam {

struct SimulationConfig {
  TwinBeamModel model;
  DetectorParams signal;
  DetectorParams idler;
  std::uint64_t shots = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

using Rng = std::mt19937_64;

/// Draws a photon number from one component: Poisson with a Gamma(M, b)
/// distributed mean for thermal components, plain Poisson in the Poisson
/// limit, zero for the vacuum.
std::uint32_t sample_component(const FieldComponent& c, Rng& rng);

/// (n + noise_s, n + noise_i) with n drawn from the pair component.
std::pair<std::uint32_t, std::uint32_t> sample_photon_numbers(const TwinBeamModel& model,
                                                              Rng& rng);

/// Pixel-occupancy detection of n photons: each photon is detected with
/// probability eta and lands on a uniformly random pixel, each pixel
/// dark-fires with probability D, and the result is the number of pixels
/// holding at least one event.
std::uint32_t simulate_camera(std::uint32_t n, const DetectorParams& detector, Rng& rng);

/// Photocounts of `trials` independent frames at fixed photon number n.
std::vector<std::uint64_t> camera_frequencies(std::uint32_t n, const DetectorParams& detector,
                                              std::uint64_t trials, std::uint64_t seed);

struct SimulationOutput {
  PhotocountHistogram histogram;
  DarkCountRecord dark;
  SimulationConfig truth;
};

/// Shot-by-shot photocounts in shot order. Shots are generated in fixed
/// blocks, each with its own stream derived from the root seed, so the
/// output is independent of the number of worker threads.
std::vector<CountPair> simulate_shot_list(const SimulationConfig& config);

/// Joint histogram plus an independent dark-only record with the same
/// number of shots.
SimulationOutput simulate_experiment(const SimulationConfig& config);

/// Dark-only record: frames with no incident light.
DarkCountRecord simulate_dark(const DetectorParams& signal, const DetectorParams& idler,
                              std::uint64_t shots, std::uint64_t seed);

}  // namespace twinbeam
