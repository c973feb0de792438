#include "twinbeam/simulator.hpp"

#include <algorithm>
#include <stdexcept>

#include "twinbeam/parallel.hpp"

namespace twinbeam {

namespace {

constexpr std::uint64_t kBlockShots = 4096;

enum class Stream : std::uint32_t { light = 1, dark = 2, camera = 3 };

Rng block_rng(std::uint64_t seed, std::uint64_t block, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

template <class ShotFn>
std::vector<CountPair> run_blocks(std::uint64_t shots, std::uint64_t seed, Stream stream,
                                  ShotFn&& shot) {
  std::vector<CountPair> out(shots);
  const std::uint64_t blocks = (shots + kBlockShots - 1) / kBlockShots;
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng = block_rng(seed, b, stream);
    const std::uint64_t end = std::min<std::uint64_t>(shots, (b + 1) * kBlockShots);
    for (std::uint64_t k = b * kBlockShots; k < end; ++k) out[k] = shot(rng);
  });
  return out;
}

PhotocountHistogram tally(const std::vector<CountPair>& shots) {
  PhotocountHistogram h;
  for (const auto& s : shots) h.add(s.first, s.second);
  return h;
}

}  // namespace

void SimulationConfig::validate() const {
  if (shots < 1) throw std::invalid_argument("simulation needs at least one shot");
  signal.validate();
  idler.validate();
}

std::uint32_t sample_component(const FieldComponent& c, Rng& rng) {
  double mean = 0.0;
  switch (c.kind()) {
    case FieldComponent::Kind::vacuum:
      return 0;
    case FieldComponent::Kind::poisson:
      mean = c.mean();
      break;
    case FieldComponent::Kind::thermal: {
      std::gamma_distribution<double> gamma(c.modes(), c.mean_per_mode());
      mean = gamma(rng);
      break;
    }
  }
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint32_t> poisson(mean);
  return poisson(rng);
}

std::pair<std::uint32_t, std::uint32_t> sample_photon_numbers(const TwinBeamModel& model,
                                                              Rng& rng) {
  const std::uint32_t pairs = sample_component(model.pair, rng);
  const std::uint32_t ns = sample_component(model.noise_s, rng);
  const std::uint32_t ni = sample_component(model.noise_i, rng);
  return {pairs + ns, pairs + ni};
}

std::uint32_t simulate_camera(std::uint32_t n, const DetectorParams& det, Rng& rng) {
  // Pixels are exchangeable, so the dark-fired ones can be taken to be
  // indices [0, dark) without loss of generality.
  std::uint32_t dark = 0;
  if (det.dark_rate > 0.0) {
    std::binomial_distribution<std::uint32_t> fire(det.pixels, det.dark_rate);
    dark = fire(rng);
  }
  std::uint32_t detected = n;
  if (det.efficiency < 1.0 && n > 0) {
    std::binomial_distribution<std::uint32_t> keep(n, det.efficiency);
    detected = keep(rng);
  }
  if (detected == 0) return dark;
  std::uniform_int_distribution<std::uint32_t> pixel(0, det.pixels - 1);
  std::vector<std::uint32_t> hit;
  hit.reserve(detected);
  for (std::uint32_t k = 0; k < detected; ++k) {
    const std::uint32_t p = pixel(rng);
    if (p < dark) continue;
    if (std::find(hit.begin(), hit.end(), p) == hit.end()) hit.push_back(p);
  }
  return dark + static_cast<std::uint32_t>(hit.size());
}

std::vector<std::uint64_t> camera_frequencies(std::uint32_t n, const DetectorParams& detector,
                                              std::uint64_t trials, std::uint64_t seed) {
  detector.validate();
  const auto shots = run_blocks(trials, seed, Stream::camera, [&](Rng& rng) {
    return CountPair{simulate_camera(n, detector, rng), 0};
  });
  std::vector<std::uint64_t> freq;
  for (const auto& s : shots) {
    if (s.first >= freq.size()) freq.resize(s.first + 1, 0);
    ++freq[s.first];
  }
  return freq;
}

std::vector<CountPair> simulate_shot_list(const SimulationConfig& config) {
  config.validate();
  return run_blocks(config.shots, config.seed, Stream::light, [&](Rng& rng) {
    const auto [ns, ni] = sample_photon_numbers(config.model, rng);
    const std::uint32_t cs = simulate_camera(ns, config.signal, rng);
    const std::uint32_t ci = simulate_camera(ni, config.idler, rng);
    return CountPair{cs, ci};
  });
}

DarkCountRecord simulate_dark(const DetectorParams& signal, const DetectorParams& idler,
                              std::uint64_t shots, std::uint64_t seed) {
  signal.validate();
  idler.validate();
  return tally(run_blocks(shots, seed, Stream::dark, [&](Rng& rng) {
    const std::uint32_t ds = simulate_camera(0, signal, rng);
    const std::uint32_t di = simulate_camera(0, idler, rng);
    return CountPair{ds, di};
  }));
}

SimulationOutput simulate_experiment(const SimulationConfig& config) {
  SimulationOutput out;
  out.histogram = tally(simulate_shot_list(config));
  out.dark = simulate_dark(config.signal, config.idler, config.shots, config.seed);
  out.truth = config;
  return out;
}

}  // namespace twinbeam
