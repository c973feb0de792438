#pragma once

#include <random>

namespace twinbeam {

template <class Rng>
PhotocountHistogram resample(const PhotocountHistogram& hist, Rng& rng) {
  PhotocountHistogram out;
  out.label = hist.label;
  std::uint64_t remaining = hist.shots();
  std::uint64_t mass_left = hist.shots();
  // Sequential conditional binomials draw one multinomial vector.
  for (const auto& [key, count] : hist.entries()) {
    if (remaining == 0) break;
    std::uint64_t draw;
    if (count >= mass_left) {
      draw = remaining;
    } else {
      const double p = static_cast<double>(count) / static_cast<double>(mass_left);
      std::binomial_distribution<std::uint64_t> bin(remaining, p);
      draw = bin(rng);
    }
    out.add(key.first, key.second, draw);
    remaining -= draw;
    mass_left -= count;
  }
  return out;
}

}  // namespace twinbeam
