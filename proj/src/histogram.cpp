#include "twinbeam/histogram.hpp"

#include <algorithm>

namespace twinbeam {

void PhotocountHistogram::add(std::uint32_t cs, std::uint32_t ci, std::uint64_t count) {
  if (count == 0) return;
  entries_[{cs, ci}] += count;
  shots_ += count;
}

void PhotocountHistogram::merge(const PhotocountHistogram& other) {
  for (const auto& [key, count] : other.entries_) add(key.first, key.second, count);
}

std::uint64_t PhotocountHistogram::count(std::uint32_t cs, std::uint32_t ci) const {
  auto it = entries_.find({cs, ci});
  return it == entries_.end() ? 0 : it->second;
}

std::uint32_t PhotocountHistogram::max_signal() const {
  std::uint32_t m = 0;
  for (const auto& [key, count] : entries_) m = std::max(m, key.first);
  return m;
}

std::uint32_t PhotocountHistogram::max_idler() const {
  std::uint32_t m = 0;
  for (const auto& [key, count] : entries_) m = std::max(m, key.second);
  return m;
}

DarkCountRecord product_record(const std::map<std::uint32_t, std::uint64_t>& signal,
                               const std::map<std::uint32_t, std::uint64_t>& idler) {
  DarkCountRecord out;
  for (const auto& [ds, ns] : signal)
    for (const auto& [di, ni] : idler) out.add(ds, di, ns * ni);
  return out;
}

}  // namespace twinbeam
