#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

namespace twinbeam {

/// Joint photocount outcome (signal count, idler count).
using CountPair = std::pair<std::uint32_t, std::uint32_t>;

/// Sparse joint histogram: occurrence counts over (c_s, c_i) outcomes.
///
/// Entries are kept in an ordered map so iteration order (and therefore
/// every floating-point reduction over the histogram) is deterministic.
/// Only nonzero cells are stored.
class PhotocountHistogram {
 public:
  PhotocountHistogram() = default;

  /// Adds `count` occurrences of outcome (cs, ci). Zero counts are ignored.
  void add(std::uint32_t cs, std::uint32_t ci, std::uint64_t count = 1);

  /// Order-independent merge of another partial histogram.
  void merge(const PhotocountHistogram& other);

  const std::map<CountPair, std::uint64_t>& entries() const noexcept { return entries_; }
  std::uint64_t shots() const noexcept { return shots_; }
  bool empty() const noexcept { return entries_.empty(); }

  std::uint64_t count(std::uint32_t cs, std::uint32_t ci) const;
  std::uint32_t max_signal() const;
  std::uint32_t max_idler() const;

  std::string label;

  friend bool operator==(const PhotocountHistogram& a, const PhotocountHistogram& b) {
    return a.entries_ == b.entries_ && a.shots_ == b.shots_;
  }

 private:
  std::map<CountPair, std::uint64_t> entries_;
  std::uint64_t shots_ = 0;
};

/// Dark-only record; same joint layout as a photocount histogram, over
/// (d_s, d_i) instead of (c_s, c_i).
using DarkCountRecord = PhotocountHistogram;

/// Product histogram of two independently monitored arms: each pair of
/// marginal rows contributes count_s * count_i occurrences and shots
/// multiply. Used to express independent-arm dark records in joint form.
DarkCountRecord product_record(const std::map<std::uint32_t, std::uint64_t>& signal,
                               const std::map<std::uint32_t, std::uint64_t>& idler);

}  // namespace twinbeam
