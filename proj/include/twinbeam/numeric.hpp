#pragma once

#include <cmath>

namespace twinbeam {

/// Neumaier-compensated accumulator. The running compensation captures the
/// low-order bits lost by each addition, so the result is as accurate as
/// if the sum had been carried in roughly twice the working precision.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace twinbeam
