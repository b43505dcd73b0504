#pragma once

#include <cmath>

namespace mlab {

// Neumaier's variant of Kahan summation.  The (sum, compensation) pair is the
// full state: continuing from a saved pair reproduces the same bits as an
// uninterrupted run.
class CompensatedSum {
 public:
  constexpr CompensatedSum() = default;
  constexpr CompensatedSum(double sum, double comp) : sum_(sum), comp_(comp) {}

  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }

  double value() const { return sum_ + comp_; }
  double raw_sum() const { return sum_; }
  double compensation() const { return comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace mlab
