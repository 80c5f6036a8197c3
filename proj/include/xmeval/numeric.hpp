#pragma once

#include <cmath>
#include <cstddef>

namespace xmeval {

// Neumaier-compensated accumulator. Per-query averages are summed in a fixed
// (sorted by query id) order through this, which keeps reruns bit-identical
// and the error independent of summand count.
class CompensatedSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_mean(const CompensatedSum& s, std::size_t n) {
  return s.value() / static_cast<double>(n);
}

}  // namespace xmeval
