#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace zenopm {

/// Neumaier-compensated running sum.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Streaming count/mean/variance over compensated sums. Partial accumulators
// must be merged in a fixed order to keep results bit-reproducible.
class MomentAccumulator {
 public:
  void add(double x) {
    ++count_;
    sum_.add(x);
    sum_sq_.add(x * x);
  }

  void merge(const MomentAccumulator& other) {
    count_ += other.count_;
    sum_.add(other.sum_.value());
    sum_sq_.add(other.sum_sq_.value());
  }

  std::int64_t count() const { return count_; }

  double mean() const {
    if (count_ < 1) return std::numeric_limits<double>::quiet_NaN();
    return sum_.value() / static_cast<double>(count_);
  }

  /// Unbiased sample variance; NaN for fewer than two observations.
  double sample_variance() const {
    if (count_ < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(count_);
    const double m = mean();
    const double centered = sum_sq_.value() - n * m * m;
    return std::max(centered, 0.0) / (n - 1.0);
  }

  double sample_std() const { return std::sqrt(sample_variance()); }

  /// Standard error of the mean, sample_std / sqrt(n).
  double std_error() const {
    if (count_ < 1) return std::numeric_limits<double>::quiet_NaN();
    return sample_std() / std::sqrt(static_cast<double>(count_));
  }

 private:
  std::int64_t count_ = 0;
  NeumaierSum sum_;
  NeumaierSum sum_sq_;
};

}  // namespace zenopm
