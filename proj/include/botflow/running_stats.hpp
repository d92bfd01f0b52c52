#pragma once

#include <cstdint>

namespace botflow {

/// Streaming count/sum/min/max with Welford's second moment.
/// mean() is sum/count; stddev() is the sample (n-1) deviation, 0 for n <= 1.
class RunningStats {
public:
    void add(double x) noexcept {
        ++count_;
        sum_ += x;
        if (count_ == 1) {
            min_ = max_ = x;
            welford_mean_ = x;
            m2_ = 0.0;
            return;
        }
        if (x < min_) min_ = x;
        if (x > max_) max_ = x;
        const double delta = x - welford_mean_;
        welford_mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - welford_mean_);
    }

    std::int64_t count() const noexcept { return count_; }
    double sum() const noexcept { return sum_; }
    double min() const noexcept { return count_ > 0 ? min_ : 0.0; }
    double max() const noexcept { return count_ > 0 ? max_ : 0.0; }
    double mean() const noexcept { return count_ > 0 ? sum_ / static_cast<double>(count_) : 0.0; }
    double variance() const noexcept {
        if (count_ <= 1) return 0.0;
        const double v = m2_ / static_cast<double>(count_ - 1);
        return v > 0.0 ? v : 0.0;
    }
    double stddev() const noexcept;

private:
    std::int64_t count_ = 0;
    double sum_ = 0.0;
    double min_ = 0.0;
    double max_ = 0.0;
    double welford_mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace botflow
