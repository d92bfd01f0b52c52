#pragma once

#include <array>
#include <span>
#include <vector>

#include "botflow/classifiers/common.hpp"

namespace botflow {

struct NaiveBayesParams {
    double var_smoothing = 1e-9;
    bool operator==(const NaiveBayesParams&) const = default;
};

/// Gaussian naive Bayes over raw features. Each class-conditional variance is
/// floored by var_smoothing times the largest per-feature variance.
class GaussianNaiveBayes {
public:
    GaussianNaiveBayes() = default;
    explicit GaussianNaiveBayes(NaiveBayesParams params) : params_(params) {}

    void fit(const Matrix& x, std::span<const int> y);

    /// log P(c) + sum_j log N(x_j; mean_cj, var_cj) for c = 0, 1.
    std::array<double, 2> joint_log_likelihood(std::span<const double> row) const;
    /// Normalized posterior P(c | x).
    std::array<double, 2> posterior(std::span<const double> row) const;

    std::vector<int> predict(const Matrix& x) const;

    const NaiveBayesParams& params() const noexcept { return params_; }
    std::size_t width() const noexcept { return mean_[0].size(); }
    double epsilon() const noexcept { return epsilon_; }
    double prior(int c) const noexcept { return prior_[c]; }
    const std::vector<double>& mean(int c) const noexcept { return mean_[c]; }
    const std::vector<double>& variance(int c) const noexcept { return var_[c]; }

    // Serialization access.
    void set_state(double epsilon, std::array<double, 2> prior, std::array<std::vector<double>, 2> mean,
                   std::array<std::vector<double>, 2> var);

private:
    NaiveBayesParams params_;
    double epsilon_ = 0.0;
    std::array<double, 2> prior_{};
    std::array<std::vector<double>, 2> mean_;
    std::array<std::vector<double>, 2> var_;
};

}  // namespace botflow
