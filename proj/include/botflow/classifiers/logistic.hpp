#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "botflow/classifiers/common.hpp"
#include "botflow/parallel.hpp"
#include "botflow/standardize.hpp"

namespace botflow {

struct LogisticParams {
    double l2_lambda = 1.0;
    double learning_rate = 0.1;
    int max_iters = 1000;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    bool operator==(const LogisticParams&) const = default;
};

/// Objective minimized by the trainer, on already-transformed features:
///   J(w, b) = (1/n) sum_i logloss(y_i, w.x_i + b) + (lambda / 2n) |w|^2
double logistic_objective(std::span<const double> w, double b, const Matrix& x, std::span<const int> y,
                          double l2_lambda);

struct LogisticGradient {
    std::vector<double> w;
    double b = 0.0;
};

/// Analytic gradient of logistic_objective. Rows are reduced in fixed-size
/// chunks combined in chunk order, so the serial and OpenMP kernels agree bit for bit.
LogisticGradient logistic_gradient(std::span<const double> w, double b, const Matrix& x, std::span<const int> y,
                                   double l2_lambda, Exec exec = Exec::serial);

/// L2-regularized logistic regression trained by full-batch gradient descent
/// from zero weights on internally standardized features.
class LogisticRegression {
public:
    LogisticRegression() = default;
    explicit LogisticRegression(LogisticParams params) : params_(params) {}

    /// Builds a fitted model directly (identity scaling unless given).
    static LogisticRegression from_weights(std::vector<double> w, double b);

    void fit(const Matrix& x, std::span<const int> y, Exec exec = Exec::parallel);

    /// w . standardize(x) + b
    double decision(std::span<const double> row) const;
    /// Class 1 iff sigmoid(decision) >= 0.5.
    std::vector<int> predict(const Matrix& x) const;

    const LogisticParams& params() const noexcept { return params_; }
    const std::vector<double>& weights() const noexcept { return w_; }
    double bias() const noexcept { return b_; }
    int iterations() const noexcept { return iterations_; }
    bool converged() const noexcept { return converged_; }
    const StandardizationParams& scaler() const noexcept { return scaler_; }
    std::size_t width() const noexcept { return w_.size(); }

    void set_state(StandardizationParams scaler, std::vector<double> w, double b);

private:
    LogisticParams params_;
    StandardizationParams scaler_;
    std::vector<double> w_;
    double b_ = 0.0;
    int iterations_ = 0;
    bool converged_ = false;
};

double sigmoid(double z) noexcept;

}  // namespace botflow
