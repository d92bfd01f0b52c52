#include "botflow/classifiers/naive_bayes.hpp"

#include <algorithm>
#include <cmath>

#include "botflow/error.hpp"

namespace botflow {

void GaussianNaiveBayes::fit(const Matrix& x, std::span<const int> y) {
    validate_training_data(x, y);
    if (params_.var_smoothing < 0) throw ValidationError("var_smoothing must be non-negative");
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();

    // Population variance of every feature over all rows sets the floor.
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
        max_var = std::max(max_var, ss / static_cast<double>(n));
    }
    epsilon_ = params_.var_smoothing * max_var;
    if (epsilon_ <= 0.0) epsilon_ = params_.var_smoothing > 0 ? params_.var_smoothing : 1e-300;

    std::array<std::size_t, 2> count{};
    for (int c = 0; c < 2; ++c) {
        mean_[c].assign(d, 0.0);
        var_[c].assign(d, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        ++count[y[i]];
        for (std::size_t j = 0; j < d; ++j) mean_[y[i]][j] += x(i, j);
    }
    for (int c = 0; c < 2; ++c) {
        for (auto& m : mean_[c]) m /= static_cast<double>(count[c]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = x(i, j) - mean_[y[i]][j];
            var_[y[i]][j] += dlt * dlt;
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (auto& v : var_[c]) v = v / static_cast<double>(count[c]) + epsilon_;
        prior_[c] = static_cast<double>(count[c]) / static_cast<double>(n);
    }
}

std::array<double, 2> GaussianNaiveBayes::joint_log_likelihood(std::span<const double> row) const {
    std::array<double, 2> out{};
    for (int c = 0; c < 2; ++c) {
        double s = std::log(prior_[c]);
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double v = var_[c][j];
            const double dlt = row[j] - mean_[c][j];
            s += -0.5 * std::log(2.0 * M_PI * v) - 0.5 * dlt * dlt / v;
        }
        out[c] = s;
    }
    return out;
}

std::array<double, 2> GaussianNaiveBayes::posterior(std::span<const double> row) const {
    const auto jll = joint_log_likelihood(row);
    const double m = std::max(jll[0], jll[1]);
    const double e0 = std::exp(jll[0] - m);
    const double e1 = std::exp(jll[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

std::vector<int> GaussianNaiveBayes::predict(const Matrix& x) const {
    validate_width(x, width());
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto jll = joint_log_likelihood(x.row(i));
        out[i] = jll[1] > jll[0] ? 1 : 0;
    }
    return out;
}

void GaussianNaiveBayes::set_state(double epsilon, std::array<double, 2> prior,
                                   std::array<std::vector<double>, 2> mean,
                                   std::array<std::vector<double>, 2> var) {
    epsilon_ = epsilon;
    prior_ = prior;
    mean_ = std::move(mean);
    var_ = std::move(var);
}

}  // namespace botflow
