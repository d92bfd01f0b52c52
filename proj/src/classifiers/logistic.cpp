#include "botflow/classifiers/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "botflow/error.hpp"

namespace botflow {

namespace {

// Rows per partial sum. Fixed so the reduction order never depends on the
// number of threads.
constexpr std::size_t kChunkRows = 512;

double dot(std::span<const double> w, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
    return s;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double sigmoid(double z) noexcept {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logistic_objective(std::span<const double> w, double b, const Matrix& x, std::span<const int> y,
                          double l2_lambda) {
    const std::size_t n = x.rows();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = dot(w, x.row(i)) + b;
        // -[y log s(z) + (1-y) log(1 - s(z))] = softplus(z) - y z
        loss += softplus(z) - (y[i] ? z : 0.0);
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return loss / static_cast<double>(n) + l2_lambda * reg / (2.0 * static_cast<double>(n));
}

LogisticGradient logistic_gradient(std::span<const double> w, double b, const Matrix& x, std::span<const int> y,
                                   double l2_lambda, Exec exec) {
    const std::size_t n = x.rows();
    const std::size_t d = w.size();
    const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;
    // Per chunk: d weight partials followed by the bias partial.
    std::vector<double> partial(chunks * (d + 1), 0.0);
    for_each_index(chunks, exec, [&](std::size_t c) {
        double* acc = partial.data() + c * (d + 1);
        const std::size_t end = std::min(n, (c + 1) * kChunkRows);
        for (std::size_t i = c * kChunkRows; i < end; ++i) {
            const auto row = x.row(i);
            const double r = sigmoid(dot(w, row) + b) - static_cast<double>(y[i]);
            for (std::size_t j = 0; j < d; ++j) acc[j] += r * row[j];
            acc[d] += r;
        }
    });
    LogisticGradient g;
    g.w.assign(d, 0.0);
    for (std::size_t c = 0; c < chunks; ++c) {
        const double* acc = partial.data() + c * (d + 1);
        for (std::size_t j = 0; j < d; ++j) g.w[j] += acc[j];
        g.b += acc[d];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) g.w[j] = g.w[j] * inv_n + l2_lambda * w[j] * inv_n;
    g.b *= inv_n;
    return g;
}

LogisticRegression LogisticRegression::from_weights(std::vector<double> w, double b) {
    LogisticRegression m;
    m.scaler_ = StandardizationParams::identity(w.size());
    m.w_ = std::move(w);
    m.b_ = b;
    return m;
}

void LogisticRegression::fit(const Matrix& x, std::span<const int> y, Exec exec) {
    validate_training_data(x, y);
    if (params_.l2_lambda < 0) throw ValidationError("l2_lambda must be non-negative");
    if (!(params_.learning_rate > 0)) throw ValidationError("learning_rate must be positive");
    if (params_.max_iters < 1) throw ValidationError("max_iters must be at least 1");
    scaler_ = StandardizationParams::fit(x);
    const Matrix xs = scaler_.apply(x);
    const std::size_t d = x.cols();
    w_.assign(d, 0.0);
    b_ = 0.0;
    converged_ = false;
    iterations_ = 0;
    for (int it = 0; it < params_.max_iters; ++it) {
        const auto g = logistic_gradient(w_, b_, xs, y, params_.l2_lambda, exec);
        double max_step = std::abs(params_.learning_rate * g.b);
        for (std::size_t j = 0; j < d; ++j) {
            const double step = params_.learning_rate * g.w[j];
            w_[j] -= step;
            max_step = std::max(max_step, std::abs(step));
        }
        b_ -= params_.learning_rate * g.b;
        iterations_ = it + 1;
        if (max_step < params_.tol) {
            converged_ = true;
            break;
        }
    }
    for (double v : w_) {
        if (!std::isfinite(v)) throw ValidationError("logistic regression diverged");
    }
}

double LogisticRegression::decision(std::span<const double> row) const {
    std::vector<double> z(w_.size());
    scaler_.apply(row, z);
    return dot(w_, z) + b_;
}

std::vector<int> LogisticRegression::predict(const Matrix& x) const {
    validate_width(x, width());
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = sigmoid(decision(x.row(i))) >= 0.5 ? 1 : 0;
    return out;
}

void LogisticRegression::set_state(StandardizationParams scaler, std::vector<double> w, double b) {
    scaler_ = std::move(scaler);
    w_ = std::move(w);
    b_ = b;
}

}  // namespace botflow
