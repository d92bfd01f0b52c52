#include "botflow/standardize.hpp"

#include <cmath>

#include "botflow/error.hpp"
#include "botflow/running_stats.hpp"

namespace botflow {

StandardizationParams StandardizationParams::fit(const Matrix& x) {
    if (x.rows() == 0) throw ValidationError("cannot standardize an empty table");
    const std::size_t d = x.cols();
    StandardizationParams p;
    p.mean.assign(d, 0.0);
    p.stddev.assign(d, 0.0);
    p.constant.assign(d, false);
    for (std::size_t j = 0; j < d; ++j) {
        // Two-pass: exact mean first, then the centred sum of squares.
        double sum = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) sum += x(i, j);
        const double mean = sum / static_cast<double>(x.rows());
        double ss = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double dlt = x(i, j) - mean;
            ss += dlt * dlt;
        }
        const double sd = x.rows() > 1 ? std::sqrt(ss / static_cast<double>(x.rows() - 1)) : 0.0;
        bool constant = true;
        for (std::size_t i = 1; i < x.rows() && constant; ++i) constant = x(i, j) == x(0, j);
        p.mean[j] = mean;
        p.stddev[j] = constant ? 0.0 : sd;
        p.constant[j] = constant || sd == 0.0;
    }
    return p;
}

StandardizationParams StandardizationParams::identity(std::size_t width) {
    StandardizationParams p;
    p.mean.assign(width, 0.0);
    p.stddev.assign(width, 1.0);
    p.constant.assign(width, false);
    return p;
}

void StandardizationParams::apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < mean.size(); ++j) {
        out[j] = constant[j] ? 0.0 : (in[j] - mean[j]) / stddev[j];
    }
}

Matrix StandardizationParams::apply(const Matrix& x) const {
    if (x.cols() != width()) throw ValidationError("standardization width mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) apply(x.row(i), out.row(i));
    return out;
}

}  // namespace botflow
