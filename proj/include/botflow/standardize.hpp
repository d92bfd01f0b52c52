#pragma once

#include <span>
#include <vector>

#include "botflow/matrix.hpp"

namespace botflow {

/// Per-column mean and sample standard deviation. Columns with zero deviation
/// are flagged constant and map to 0.
struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> constant;

    std::size_t width() const noexcept { return mean.size(); }

    /// Throws ValidationError for an empty matrix.
    static StandardizationParams fit(const Matrix& x);

    /// Identity transform of the given width.
    static StandardizationParams identity(std::size_t width);

    void apply(std::span<const double> in, std::span<double> out) const;
    Matrix apply(const Matrix& x) const;

    bool operator==(const StandardizationParams&) const = default;
};

}  // namespace botflow
