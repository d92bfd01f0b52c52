#pragma once

#include <span>
#include <vector>

#include "botflow/classifiers/common.hpp"
#include "botflow/parallel.hpp"
#include "botflow/standardize.hpp"

namespace botflow {

struct KnnParams {
    int k = 5;
    bool operator==(const KnnParams&) const = default;
};

/// Brute-force k-nearest-neighbours on standardized features, Euclidean metric.
/// Distance ties go to the lower training row; vote ties go to class 0.
class KNearestNeighbors {
public:
    KNearestNeighbors() = default;
    explicit KNearestNeighbors(KnnParams params) : params_(params) {}

    void fit(const Matrix& x, std::span<const int> y);

    /// Training-row indices of the k nearest neighbours of one raw query row,
    /// nearest first.
    std::vector<std::size_t> neighbors(std::span<const double> row) const;

    int predict_one(std::span<const double> row) const;
    std::vector<int> predict(const Matrix& x, Exec exec = Exec::parallel) const;

    const KnnParams& params() const noexcept { return params_; }
    const StandardizationParams& scaler() const noexcept { return scaler_; }
    const Matrix& train() const noexcept { return train_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    std::size_t width() const noexcept { return scaler_.width(); }

    void set_state(StandardizationParams scaler, Matrix train, std::vector<int> labels);

private:
    KnnParams params_;
    StandardizationParams scaler_;
    Matrix train_;  // standardized
    std::vector<int> labels_;
};

}  // namespace botflow
