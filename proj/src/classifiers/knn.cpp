#include "botflow/classifiers/knn.hpp"

#include <algorithm>
#include <utility>

#include "botflow/error.hpp"

namespace botflow {

void KNearestNeighbors::fit(const Matrix& x, std::span<const int> y) {
    validate_training_data(x, y);
    if (params_.k < 1) throw ValidationError("k must be at least 1");
    scaler_ = StandardizationParams::fit(x);
    train_ = scaler_.apply(x);
    labels_.assign(y.begin(), y.end());
}

std::vector<std::size_t> KNearestNeighbors::neighbors(std::span<const double> row) const {
    const std::size_t d = width();
    std::vector<double> q(d);
    scaler_.apply(row, q);
    const std::size_t n = train_.rows();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params_.k), n);

    // (squared distance, row) kept as a max-heap of the best k so far.
    using Entry = std::pair<double, std::size_t>;
    std::vector<Entry> heap;
    heap.reserve(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = train_.row(i);
        double dist = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = t[j] - q[j];
            dist += dlt * dlt;
        }
        const Entry e{dist, i};
        if (heap.size() < k) {
            heap.push_back(e);
            std::push_heap(heap.begin(), heap.end());
        } else if (e < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = e;
            std::push_heap(heap.begin(), heap.end());
        }
    }
    std::sort_heap(heap.begin(), heap.end());
    std::vector<std::size_t> out;
    out.reserve(heap.size());
    for (const auto& e : heap) out.push_back(e.second);
    return out;
}

int KNearestNeighbors::predict_one(std::span<const double> row) const {
    std::size_t votes[2] = {0, 0};
    for (auto i : neighbors(row)) ++votes[labels_[i]];
    return votes[1] > votes[0] ? 1 : 0;
}

std::vector<int> KNearestNeighbors::predict(const Matrix& x, Exec exec) const {
    validate_width(x, width());
    std::vector<int> out(x.rows());
    for_each_index(x.rows(), exec, [&](std::size_t i) { out[i] = predict_one(x.row(i)); });
    return out;
}

void KNearestNeighbors::set_state(StandardizationParams scaler, Matrix train, std::vector<int> labels) {
    scaler_ = std::move(scaler);
    train_ = std::move(train);
    labels_ = std::move(labels);
}

}  // namespace botflow
