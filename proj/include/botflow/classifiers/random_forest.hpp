#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "botflow/classifiers/common.hpp"
#include "botflow/parallel.hpp"

namespace botflow {

struct RandomForestParams {
    int n_trees = 100;
    int max_features = 0;  // 0: ceil(sqrt(width))
    int min_samples_split = 2;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    bool operator==(const RandomForestParams&) const = default;
};

/// CART classification tree with Gini impurity. Samples go left when
/// x[feature] <= threshold.
class DecisionTree {
public:
    struct Node {
        int feature = -1;  // -1 for a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        std::array<double, 2> counts{};  // class counts of the samples reaching this node
    };

    /// Grows the tree on the given sample indices (duplicates allowed, as
    /// produced by bootstrapping) until leaves are pure, smaller than
    /// min_samples_split, or constant in every feature.
    static DecisionTree grow(const Matrix& x, std::span<const int> y, std::vector<std::size_t> samples,
                             int max_features, int min_samples_split, std::uint64_t seed);

    const Node& leaf_for(std::span<const double> row) const;
    int predict_one(std::span<const double> row) const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::vector<Node>& nodes() noexcept { return nodes_; }
    std::size_t depth() const;

private:
    std::vector<Node> nodes_;
};

/// Bagged Gini trees with per-split feature subsampling. Tree t draws its
/// bootstrap sample and feature subsets from a stream derived from (seed, t),
/// so building trees in parallel reproduces the serial forest exactly.
/// Prediction is a majority vote of tree classes; ties go to class 0.
class RandomForest {
public:
    RandomForest() = default;
    explicit RandomForest(RandomForestParams params) : params_(params) {}

    void fit(const Matrix& x, std::span<const int> y, Exec exec = Exec::parallel);

    int predict_one(std::span<const double> row) const;
    std::vector<int> predict(const Matrix& x, Exec exec = Exec::parallel) const;

    const RandomForestParams& params() const noexcept { return params_; }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    std::size_t width() const noexcept { return width_; }
    int effective_max_features() const noexcept;

    void set_state(std::size_t width, std::vector<DecisionTree> trees);

private:
    RandomForestParams params_;
    std::vector<DecisionTree> trees_;
    std::size_t width_ = 0;
};

}  // namespace botflow
