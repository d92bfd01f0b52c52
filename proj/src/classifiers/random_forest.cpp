#include "botflow/classifiers/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "botflow/error.hpp"
#include "botflow/rng.hpp"

namespace botflow {

namespace {

double gini_weighted(double n0, double n1) {
    // n * gini = n - (n0^2 + n1^2) / n
    const double n = n0 + n1;
    return n > 0 ? n - (n0 * n0 + n1 * n1) / n : 0.0;
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

}  // namespace

DecisionTree DecisionTree::grow(const Matrix& x, std::span<const int> y, std::vector<std::size_t> samples,
                                int max_features, int min_samples_split, std::uint64_t seed) {
    DecisionTree tree;
    Rng rng(seed);
    const auto d = static_cast<int>(x.cols());
    const int mtry = std::clamp(max_features, 1, std::max(d, 1));
    std::vector<int> features(static_cast<std::size_t>(d));
    std::vector<std::pair<double, int>> column;

    struct Pending {
        int node;
        std::size_t begin;
        std::size_t end;
    };
    std::vector<Pending> stack;
    tree.nodes_.emplace_back();
    stack.push_back({0, 0, samples.size()});

    while (!stack.empty()) {
        const Pending job = stack.back();
        stack.pop_back();
        std::array<double, 2> counts{};
        for (std::size_t i = job.begin; i < job.end; ++i) counts[y[samples[i]]] += 1.0;
        tree.nodes_[job.node].counts = counts;
        const auto size = job.end - job.begin;
        if (counts[0] == 0 || counts[1] == 0 || size < static_cast<std::size_t>(min_samples_split)) continue;

        // Visit features in a random order until mtry non-constant ones have
        // been evaluated (constant ones do not count against the budget).
        std::iota(features.begin(), features.end(), 0);
        Split best;
        best.impurity = gini_weighted(counts[0], counts[1]);
        bool found = false;
        int evaluated = 0;
        for (int k = 0; k < d && evaluated < mtry; ++k) {
            const auto pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - k)));
            std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(pick)]);
            const int f = features[static_cast<std::size_t>(k)];

            column.clear();
            for (std::size_t i = job.begin; i < job.end; ++i) {
                column.emplace_back(x(samples[i], static_cast<std::size_t>(f)), y[samples[i]]);
            }
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;
            ++evaluated;

            std::array<double, 2> left{};
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                left[column[i].second] += 1.0;
                if (column[i].first == column[i + 1].first) continue;
                const double imp = gini_weighted(left[0], left[1]) +
                                   gini_weighted(counts[0] - left[0], counts[1] - left[1]);
                if (!found || imp < best.impurity) {
                    double thr = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
                    if (!(thr < column[i + 1].first)) thr = column[i].first;
                    best = {f, thr, imp};
                    found = true;
                }
            }
        }
        if (!found) continue;

        auto mid = std::partition(samples.begin() + static_cast<std::ptrdiff_t>(job.begin),
                                  samples.begin() + static_cast<std::ptrdiff_t>(job.end), [&](std::size_t s) {
                                      return x(s, static_cast<std::size_t>(best.feature)) <= best.threshold;
                                  });
        const auto split_at = static_cast<std::size_t>(mid - samples.begin());
        const int left_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.emplace_back();
        const int right_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.emplace_back();
        auto& node = tree.nodes_[job.node];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left_id;
        node.right = right_id;
        stack.push_back({right_id, split_at, job.end});
        stack.push_back({left_id, job.begin, split_at});
    }
    return tree;
}

const DecisionTree::Node& DecisionTree::leaf_for(std::span<const double> row) const {
    const Node* n = &nodes_.front();
    while (n->feature >= 0) {
        n = &nodes_[static_cast<std::size_t>(row[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left
                                                                                                       : n->right)];
    }
    return *n;
}

int DecisionTree::predict_one(std::span<const double> row) const {
    const auto& c = leaf_for(row).counts;
    return c[1] > c[0] ? 1 : 0;
}

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 1}};
    std::size_t best = 0;
    while (!stack.empty()) {
        auto [id, dpt] = stack.back();
        stack.pop_back();
        best = std::max(best, dpt);
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        if (n.feature >= 0) {
            stack.push_back({n.left, dpt + 1});
            stack.push_back({n.right, dpt + 1});
        }
    }
    return best;
}

int RandomForest::effective_max_features() const noexcept {
    if (params_.max_features > 0) return params_.max_features;
    return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(width_)))));
}

void RandomForest::fit(const Matrix& x, std::span<const int> y, Exec exec) {
    validate_training_data(x, y);
    if (params_.n_trees < 1) throw ValidationError("n_trees must be at least 1");
    if (params_.min_samples_split < 2) throw ValidationError("min_samples_split must be at least 2");
    if (params_.max_features < 0) throw ValidationError("max_features must be non-negative");
    width_ = x.cols();
    const int mtry = effective_max_features();
    const std::size_t n = x.rows();
    trees_.assign(static_cast<std::size_t>(params_.n_trees), DecisionTree{});
    for_each_index(trees_.size(), exec, [&](std::size_t t) {
        const std::uint64_t stream = derive_seed(params_.seed, t);
        std::vector<std::size_t> samples(n);
        if (params_.bootstrap) {
            Rng boot(derive_seed(stream, 1));
            for (auto& s : samples) s = static_cast<std::size_t>(boot.below(n));
        } else {
            std::iota(samples.begin(), samples.end(), std::size_t{0});
        }
        trees_[t] = DecisionTree::grow(x, y, std::move(samples), mtry, params_.min_samples_split,
                                       derive_seed(stream, 2));
    });
}

int RandomForest::predict_one(std::span<const double> row) const {
    std::size_t votes[2] = {0, 0};
    for (const auto& t : trees_) ++votes[t.predict_one(row)];
    return votes[1] > votes[0] ? 1 : 0;
}

std::vector<int> RandomForest::predict(const Matrix& x, Exec exec) const {
    validate_width(x, width_);
    std::vector<int> out(x.rows());
    for_each_index(x.rows(), exec, [&](std::size_t i) { out[i] = predict_one(x.row(i)); });
    return out;
}

void RandomForest::set_state(std::size_t width, std::vector<DecisionTree> trees) {
    width_ = width;
    trees_ = std::move(trees);
}

}  // namespace botflow
