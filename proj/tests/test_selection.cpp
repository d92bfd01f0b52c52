#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "botflow/error.hpp"
#include "botflow/rng.hpp"
#include "botflow/selection.hpp"
#include "published_lists.hpp"
#include "support.hpp"

using namespace botflow;
using namespace testing_support;

namespace {

RankedFeatureList list_of(const std::vector<std::string>& names, std::string dataset = "d") {
    RankedFeatureList list;
    list.dataset = std::move(dataset);
    double score = static_cast<double>(names.size());
    for (const auto& n : names) list.features.push_back({n, score--});
    return list;
}

// Column A carries the label, the rest is noise.
FeatureTable informative_table(std::uint64_t seed, std::size_t n, const std::vector<std::string>& noise) {
    Rng rng(seed);
    FeatureTable t;
    t.columns = {"A"};
    t.columns.insert(t.columns.end(), noise.begin(), noise.end());
    t.labels.emplace();
    std::vector<double> row(t.columns.size());
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        row[0] = (y ? 2.0 : -2.0) + rng.normal();
        for (std::size_t c = 1; c < row.size(); ++c) row[c] = rng.normal(5.0, 3.0);
        t.rows.push_row(row);
        t.labels->push_back(y);
    }
    return t;
}

}  // namespace

TEST(Standardize, ZScoresAndConstantColumns) {
    FeatureTable t;
    t.columns = {"x", "c"};
    for (double v : {1.0, 2.0, 3.0}) t.rows.push_row(std::vector<double>{v, 7.0});
    t.labels = std::vector<int>{0, 1, 0};
    const auto [z, params] = standardize(t);
    EXPECT_DOUBLE_EQ(z.rows(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(z.rows(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(z.rows(2, 0), 1.0);
    for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(z.rows(r, 1), 0.0);
    EXPECT_TRUE(params.constant[1]);
    EXPECT_FALSE(params.constant[0]);
    EXPECT_EQ(z.labels, t.labels);
}

TEST(RankFeatures, InformativeColumnRanksFirst) {
    const auto t = informative_table(3, 400, {"B", "C"});
    const auto top = rank_features_lr(t, 1, {}, "demo");
    EXPECT_EQ(top.dataset, "demo");
    EXPECT_EQ(top.names(), std::vector<std::string>{"A"});
}

TEST(RankFeatures, FullRankingIsPermutationWithSortedScores) {
    const auto t = informative_table(4, 300, {"B", "C", "D", "E"});
    const auto all = rank_features_lr(t, 5);
    auto names = all.names();
    std::sort(names.begin(), names.end());
    EXPECT_EQ(names, (std::vector<std::string>{"A", "B", "C", "D", "E"}));
    for (std::size_t i = 1; i < all.features.size(); ++i) {
        EXPECT_GE(all.features[i - 1].score, all.features[i].score);
    }
}

TEST(RankFeatures, DuplicatedColumnsGetEqualWeight) {
    auto t = informative_table(5, 400, {"B"});
    t.columns.push_back("A2");
    Matrix widened(0, 0);
    for (std::size_t r = 0; r < t.size(); ++r) {
        std::vector<double> row(t.rows.row(r).begin(), t.rows.row(r).end());
        row.push_back(row[0]);
        widened.push_row(row);
    }
    t.rows = widened;
    const auto all = rank_features_lr(t, 3);
    double a = 0, a2 = 0;
    for (const auto& f : all.features) {
        if (f.name == "A") a = f.score;
        if (f.name == "A2") a2 = f.score;
    }
    EXPECT_GT(a, 0);
    EXPECT_LT(std::abs(a - a2), 1e-3);
}

TEST(RankFeatures, InvariantUnderRowPermutationAndAffineRescale) {
    const auto t = informative_table(6, 300, {"B", "C", "D"});
    const auto base = rank_features_lr(t, 4).names();

    std::vector<std::size_t> order(t.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(9);
    rng.shuffle(order);
    EXPECT_EQ(rank_features_lr(t.take(order), 4).names(), base);

    auto scaled = t;
    for (std::size_t r = 0; r < scaled.size(); ++r) {
        for (std::size_t c = 0; c < scaled.width(); ++c) {
            scaled.rows(r, c) = scaled.rows(r, c) * (c + 2.0) + 1000.0 * c;
        }
    }
    EXPECT_EQ(rank_features_lr(scaled, 4).names(), base);
}

TEST(RankFeatures, ConstantColumnsNeverRanked) {
    auto t = informative_table(7, 200, {"B"});
    t.columns.push_back("K");
    Matrix widened;
    for (std::size_t r = 0; r < t.size(); ++r) {
        std::vector<double> row(t.rows.row(r).begin(), t.rows.row(r).end());
        row.push_back(4.0);
        widened.push_row(row);
    }
    t.rows = widened;
    const auto names = rank_features_lr(t, 2).names();
    EXPECT_EQ(std::count(names.begin(), names.end(), "K"), 0);
    EXPECT_THROW(rank_features_lr(t, 3), ValidationError);
}

TEST(RankFeatures, InvalidInputsRejected) {
    auto t = informative_table(8, 50, {"B"});
    auto unlabeled = t;
    unlabeled.labels.reset();
    EXPECT_THROW(rank_features_lr(unlabeled, 1), ValidationError);
    auto single = t;
    std::fill(single.labels->begin(), single.labels->end(), 1);
    EXPECT_THROW(rank_features_lr(single, 1), ValidationError);
}

TEST(UniversalSet, PublishedListsGiveExpectedSet) {
    const std::vector<RankedFeatureList> lists = {list_of(kIot23Top10, "iot"), list_of(kCtu13Top10, "ctu"),
                                                  list_of(kCicids17Top10, "cic")};
    const auto set = derive_universal_set(lists, 2);
    EXPECT_EQ(set.features, kExpectedUniversal);
    EXPECT_EQ(set.threshold, 2);
}

TEST(UniversalSet, InvariantUnderListOrder) {
    std::vector<RankedFeatureList> lists = {list_of(kIot23Top10), list_of(kCtu13Top10), list_of(kCicids17Top10)};
    std::sort(lists.begin(), lists.end(), [](const auto& a, const auto& b) { return a.features[0].name < b.features[0].name; });
    do {
        EXPECT_EQ(derive_universal_set(lists, 2).features, kExpectedUniversal);
    } while (std::next_permutation(lists.begin(), lists.end(), [](const auto& a, const auto& b) {
        return a.features[0].name < b.features[0].name;
    }));
}

TEST(UniversalSet, InvariantUnderAliasRespelling) {
    auto cic = kCicids17Top10;
    for (auto& n : cic) {
        if (n == "Packet Length Mean") n = "Pkt Len Mean";
        if (n == "Min Packet Length") n = "Pkt Len Min";
        if (n == "Down/Up Ratio") n = "down/up   ratio";
    }
    const std::vector<RankedFeatureList> lists = {list_of(kIot23Top10), list_of(kCtu13Top10), list_of(cic)};
    EXPECT_EQ(derive_universal_set(lists, 2).features, kExpectedUniversal);
}

TEST(UniversalSet, IdenticalAndDisjointLists) {
    const auto same = list_of(kCicids17Top10);
    const std::vector<RankedFeatureList> three = {same, same, same};
    const auto set = derive_universal_set(three, 2);
    EXPECT_EQ(set.features.size(), 10u);
    for (const auto& [name, count] : set.features) EXPECT_EQ(count, 3);

    const std::vector<RankedFeatureList> disjoint = {list_of({"Flow Duration"}), list_of({"Fwd IAT Min"}),
                                                     list_of({"Idle Max"})};
    EXPECT_TRUE(derive_universal_set(disjoint, 2).features.empty());
    EXPECT_EQ(derive_universal_set(disjoint, 1).features.size(), 3u);
}

TEST(UniversalSet, ThresholdMonotoneAndValidated) {
    const std::vector<RankedFeatureList> lists = {list_of(kIot23Top10), list_of(kCtu13Top10), list_of(kCicids17Top10)};
    std::size_t previous = SIZE_MAX;
    for (int th = 1; th <= 4; ++th) {
        const auto size = derive_universal_set(lists, th).features.size();
        EXPECT_LE(size, previous);
        previous = size;
    }
    EXPECT_EQ(previous, 0u);
    EXPECT_THROW(derive_universal_set(lists, 0), ValidationError);
    EXPECT_THROW(derive_universal_set(std::span<const RankedFeatureList>{}, 2), ValidationError);
}

TEST(SelectionCsv, RankedAndUniversalRoundTrip) {
    TempDir dir("selection");
    RankedFeatureList ranked = list_of(kCtu13Top10, "ctu");
    ranked.features[2].score = 0.123456789012345;
    write_ranked_csv(ranked, dir / "ranked.csv");
    const auto back = read_ranked_csv(dir / "ranked.csv");
    EXPECT_EQ(back.dataset, "ctu");
    ASSERT_EQ(back.features.size(), ranked.features.size());
    for (std::size_t i = 0; i < back.features.size(); ++i) {
        EXPECT_EQ(back.features[i].name, ranked.features[i].name);
        EXPECT_NEAR(back.features[i].score, ranked.features[i].score, 5e-7);
    }

    UniversalFeatureSet set;
    set.features = kExpectedUniversal;
    set.threshold = 3;
    write_universal_csv(set, dir / "universal.csv");
    const auto uback = read_universal_csv(dir / "universal.csv");
    EXPECT_EQ(uback.features, set.features);
    EXPECT_EQ(uback.threshold, 3);
}
