#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "cbr/cluster.hpp"
#include "cbr/report.hpp"
#include "test_support.hpp"

using namespace cbr;
using Catch::Approx;
using cbr_test::matrix_from_points;
using cbr_test::naive_hierarchical;

namespace {

FitResult fit_at(const std::string& id, const std::string& group, SentenceType t,
                 ParameterPoint p) {
    FitResult f;
    f.participant = id;
    f.group = group;
    f.type = t;
    f.tie_set = {p};
    f.fitted = p;
    return f;
}

std::vector<std::string> tokens_of(const std::string& text) {
    std::vector<std::string> toks;
    std::istringstream in(text);
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

}  // namespace

TEST_CASE("feature matrices concatenate SR and OR fits") {
    std::vector<FitResult> fits{
        fit_at("a", "control", SentenceType::SR, {1.0, 0.05, 0.15}),
        fit_at("a", "control", SentenceType::OR, {0.9, 0.06, 0.20}),
        fit_at("b", "IWA", SentenceType::SR, {0.4, 0.08, 0.40}),
        fit_at("b", "IWA", SentenceType::OR, {0.3, 0.10, 0.45}),
    };

    SECTION("raw concatenation") {
        const auto m = build_features(fits, SentenceType::SR, SentenceType::OR, false);
        REQUIRE(m.rows.size() == 2);
        CHECK(m.rows[0].values == std::vector<double>{1.0, 0.05, 0.15, 0.9, 0.06, 0.20});
        CHECK(m.rows[1].values == std::vector<double>{0.4, 0.08, 0.40, 0.3, 0.10, 0.45});
        CHECK(m.column_names.size() == 6);
    }
    SECTION("standardization normalizes nonconstant columns") {
        std::vector<FitResult> more = fits;
        more.push_back(fit_at("c", "control", SentenceType::SR, {0.7, 0.06, 0.2}));
        more.push_back(fit_at("c", "control", SentenceType::OR, {0.6, 0.07, 0.3}));
        const auto m = build_features(more, SentenceType::SR, SentenceType::OR, true);
        for (size_t c = 0; c < m.column_names.size(); ++c) {
            double mean = 0.0, ss = 0.0;
            for (const auto& r : m.rows) mean += r.values[c];
            mean /= static_cast<double>(m.rows.size());
            for (const auto& r : m.rows) ss += (r.values[c] - mean) * (r.values[c] - mean);
            const double sd = std::sqrt(ss / (static_cast<double>(m.rows.size()) - 1.0));
            CHECK(std::abs(mean) < 1e-9);
            CHECK(sd == Approx(1.0).margin(1e-9));
        }
    }
    SECTION("constant columns standardize to zeros") {
        std::vector<FitResult> same{
            fit_at("a", "control", SentenceType::SR, {1.0, 0.05, 0.15}),
            fit_at("a", "control", SentenceType::OR, {1.0, 0.05, 0.15}),
            fit_at("b", "IWA", SentenceType::SR, {1.0, 0.05, 0.15}),
            fit_at("b", "IWA", SentenceType::OR, {1.0, 0.05, 0.15}),
        };
        const auto m = build_features(same, SentenceType::SR, SentenceType::OR, true);
        for (const auto& r : m.rows)
            for (double v : r.values) CHECK(v == 0.0);
    }
    SECTION("missing fits are reported in one aggregate error") {
        std::vector<FitResult> partial{
            fit_at("a", "control", SentenceType::SR, {1.0, 0.05, 0.15}),
            fit_at("b", "IWA", SentenceType::SR, {0.4, 0.08, 0.40}),
            fit_at("c", "IWA", SentenceType::SR, {0.4, 0.08, 0.40}),
        };
        CHECK_THROWS_WITH(build_features(partial, SentenceType::SR, SentenceType::OR, false),
                          Catch::Matchers::ContainsSubstring("a") &&
                              Catch::Matchers::ContainsSubstring("b") &&
                              Catch::Matchers::ContainsSubstring("c"));
    }
    SECTION("pooled mode emits one tagged row per participant and type") {
        const auto m = build_features_pooled(fits, {SentenceType::SR, SentenceType::OR}, false);
        REQUIRE(m.rows.size() == 4);
        CHECK(m.rows[0].tag == "SR");
        CHECK(m.rows[2].tag == "OR");
        CHECK(m.rows[0].values == std::vector<double>{1.0, 0.05, 0.15});
    }
}

TEST_CASE("hierarchical clustering merges nearest pairs first") {
    SECTION("two tight 1-D pairs") {
        const auto m = matrix_from_points({{0.0}, {0.1}, {10.0}, {10.1}});
        const auto tree = hierarchical_cluster(m, Linkage::Complete);
        REQUIRE(tree.merges.size() == 3);
        // the first two merges join {0, 0.1} and {10, 10.1}, in either order
        std::set<std::pair<int, int>> first_two{{tree.merges[0].left, tree.merges[0].right},
                                                {tree.merges[1].left, tree.merges[1].right}};
        CHECK(first_two == std::set<std::pair<int, int>>{{0, 1}, {2, 3}});
        CHECK(tree.merges[0].height == Approx(0.1).margin(1e-9));
        CHECK(tree.merges[1].height == Approx(0.1).margin(1e-9));
        const auto two = cut_tree(tree, 2);
        CHECK(two == std::vector<int>{0, 0, 1, 1});
    }
    SECTION("duplicate points merge at height zero before any distinct pair") {
        const auto m = matrix_from_points({{3.0, 1.0}, {0.0, 0.0}, {3.0, 1.0}});
        const auto tree = hierarchical_cluster(m, Linkage::Complete);
        CHECK(tree.merges[0].left == 0);
        CHECK(tree.merges[0].right == 2);
        CHECK(tree.merges[0].height == 0.0);
    }
    SECTION("fewer than two rows is a usage error") {
        CHECK_THROWS_AS(hierarchical_cluster(matrix_from_points({{1.0}}), Linkage::Single),
                        usage_error);
    }
}

TEST_CASE("merge histories match the naive oracle for n <= 7") {
    RandomStream gen(5150);
    const Linkage linkages[] = {Linkage::Single, Linkage::Average, Linkage::Complete};
    for (int round = 0; round < 300; ++round) {
        const int n = 2 + static_cast<int>(gen.uniform_index(6));
        const int dim = 1 + static_cast<int>(gen.uniform_index(3));
        std::vector<std::vector<double>> points;
        for (int i = 0; i < n; ++i) {
            if (i > 0 && gen.uniform01() < 0.1) {
                points.push_back(points[gen.uniform_index(static_cast<std::uint64_t>(i))]);
                continue;
            }
            std::vector<double> p;
            for (int d = 0; d < dim; ++d) p.push_back(gen.uniform(0.0, 10.0));
            points.push_back(std::move(p));
        }
        const Linkage linkage = linkages[round % 3];
        const auto fast = hierarchical_cluster(matrix_from_points(points), linkage);
        const auto naive = naive_hierarchical(points, linkage);
        REQUIRE(fast.merges.size() == naive.merges.size());
        for (size_t i = 0; i < fast.merges.size(); ++i) {
            CHECK(fast.merges[i].left == naive.merges[i].left);
            CHECK(fast.merges[i].right == naive.merges[i].right);
            CHECK(fast.merges[i].height == Approx(naive.merges[i].height).margin(1e-9));
        }
    }
}

TEST_CASE("cut_tree undoes the last merges") {
    RandomStream gen(808);
    std::vector<std::vector<double>> points;
    for (int i = 0; i < 12; ++i) points.push_back({gen.uniform(0.0, 5.0), gen.uniform(0.0, 5.0)});
    const auto tree = hierarchical_cluster(matrix_from_points(points), Linkage::Average);

    SECTION("k = leaf count gives singletons, k = 1 one cluster") {
        const auto singles = cut_tree(tree, 12);
        std::set<int> labels(singles.begin(), singles.end());
        CHECK(labels.size() == 12);
        const auto one = cut_tree(tree, 1);
        for (int a : one) CHECK(a == one[0]);
    }
    SECTION("cutting at k then k+1 splits exactly one cluster") {
        for (int k = 1; k < 12; ++k) {
            const auto coarse = cut_tree(tree, k);
            const auto fine = cut_tree(tree, k + 1);
            // count distinct fine labels within each coarse cluster
            std::map<int, std::set<int>> split;
            for (size_t i = 0; i < coarse.size(); ++i) split[coarse[i]].insert(fine[i]);
            int split_clusters = 0;
            for (const auto& [c, fines] : split) {
                CHECK(fines.size() <= 2);
                if (fines.size() == 2) ++split_clusters;
            }
            CHECK(split_clusters == 1);
        }
    }
    SECTION("out-of-range k is a usage error") {
        CHECK_THROWS_AS(cut_tree(tree, 0), usage_error);
        CHECK_THROWS_AS(cut_tree(tree, 13), usage_error);
    }
}

TEST_CASE("row permutations leave cluster memberships unchanged") {
    RandomStream gen(909);
    std::vector<std::vector<double>> points;
    for (int i = 0; i < 9; ++i) points.push_back({gen.uniform(0.0, 3.0), gen.uniform(0.0, 3.0)});
    const auto base_cut = cut_tree(hierarchical_cluster(matrix_from_points(points), Linkage::Complete), 3);

    std::vector<size_t> perm(points.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[gen.uniform_index(i + 1)]);

    std::vector<std::vector<double>> shuffled(points.size());
    for (size_t i = 0; i < perm.size(); ++i) shuffled[i] = points[perm[i]];
    const auto shuffled_cut =
        cut_tree(hierarchical_cluster(matrix_from_points(shuffled), Linkage::Complete), 3);

    // memberships as sets of original indices must coincide
    auto groups_of = [](const std::vector<int>& cut, auto index_map) {
        std::map<int, std::set<size_t>> g;
        for (size_t i = 0; i < cut.size(); ++i) g[cut[i]].insert(index_map(i));
        std::set<std::set<size_t>> sets;
        for (auto& [k, s] : g) sets.insert(s);
        return sets;
    };
    const auto a = groups_of(base_cut, [](size_t i) { return i; });
    const auto b = groups_of(shuffled_cut, [&](size_t i) { return perm[i]; });
    CHECK(a == b);
}

TEST_CASE("discrimination evaluation maps clusters to groups optimally") {
    SECTION("perfect separation scores 100% for both groups") {
        const std::vector<int> assign{0, 0, 0, 1, 1, 1};
        const std::vector<std::string> labels{"control", "control", "control", "IWA", "IWA", "IWA"};
        const auto d = evaluate_discrimination(assign, labels);
        CHECK(d.group_accuracy[0] == 1.0);
        CHECK(d.group_accuracy[1] == 1.0);
        CHECK(d.total_correct == 6);
    }
    SECTION("mapping optimality: chosen bijection beats the swap") {
        RandomStream gen(6);
        for (int round = 0; round < 200; ++round) {
            std::vector<int> assign;
            std::vector<std::string> labels;
            for (int i = 0; i < 20; ++i) {
                assign.push_back(static_cast<int>(gen.uniform_index(2)));
                labels.push_back(gen.uniform01() < 0.5 ? "control" : "IWA");
            }
            std::set<int> cl(assign.begin(), assign.end());
            std::set<std::string> gl(labels.begin(), labels.end());
            if (cl.size() != 2 || gl.size() != 2) continue;
            const auto d = evaluate_discrimination(assign, labels);
            CHECK(d.total_correct >= d.total - d.total_correct);
        }
    }
    SECTION("random balanced assignments hover near chance") {
        RandomStream gen(7);
        double sum = 0.0;
        const int rounds = 400;
        for (int round = 0; round < rounds; ++round) {
            std::vector<int> assign;
            std::vector<std::string> labels;
            for (int i = 0; i < 40; ++i) {
                assign.push_back(i < 20 ? 0 : 1);
                labels.push_back(gen.uniform01() < 0.5 ? "control" : "IWA");
            }
            sum += discrimination_accuracy(assign, labels);
        }
        // best-of-two-bijections on random labels sits slightly above 0.5
        CHECK(sum / rounds == Approx(0.56).margin(0.03));
    }
    SECTION("cardinality errors") {
        CHECK_THROWS_AS(evaluate_discrimination({0, 0}, {"control", "IWA"}), usage_error);
        CHECK_THROWS_AS(evaluate_discrimination({0, 1}, {"control", "control"}), usage_error);
    }
}

TEST_CASE("discrimination table renders the published layout") {
    // Synthetic numbers arranged like the published two-type table.
    Discrimination sr;
    sr.groups = {"control", "IWA"};
    sr.confusion = {{{34, 21}, {12, 35}}};
    sr.group_accuracy = {34.0 / 46.0, 35.0 / 56.0};
    sr.total_correct = 69;
    sr.total = 102;
    Discrimination orr;
    orr.groups = {"control", "IWA"};
    orr.confusion = {{{42, 24}, {4, 32}}};
    orr.group_accuracy = {42.0 / 46.0, 32.0 / 56.0};
    orr.total_correct = 74;
    orr.total = 102;

    const std::string text = render_discrimination_table({{"SR", sr}, {"OR", orr}});
    const auto toks = tokens_of(text);
    const std::vector<std::string> expected{
        "predicted", "group", "SR", "control", "SR", "IWA", "OR", "control", "OR", "IWA",
        "control",   "34",    "21", "42",      "24",
        "IWA",       "12",    "35", "4",       "32",
        "accuracy",  "74%",   "63%", "91%",    "57%"};
    CHECK(toks == expected);
}
