#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cbr/fit.hpp"
#include "cbr/rng.hpp"

namespace cbr {

struct FeatureRow {
    std::string id;
    std::string group;
    std::string tag;  // sentence type in pooled mode, empty otherwise
    std::vector<double> values;
};

struct FeatureMatrix {
    std::vector<std::string> column_names;
    std::vector<FeatureRow> rows;
};

/// Standardizes each column to mean 0 and (sample) standard deviation 1.
/// Zero-variance columns pass through as all zeros.
inline void standardize_columns(FeatureMatrix& m) {
    if (m.rows.empty()) return;
    const size_t dim = m.rows.front().values.size();
    const auto n = static_cast<double>(m.rows.size());
    for (size_t c = 0; c < dim; ++c) {
        double mean = 0.0;
        for (const auto& r : m.rows) mean += r.values[c];
        mean /= n;
        double ss = 0.0;
        for (const auto& r : m.rows) ss += (r.values[c] - mean) * (r.values[c] - mean);
        const double sd = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        for (auto& r : m.rows) r.values[c] = sd > 0.0 ? (r.values[c] - mean) / sd : 0.0;
    }
}

namespace detail {

inline std::map<std::string, std::map<SentenceType, const FitResult*>> fits_by_participant(
    const std::vector<FitResult>& fits, std::vector<std::string>& order,
    std::map<std::string, std::string>& groups) {
    std::map<std::string, std::map<SentenceType, const FitResult*>> by_id;
    for (const auto& f : fits) {
        if (!by_id.count(f.participant)) order.push_back(f.participant);
        by_id[f.participant][f.type] = &f;
        groups[f.participant] = f.group;
    }
    return by_id;
}

}  // namespace detail

/// One row per participant: the fitted (GA, DAT, ANS) for the first type
/// concatenated with the fitted vector for the second.
inline FeatureMatrix build_features(const std::vector<FitResult>& fits, SentenceType first,
                                    SentenceType second, bool standardize) {
    std::vector<std::string> order;
    std::map<std::string, std::string> groups;
    const auto by_id = detail::fits_by_participant(fits, order, groups);

    std::vector<std::string> missing;
    for (const auto& id : order) {
        const auto& m = by_id.at(id);
        if (!m.count(first) || !m.count(second)) missing.push_back(id);
    }
    if (!missing.empty()) {
        std::string msg = "participants missing a " + to_string(first) + " or " +
                          to_string(second) + " fit:";
        for (const auto& id : missing) msg += " " + id;
        throw usage_error(msg);
    }

    FeatureMatrix matrix;
    for (SentenceType t : {first, second})
        for (const char* p : {"ga", "dat", "ans"})
            matrix.column_names.push_back(to_string(t) + "_" + p);
    for (const auto& id : order) {
        const FitResult& a = *by_id.at(id).at(first);
        const FitResult& b = *by_id.at(id).at(second);
        matrix.rows.push_back(FeatureRow{
            id, groups.at(id), "",
            {a.fitted.ga, a.fitted.dat, a.fitted.ans, b.fitted.ga, b.fitted.dat, b.fitted.ans}});
    }
    if (standardize) standardize_columns(matrix);
    return matrix;
}

/// Pooling alternative: one row per participant x type, three columns. The
/// row's tag records the sentence type so reports can split results by type.
inline FeatureMatrix build_features_pooled(const std::vector<FitResult>& fits,
                                           const std::vector<SentenceType>& types,
                                           bool standardize) {
    std::vector<std::string> order;
    std::map<std::string, std::string> groups;
    const auto by_id = detail::fits_by_participant(fits, order, groups);

    std::vector<std::string> missing;
    for (const auto& id : order)
        for (SentenceType t : types)
            if (!by_id.at(id).count(t)) missing.push_back(id + "/" + to_string(t));
    if (!missing.empty()) {
        std::string msg = "participants missing fits:";
        for (const auto& id : missing) msg += " " + id;
        throw usage_error(msg);
    }

    FeatureMatrix matrix;
    matrix.column_names = {"ga", "dat", "ans"};
    for (SentenceType t : types) {
        for (const auto& id : order) {
            const FitResult& f = *by_id.at(id).at(t);
            matrix.rows.push_back(FeatureRow{id, groups.at(id), to_string(t),
                                             {f.fitted.ga, f.fitted.dat, f.fitted.ans}});
        }
    }
    if (standardize) standardize_columns(matrix);
    return matrix;
}

enum class Linkage { Single, Average, Complete };

inline Linkage linkage_from_string(std::string_view s) {
    if (s == "single") return Linkage::Single;
    if (s == "average") return Linkage::Average;
    if (s == "complete") return Linkage::Complete;
    throw usage_error("unknown linkage '" + std::string(s) +
                      "' (supported: single, average, complete)");
}

inline std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::Single: return "single";
        case Linkage::Average: return "average";
        case Linkage::Complete: return "complete";
    }
    throw std::logic_error("unreachable linkage");
}

/// One agglomeration step. Cluster ids follow the usual convention: leaves
/// are 0..n-1, the merge at step k creates cluster n+k.
struct Merge {
    int left = 0;
    int right = 0;
    double height = 0.0;
};

struct Dendrogram {
    int leaf_count = 0;
    std::vector<Merge> merges;

    void validate() const {
        if (static_cast<int>(merges.size()) != leaf_count - 1)
            throw std::logic_error("dendrogram must hold leaf_count - 1 merges");
        for (size_t i = 1; i < merges.size(); ++i)
            if (merges[i].height < merges[i - 1].height - 1e-12)
                throw std::logic_error("merge heights must be non-decreasing");
    }
};

inline double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double ss = 0.0;
    for (size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss);
}

/// Agglomerative clustering with Euclidean distances and Lance-Williams
/// cluster-distance updates. Ties break on the lowest cluster-id pair, so a
/// fixed input yields a fixed merge history.
inline Dendrogram hierarchical_cluster(const FeatureMatrix& features,
                                       Linkage linkage = Linkage::Complete) {
    const int n = static_cast<int>(features.rows.size());
    if (n < 2) throw usage_error("clustering needs at least 2 rows");
    for (const auto& r : features.rows)
        if (r.values.size() != features.rows.front().values.size())
            throw usage_error("feature rows differ in dimensionality");

    const int total = 2 * n - 1;
    std::vector<double> dist(static_cast<size_t>(total) * total, 0.0);
    auto d = [&](int a, int b) -> double& {
        return dist[static_cast<size_t>(std::min(a, b)) * total + std::max(a, b)];
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            d(i, j) = euclidean_distance(features.rows[i].values, features.rows[j].values);

    std::vector<int> active;
    std::vector<int> sizes(total, 1);
    for (int i = 0; i < n; ++i) active.push_back(i);

    Dendrogram tree;
    tree.leaf_count = n;
    for (int step = 0; step < n - 1; ++step) {
        size_t bi = 0, bj = 1;
        double best = d(active[0], active[1]);
        for (size_t i = 0; i < active.size(); ++i)
            for (size_t j = i + 1; j < active.size(); ++j)
                if (d(active[i], active[j]) < best) {
                    best = d(active[i], active[j]);
                    bi = i;
                    bj = j;
                }
        const int a = active[bi], b = active[bj];
        const int merged = n + step;
        tree.merges.push_back(Merge{a, b, best});
        sizes[merged] = sizes[a] + sizes[b];
        for (int k : active) {
            if (k == a || k == b) continue;
            double nd = 0.0;
            switch (linkage) {
                case Linkage::Single: nd = std::min(d(a, k), d(b, k)); break;
                case Linkage::Complete: nd = std::max(d(a, k), d(b, k)); break;
                case Linkage::Average:
                    nd = (sizes[a] * d(a, k) + sizes[b] * d(b, k)) / (sizes[a] + sizes[b]);
                    break;
            }
            d(merged, k) = nd;
        }
        active.erase(active.begin() + static_cast<long>(bj));
        active.erase(active.begin() + static_cast<long>(bi));
        active.push_back(merged);  // ids grow, so 'active' stays ascending
    }
    tree.validate();
    return tree;
}

/// Undoes the last k-1 merges: applies the first leaf_count-k merges and
/// labels the resulting components 0..k-1 in order of first leaf appearance.
inline std::vector<int> cut_tree(const Dendrogram& tree, int k) {
    const int n = tree.leaf_count;
    if (k < 1 || k > n)
        throw usage_error("cut at k=" + std::to_string(k) + " outside [1, " + std::to_string(n) +
                          "]");
    std::vector<int> root(2 * n - 1);
    for (size_t i = 0; i < root.size(); ++i) root[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) {
        while (root[x] != x) {
            root[x] = root[root[x]];
            x = root[x];
        }
        return x;
    };
    for (int step = 0; step < n - k; ++step) {
        const Merge& m = tree.merges[step];
        const int merged = n + step;
        root[find(m.left)] = merged;
        root[find(m.right)] = merged;
    }
    std::vector<int> assignment(n, -1);
    std::map<int, int> label_of_root;
    for (int leaf = 0; leaf < n; ++leaf) {
        const int r = find(leaf);
        auto it = label_of_root.find(r);
        if (it == label_of_root.end())
            it = label_of_root.emplace(r, static_cast<int>(label_of_root.size())).first;
        assignment[leaf] = it->second;
    }
    return assignment;
}

/// 2x2 confusion of cluster assignments against group labels, with the
/// cluster->group mapping chosen to maximize total correct.
struct Discrimination {
    std::array<std::string, 2> groups;               // column order of the confusion
    std::array<std::array<int, 2>, 2> confusion{};   // [predicted group][true group]
    std::array<double, 2> group_accuracy{};          // correct / group size, per true group
    int total_correct = 0;
    int total = 0;
};

/// A fixed cluster -> group assignment: cluster_ids[i] predicts groups[i]
/// when swapped is false, the other group when true.
struct ClusterGroupMapping {
    std::array<std::string, 2> groups;
    std::array<int, 2> cluster_ids;
    bool swapped = false;
};

/// The accuracy-maximizing bijection between the two clusters and the two
/// group labels. Group column order puts 'control' first when present.
inline ClusterGroupMapping optimal_mapping(const std::vector<int>& assignments,
                                           const std::vector<std::string>& labels) {
    if (assignments.size() != labels.size())
        throw usage_error("assignments and labels differ in length");
    std::set<int> clusters(assignments.begin(), assignments.end());
    std::set<std::string> group_set(labels.begin(), labels.end());
    if (clusters.size() != 2)
        throw usage_error("discrimination needs exactly 2 clusters, got " +
                          std::to_string(clusters.size()));
    if (group_set.size() != 2)
        throw usage_error("discrimination needs exactly 2 group labels, got " +
                          std::to_string(group_set.size()));

    ClusterGroupMapping map;
    std::vector<std::string> groups(group_set.begin(), group_set.end());
    if (groups[1] == kControlGroup) std::swap(groups[0], groups[1]);
    map.groups = {groups[0], groups[1]};
    const std::vector<int> ids(clusters.begin(), clusters.end());
    map.cluster_ids = {ids[0], ids[1]};

    int count[2][2] = {{0, 0}, {0, 0}};  // [cluster][group]
    for (size_t i = 0; i < assignments.size(); ++i) {
        const int c = assignments[i] == map.cluster_ids[0] ? 0 : 1;
        const int g = labels[i] == map.groups[0] ? 0 : 1;
        ++count[c][g];
    }
    map.swapped = count[0][1] + count[1][0] > count[0][0] + count[1][1];
    return map;
}

/// Confusion counts under a fixed mapping; tolerates subsets that contain
/// only one of the clusters (rows land in one predicted-group row).
inline Discrimination tally_discrimination(const std::vector<int>& assignments,
                                           const std::vector<std::string>& labels,
                                           const ClusterGroupMapping& map) {
    if (assignments.size() != labels.size())
        throw usage_error("assignments and labels differ in length");
    Discrimination disc;
    disc.groups = map.groups;
    for (size_t i = 0; i < assignments.size(); ++i) {
        const int c = assignments[i] == map.cluster_ids[0] ? 0 : 1;
        const int predicted = map.swapped ? 1 - c : c;
        const int g = labels[i] == map.groups[0] ? 0 : 1;
        ++disc.confusion[predicted][g];
    }
    disc.total = static_cast<int>(assignments.size());
    disc.total_correct = disc.confusion[0][0] + disc.confusion[1][1];
    for (int g = 0; g < 2; ++g) {
        const int size = disc.confusion[0][g] + disc.confusion[1][g];
        disc.group_accuracy[g] = size > 0 ? static_cast<double>(disc.confusion[g][g]) / size : 0.0;
    }
    return disc;
}

inline Discrimination evaluate_discrimination(const std::vector<int>& assignments,
                                              const std::vector<std::string>& labels) {
    return tally_discrimination(assignments, labels, optimal_mapping(assignments, labels));
}

inline double discrimination_accuracy(const std::vector<int>& assignments,
                                      const std::vector<std::string>& labels) {
    const Discrimination d = evaluate_discrimination(assignments, labels);
    return static_cast<double>(d.total_correct) / static_cast<double>(d.total);
}

/// Null distribution of discrimination accuracy under label permutation,
/// sorted ascending.
inline std::vector<double> permutation_null(const std::vector<int>& assignments,
                                            std::vector<std::string> labels, int n_permutations,
                                            std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<double> null;
    null.reserve(static_cast<size_t>(n_permutations));
    for (int p = 0; p < n_permutations; ++p) {
        for (size_t i = labels.size() - 1; i > 0; --i)
            std::swap(labels[i], labels[rng.uniform_index(i + 1)]);
        null.push_back(discrimination_accuracy(assignments, labels));
    }
    std::sort(null.begin(), null.end());
    return null;
}

inline double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw usage_error("percentile of empty sample");
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace cbr
