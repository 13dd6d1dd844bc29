#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cbr/dataset.hpp"
#include "cbr/report.hpp"

namespace cbr {

struct PipelineOptions {
    ModelConfig config;
    long iterations = 1000;
    std::uint64_t seed = 1;
    unsigned parallelism = 0;  // 0 -> hardware concurrency; never affects results
};

struct FamilyResult {
    std::string name;  // "simple" or "reflexive"
    SentenceType first = SentenceType::SR;
    SentenceType second = SentenceType::OR;
    FeatureMatrix features;
    std::vector<int> assignments;
    std::vector<std::pair<std::string, Discrimination>> sections;  // rendered blocks
};

struct PipelineResult {
    std::vector<SentenceType> types;
    AccuracySurface surface;
    std::vector<FitResult> fits;
    NonDefaultTable non_default;
    std::vector<FamilyResult> families;
    std::string report_text;
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const usage_error& e) {
        throw usage_error(std::string(name) + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

/// Sentence types every participant covers, in canonical order.
inline std::vector<SentenceType> covered_types(const Dataset& ds) {
    std::vector<SentenceType> types;
    for (SentenceType t : kAllSentenceTypes) {
        bool all = !ds.participants.empty();
        for (const auto& p : ds.participants) all = all && p.covers(t);
        if (all) types.push_back(t);
    }
    if (types.empty())
        throw usage_error("dataset has no sentence type covered by every participant");
    return types;
}

/// Pools rows per type and reports per-type confusions under one global
/// cluster->group mapping; in concatenation mode there is one overall block.
inline FamilyResult analyse_family(const std::string& name, SentenceType first,
                                   SentenceType second, const std::vector<FitResult>& fits,
                                   const ModelConfig& config) {
    FamilyResult fam;
    fam.name = name;
    fam.first = first;
    fam.second = second;

    if (config.pooled_features) {
        fam.features = build_features_pooled(fits, {first, second}, config.standardize);
    } else {
        fam.features = build_features(fits, first, second, config.standardize);
    }
    const Dendrogram tree = hierarchical_cluster(fam.features, config.linkage);
    fam.assignments = cut_tree(tree, 2);

    std::vector<std::string> labels;
    for (const auto& r : fam.features.rows) labels.push_back(r.group);

    if (!config.pooled_features) {
        fam.sections.emplace_back("overall", evaluate_discrimination(fam.assignments, labels));
        return fam;
    }

    // Fix one mapping on all rows, then split the counts per sentence type.
    const ClusterGroupMapping mapping = optimal_mapping(fam.assignments, labels);
    for (SentenceType t : {first, second}) {
        std::vector<int> sub_assign;
        std::vector<std::string> sub_labels;
        for (size_t i = 0; i < fam.features.rows.size(); ++i) {
            if (fam.features.rows[i].tag != to_string(t)) continue;
            sub_assign.push_back(fam.assignments[i]);
            sub_labels.push_back(labels[i]);
        }
        fam.sections.emplace_back(to_string(t), tally_discrimination(sub_assign, sub_labels, mapping));
    }
    return fam;
}

}  // namespace detail

/// The full analysis: accuracy surface over the grid, per-participant fits,
/// non-default counts, and per-family clustering. Writes the report bundle
/// into out_dir; re-running with identical inputs reproduces identical bytes.
inline PipelineResult run_pipeline(const Dataset& dataset, const PipelineOptions& options,
                                   const std::filesystem::path& out_dir,
                                   const AccuracySurface* reuse_surface = nullptr) {
    namespace fs = std::filesystem;
    const ModelConfig& config = options.config;

    PipelineResult result;
    result.types = detail::stage("dataset", [&] { return detail::covered_types(dataset); });

    result.surface = detail::stage("surface", [&] {
        if (reuse_surface) {
            for (SentenceType t : result.types)
                if (!reuse_surface->has_type(t))
                    throw usage_error("provided surface lacks sentence type " + to_string(t));
            return *reuse_surface;
        }
        return run_surface(config.schedules(), config.grid, result.types, options.iterations,
                           options.seed, config.constants, options.parallelism);
    });

    result.fits = detail::stage("fit", [&] {
        return fit_dataset(dataset, result.surface, result.types, config.defaults, config.flag_eps);
    });
    result.non_default = detail::stage("tabulate", [&] { return tabulate_non_default(result.fits); });

    detail::stage("cluster", [&] {
        auto has = [&](SentenceType t) {
            return std::find(result.types.begin(), result.types.end(), t) != result.types.end();
        };
        if (has(SentenceType::SR) && has(SentenceType::OR))
            result.families.push_back(detail::analyse_family("simple", SentenceType::SR,
                                                             SentenceType::OR, result.fits, config));
        if (has(SentenceType::SRRefl) && has(SentenceType::ORRefl))
            result.families.push_back(detail::analyse_family(
                "reflexive", SentenceType::SRRefl, SentenceType::ORRefl, result.fits, config));
        return 0;
    });

    // ---- render ----
    std::ostringstream rpt;
    rpt << "cue-based retrieval comprehension pipeline\n";
    rpt << "==========================================\n";
    rpt << "dataset: " << dataset.provenance << " (" << dataset.participants.size()
        << " participants)\n";
    rpt << "seed: " << options.seed << "\n";
    rpt << "iterations per cell: " << result.surface.n_iterations << "\n";
    rpt << "constants: F=" << format_param(config.constants.latency_factor)
        << " tau=" << format_param(config.constants.threshold)
        << " d=" << format_param(config.constants.decay)
        << " S_max=" << format_param(config.constants.max_strength)
        << " MP=" << format_param(config.constants.mismatch_penalty) << "\n";
    rpt << "defaults: GA=" << format_param(config.defaults.ga)
        << " DAT=" << format_param(config.defaults.dat)
        << " ANS=" << format_param(config.defaults.ans) << "\n";
    auto axis_line = [](const AxisSpec& a) {
        return "[" + format_param(a.lower) + ", " + format_param(a.upper) + "] step " +
               format_param(a.step);
    };
    rpt << "grid: GA " << axis_line(config.grid.ga) << " | DAT " << axis_line(config.grid.dat)
        << " | ANS " << axis_line(config.grid.ans) << "\n";
    rpt << "linkage: " << to_string(config.linkage)
        << ", features: " << (config.pooled_features ? "pooled" : "concatenated")
        << (config.standardize ? ", standardized" : "") << "\n";

    rpt << "\n[1] accuracy surface\n";
    rpt << "cells: " << result.surface.cells.size() << " (" << result.surface.grid.size()
        << " points x " << result.surface.types.size() << " types)\n";
    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"sentence type", "mean accuracy", "min", "max", "at defaults"});
        for (SentenceType t : result.types) {
            double sum = 0.0, mn = 1.0, mx = 0.0;
            long n = 0;
            for (const auto& c : result.surface.cells) {
                if (c.type != t) continue;
                sum += c.accuracy;
                mn = std::min(mn, c.accuracy);
                mx = std::max(mx, c.accuracy);
                ++n;
            }
            const SurfaceCell* def = result.surface.find_cell(config.defaults, t);
            rows.push_back({to_string(t), format_fixed(sum / n, 4), format_fixed(mn, 4),
                            format_fixed(mx, 4), def ? format_fixed(def->accuracy, 4) : "-"});
        }
        rpt << render_aligned(rows);
    }

    rpt << "\n[2] participant fits\n";
    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"sentence type", "group", "n", "mean residual", "mean tie size"});
        for (const auto& [key, counts] : result.non_default) {
            double res = 0.0, ties = 0.0;
            int n = 0;
            for (const auto& f : result.fits) {
                if (f.type != key.first || f.group != key.second) continue;
                res += f.residual;
                ties += static_cast<double>(f.tie_set.size());
                ++n;
            }
            rows.push_back({to_string(key.first), key.second, std::to_string(n),
                            format_fixed(res / n, 4), format_fixed(ties / n, 1)});
        }
        rpt << render_aligned(rows);
    }

    rpt << "\n[3] non-default parameter counts\n";
    rpt << render_non_default_table(result.non_default);

    rpt << "\n[4] clustering discrimination\n";
    if (result.families.empty()) {
        rpt << "(needs a complete SR/OR or SR-REFL/OR-REFL family)\n";
    }
    for (const auto& fam : result.families) {
        rpt << fam.name << " relatives:\n";
        rpt << render_discrimination_table(fam.sections);
    }
    result.report_text = rpt.str();

    // ---- write the bundle ----
    detail::stage("write", [&] {
        fs::create_directories(out_dir);
        save_surface(result.surface, out_dir / "surface.csv");
        atomic_write_file(out_dir / "fits.csv", fits_to_csv(result.fits));
        atomic_write_file(out_dir / "nondefault.csv", non_default_to_csv(result.non_default));
        for (const auto& fam : result.families) {
            std::ostringstream cl;
            const bool pooled = config.pooled_features;
            cl << (pooled ? "participant,group,sentence_type,cluster" : "participant,group,cluster")
               << "\n";
            for (size_t i = 0; i < fam.features.rows.size(); ++i) {
                const auto& r = fam.features.rows[i];
                cl << r.id << "," << r.group;
                if (pooled) cl << "," << r.tag;
                cl << "," << fam.assignments[i] << "\n";
            }
            atomic_write_file(out_dir / ("clusters_" + fam.name + ".csv"), cl.str());
            atomic_write_file(out_dir / ("confusion_" + fam.name + ".csv"),
                              discrimination_to_csv(fam.name, fam.sections));
        }
        nlohmann::json meta{{"seed", options.seed},
                            {"iterations", options.iterations},
                            {"config", config_to_json(config)},
                            {"dataset", dataset.provenance},
                            {"participants", dataset.participants.size()}};
        atomic_write_file(out_dir / "run_meta.json", meta.dump(2) + "\n");
        atomic_write_file(out_dir / "report.txt", result.report_text);
        return 0;
    });

    return result;
}

}  // namespace cbr
