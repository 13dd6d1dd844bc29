// cbrsim: simulate cue-based retrieval comprehension accuracies over an
// impairment-parameter grid, fit participants, and cluster the fits.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cbr/cluster.hpp"
#include "cbr/config.hpp"
#include "cbr/dataset.hpp"
#include "cbr/fit.hpp"
#include "cbr/pipeline.hpp"
#include "cbr/report.hpp"
#include "cbr/surface.hpp"

namespace {

std::vector<cbr::SentenceType> parse_types(const std::vector<std::string>& names) {
    std::vector<cbr::SentenceType> types;
    if (names.empty()) {
        types.assign(std::begin(cbr::kAllSentenceTypes), std::end(cbr::kAllSentenceTypes));
    } else {
        for (const auto& n : names) {
            const auto t = cbr::sentence_type_from_string(n);
            if (std::find(types.begin(), types.end(), t) == types.end()) types.push_back(t);
        }
    }
    return types;
}

void write_synth_outputs(const cbr::SynthResult& synth, const std::filesystem::path& out,
                         std::uint64_t seed) {
    cbr::save_dataset(synth.dataset, out);
    std::filesystem::path meta = out;
    meta += ".meta.json";
    cbr::atomic_write_file(meta, cbr::synth_provenance_to_json(synth, seed));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cue-based retrieval comprehension simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::uint64_t seed = 1;
    long iterations = 1000;
    unsigned parallelism = 0;
    std::string config_path;
    app.add_option("--seed", seed, "master seed (default 1)");
    app.add_option("--iterations", iterations, "Monte Carlo trials per grid cell (default 1000)");
    app.add_option("--parallelism", parallelism,
                   "worker threads, 0 = hardware concurrency; never changes results");
    app.add_option("--config", config_path, "JSON configuration file");

    auto* grid_cmd = app.add_subcommand("grid", "simulate the accuracy surface over the grid");
    std::string grid_out = "surface.csv";
    std::vector<std::string> grid_types;
    grid_cmd->add_option("-o,--out", grid_out, "surface CSV path");
    grid_cmd->add_option("--types", grid_types, "sentence types (default: all four)");

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort from a surface");
    std::string synth_surface, synth_spec_path, synth_out = "participants.csv";
    synth_cmd->add_option("--surface", synth_surface, "surface CSV")->required();
    synth_cmd->add_option("--spec", synth_spec_path, "synthetic cohort spec (JSON)");
    synth_cmd->add_option("-o,--out", synth_out, "dataset CSV path");

    auto* fit_cmd = app.add_subcommand("fit", "fit every participant against a surface");
    std::string fit_surface, fit_data, fit_out = "fits.csv";
    fit_cmd->add_option("--surface", fit_surface, "surface CSV")->required();
    fit_cmd->add_option("--data", fit_data, "participant dataset CSV")->required();
    fit_cmd->add_option("-o,--out", fit_out, "fit results CSV path");

    auto* cluster_cmd = app.add_subcommand("cluster", "cluster fitted parameter vectors");
    std::string cluster_fits, cluster_family = "simple", cluster_out = ".";
    cluster_cmd->add_option("--fits", cluster_fits, "fit results CSV")->required();
    cluster_cmd->add_option("--family", cluster_family, "simple or reflexive");
    cluster_cmd->add_option("-o,--out-dir", cluster_out, "output directory");

    auto* report_cmd = app.add_subcommand("report", "fit + cluster + report from an existing surface");
    std::string report_surface, report_data, report_out = "out";
    report_cmd->add_option("--surface", report_surface, "surface CSV")->required();
    report_cmd->add_option("--data", report_data, "participant dataset CSV")->required();
    report_cmd->add_option("-o,--out-dir", report_out, "report bundle directory");

    auto* run_cmd = app.add_subcommand("run", "full pipeline: surface, fits, clustering, report");
    std::string run_data, run_out = "out", run_synth_spec;
    bool run_synth = false;
    run_cmd->add_option("--data", run_data, "participant dataset CSV");
    run_cmd->add_flag("--synth", run_synth, "use a synthetic cohort instead of --data");
    run_cmd->add_option("--synth-spec", run_synth_spec, "synthetic cohort spec (JSON)");
    run_cmd->add_option("-o,--out-dir", run_out, "report bundle directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        cbr::ModelConfig config =
            config_path.empty() ? cbr::ModelConfig{} : cbr::load_config(config_path);

        if (grid_cmd->parsed()) {
            const auto types = parse_types(grid_types);
            const auto surface = cbr::run_surface(config.schedules(), config.grid, types,
                                                  iterations, seed, config.constants, parallelism);
            cbr::save_surface(surface, grid_out);
            std::cout << "surface: " << surface.cells.size() << " cells ("
                      << surface.grid.size() << " points x " << surface.types.size()
                      << " types) -> " << grid_out << "\n";
        } else if (synth_cmd->parsed()) {
            const auto surface = cbr::load_surface(synth_surface);
            cbr::SynthSpec spec = synth_spec_path.empty() ? cbr::default_synth_spec(seed)
                                                          : cbr::load_synth_spec(synth_spec_path);
            const auto synth = cbr::generate_synthetic(spec, surface);
            write_synth_outputs(synth, synth_out, spec.seed);
            std::cout << "synthetic cohort: " << synth.dataset.participants.size()
                      << " participants -> " << synth_out << "\n";
        } else if (fit_cmd->parsed()) {
            const auto surface = cbr::load_surface(fit_surface);
            const auto dataset = cbr::load_dataset(fit_data);
            std::vector<cbr::SentenceType> types;
            for (cbr::SentenceType t : surface.types) {
                bool covered = true;
                for (const auto& p : dataset.participants) covered = covered && p.covers(t);
                if (covered) types.push_back(t);
            }
            if (types.empty())
                throw cbr::usage_error("no sentence type is covered by both surface and dataset");
            const auto fits =
                cbr::fit_dataset(dataset, surface, types, config.defaults, config.flag_eps);
            cbr::atomic_write_file(fit_out, cbr::fits_to_csv(fits));
            std::cout << "fits: " << fits.size() << " rows -> " << fit_out << "\n";
        } else if (cluster_cmd->parsed()) {
            const auto fits = cbr::load_fits(cluster_fits);
            cbr::SentenceType first, second;
            if (cluster_family == "simple") {
                first = cbr::SentenceType::SR;
                second = cbr::SentenceType::OR;
            } else if (cluster_family == "reflexive") {
                first = cbr::SentenceType::SRRefl;
                second = cbr::SentenceType::ORRefl;
            } else {
                throw cbr::usage_error("unknown family '" + cluster_family +
                                       "' (simple or reflexive)");
            }
            cbr::FeatureMatrix features =
                config.pooled_features
                    ? cbr::build_features_pooled(fits, {first, second}, config.standardize)
                    : cbr::build_features(fits, first, second, config.standardize);
            const auto tree = cbr::hierarchical_cluster(features, config.linkage);
            const auto assignments = cbr::cut_tree(tree, 2);
            std::vector<std::string> labels;
            for (const auto& r : features.rows) labels.push_back(r.group);
            const auto disc = cbr::evaluate_discrimination(assignments, labels);

            std::filesystem::create_directories(cluster_out);
            std::ostringstream cl;
            cl << "participant,group,cluster\n";
            for (size_t i = 0; i < features.rows.size(); ++i)
                cl << features.rows[i].id << "," << features.rows[i].group << "," << assignments[i]
                   << "\n";
            const auto cl_path =
                std::filesystem::path(cluster_out) / ("clusters_" + cluster_family + ".csv");
            cbr::atomic_write_file(cl_path, cl.str());
            std::cout << cbr::render_discrimination_table({{"overall", disc}});
        } else if (report_cmd->parsed()) {
            const auto surface = cbr::load_surface(report_surface);
            const auto dataset = cbr::load_dataset(report_data);
            cbr::PipelineOptions options{config, iterations, seed, parallelism};
            const auto result = cbr::run_pipeline(dataset, options, report_out, &surface);
            std::cout << result.report_text;
        } else if (run_cmd->parsed()) {
            if (run_synth && !run_data.empty())
                throw cbr::usage_error("run: --data and --synth are mutually exclusive");
            if (!run_synth && run_data.empty())
                throw cbr::usage_error("run: provide --data FILE or --synth");
            cbr::PipelineOptions options{config, iterations, seed, parallelism};
            cbr::Dataset dataset;
            if (run_synth) {
                cbr::SynthSpec spec = run_synth_spec.empty() ? cbr::default_synth_spec(seed)
                                                             : cbr::load_synth_spec(run_synth_spec);
                const auto surface =
                    cbr::run_surface(config.schedules(), config.grid, spec.types, iterations, seed,
                                     config.constants, parallelism);
                const auto synth = cbr::generate_synthetic(spec, surface);
                std::filesystem::create_directories(run_out);
                write_synth_outputs(synth, std::filesystem::path(run_out) / "participants.csv",
                                    spec.seed);
                const auto result = cbr::run_pipeline(synth.dataset, options, run_out, &surface);
                std::cout << result.report_text;
            } else {
                dataset = cbr::load_dataset(run_data);
                const auto result = cbr::run_pipeline(dataset, options, run_out);
                std::cout << result.report_text;
            }
        }
        return 0;
    } catch (const cbr::usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
