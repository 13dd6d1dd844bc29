#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cbr/io.hpp"
#include "cbr/rng.hpp"
#include "cbr/surface.hpp"

namespace cbr {

inline constexpr const char* kControlGroup = "control";
inline constexpr const char* kIwaGroup = "IWA";

/// Observed items for one participant: per sentence type, how many items
/// were presented and how many were answered correctly. Accuracies are
/// derived, never stored, so no rounding ambiguity can creep in.
struct ParticipantRecord {
    std::string id;
    std::string group;
    std::map<SentenceType, std::pair<long, long>> items;  // type -> (n_items, n_correct)

    double accuracy(SentenceType t) const {
        auto it = items.find(t);
        if (it == items.end())
            throw usage_error("participant '" + id + "' has no data for " + to_string(t));
        return static_cast<double>(it->second.second) / static_cast<double>(it->second.first);
    }

    bool covers(SentenceType t) const { return items.count(t) > 0; }
};

struct Dataset {
    std::vector<ParticipantRecord> participants;
    std::string provenance;

    const ParticipantRecord& find(const std::string& id) const {
        for (const auto& p : participants)
            if (p.id == id) return p;
        throw usage_error("no participant '" + id + "' in dataset");
    }
};

inline constexpr const char* kDatasetHeader = "participant,group,sentence_type,n_items,n_correct";

inline std::string dataset_to_csv(const Dataset& ds) {
    std::ostringstream out;
    out << kDatasetHeader << "\n";
    for (const auto& p : ds.participants)
        for (const auto& [type, counts] : p.items)
            out << p.id << "," << p.group << "," << to_string(type) << "," << counts.first << ","
                << counts.second << "\n";
    return out.str();
}

inline Dataset parse_dataset(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line))
        throw usage_error(name + ": file is empty (expected header '" + kDatasetHeader + "')");
    if (split_csv(line) != split_csv(kDatasetHeader))
        throw usage_error(name + " line 1: expected header '" + kDatasetHeader + "'");

    Dataset ds;
    ds.provenance = name;
    std::map<std::string, size_t> by_id;
    int line_no = 1;
    bool any_row = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        any_row = true;
        const std::string ctx = name + " line " + std::to_string(line_no);
        const auto f = split_csv(line);
        if (f.size() != 5)
            throw usage_error(ctx + ": expected 5 fields (" + kDatasetHeader + "), got " +
                              std::to_string(f.size()));
        const std::string& id = f[0];
        const std::string& group = f[1];
        if (id.empty()) throw usage_error(ctx + ", column 1: participant id is empty");
        if (group != kControlGroup && group != kIwaGroup)
            throw usage_error(ctx + ", column 2: group must be '" + kControlGroup + "' or '" +
                              kIwaGroup + "', got '" + group + "'");
        SentenceType type;
        try {
            type = sentence_type_from_string(f[2]);
        } catch (const usage_error& e) {
            throw usage_error(ctx + ", column 3: " + e.what());
        }
        const long n_items = parse_long(f[3], ctx + ", column 4");
        const long n_correct = parse_long(f[4], ctx + ", column 5");
        if (n_items < 1) throw usage_error(ctx + ", column 4: n_items must be >= 1");
        if (n_correct < 0 || n_correct > n_items)
            throw usage_error(ctx + ", column 5: accuracy " +
                              std::to_string(static_cast<double>(n_correct) /
                                             static_cast<double>(std::max(n_items, 1L))) +
                              " outside [0,1] (n_correct must be within [0, n_items])");

        auto it = by_id.find(id);
        if (it == by_id.end()) {
            by_id.emplace(id, ds.participants.size());
            ds.participants.push_back(ParticipantRecord{id, group, {}});
            it = by_id.find(id);
        }
        ParticipantRecord& rec = ds.participants[it->second];
        if (rec.group != group)
            throw usage_error(ctx + ": participant '" + id + "' listed under two groups");
        if (!rec.items.emplace(type, std::make_pair(n_items, n_correct)).second)
            throw usage_error(ctx + ": duplicate row for participant '" + id + "' and type " +
                              to_string(type));
    }
    if (!any_row) throw usage_error(name + ": no data rows");
    return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    return parse_dataset(in, path.string());
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    atomic_write_file(path, dataset_to_csv(ds));
}

/// How to draw one synthetic group: a participant count and an inclusive
/// range per parameter (lower == upper pins the value).
struct GroupSynthSpec {
    std::string label;
    int count = 1;
    std::array<double, 2> ga{1.0, 1.0};
    std::array<double, 2> dat{0.05, 0.05};
    std::array<double, 2> ans{0.15, 0.15};
    long n_items = 20;
};

struct SynthSpec {
    std::vector<GroupSynthSpec> groups;
    std::vector<SentenceType> types{SentenceType::SR, SentenceType::OR};
    std::uint64_t seed = 1;

    void validate() const {
        if (groups.empty()) throw usage_error("synthetic spec has no groups");
        for (const auto& g : groups) {
            if (g.count < 1) throw usage_error("synthetic group counts must be >= 1");
            if (g.n_items < 1) throw usage_error("synthetic n_items must be >= 1");
            for (const auto& r : {g.ga, g.dat, g.ans})
                if (r[0] > r[1]) throw usage_error("synthetic parameter range has lower > upper");
        }
        for (size_t i = 0; i < groups.size(); ++i)
            for (size_t j = i + 1; j < groups.size(); ++j)
                if (groups[i].label == groups[j].label)
                    throw usage_error("synthetic groups repeat label '" + groups[i].label + "'");
        if (types.empty()) throw usage_error("synthetic spec lists no sentence types");
    }
};

/// Default cohort mirroring the study's qualitative contrast: controls near
/// the standard parameter settings, an impaired group spread over low goal
/// activation, slow action times and high noise.
inline SynthSpec default_synth_spec(std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    spec.groups = {
        GroupSynthSpec{kControlGroup, 20, {0.9, 1.1}, {0.05, 0.06}, {0.15, 0.2}, 20},
        GroupSynthSpec{kIwaGroup, 20, {0.2, 0.7}, {0.07, 0.1}, {0.3, 0.45}, 20},
    };
    return spec;
}

inline nlohmann::json synth_spec_to_json(const SynthSpec& spec) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : spec.groups)
        groups.push_back(nlohmann::json{{"label", g.label},
                                        {"count", g.count},
                                        {"ga", g.ga},
                                        {"dat", g.dat},
                                        {"ans", g.ans},
                                        {"n_items", g.n_items}});
    nlohmann::json types = nlohmann::json::array();
    for (SentenceType t : spec.types) types.push_back(to_string(t));
    return nlohmann::json{{"seed", spec.seed}, {"types", types}, {"groups", groups}};
}

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
    SynthSpec spec;
    spec.groups.clear();
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("types")) {
        spec.types.clear();
        for (const auto& t : j.at("types"))
            spec.types.push_back(sentence_type_from_string(t.get<std::string>()));
    }
    if (!j.contains("groups")) throw usage_error("synthetic spec: missing 'groups'");
    for (const auto& g : j.at("groups")) {
        GroupSynthSpec gs;
        gs.label = g.value("label", std::string("group"));
        gs.count = g.value("count", gs.count);
        if (g.contains("ga")) gs.ga = g.at("ga").get<std::array<double, 2>>();
        if (g.contains("dat")) gs.dat = g.at("dat").get<std::array<double, 2>>();
        if (g.contains("ans")) gs.ans = g.at("ans").get<std::array<double, 2>>();
        gs.n_items = g.value("n_items", gs.n_items);
        spec.groups.push_back(std::move(gs));
    }
    spec.validate();
    return spec;
}

inline SynthSpec load_synth_spec(const std::filesystem::path& path) {
    try {
        return synth_spec_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw usage_error(path.string() + ": " + e.what());
    }
}

/// One synthetic participant's provenance: the generating parameter draw and
/// the grid cell it snapped to.
struct SynthProvenance {
    std::string id;
    ParameterPoint drawn;
    ParameterPoint cell;
};

struct SynthResult {
    Dataset dataset;
    std::vector<SynthProvenance> provenance;
};

/// Draws a cohort: per participant a generating parameter point (uniform in
/// the group's ranges), snapped to the nearest surface cell; observed counts
/// are Binomial(n_items, cell accuracy). Deterministic given the cohort seed.
inline SynthResult generate_synthetic(const SynthSpec& spec, const AccuracySurface& surface) {
    spec.validate();
    for (SentenceType t : spec.types)
        if (!surface.has_type(t))
            throw usage_error("surface does not cover sentence type " + to_string(t));

    const auto steps = surface.axis_steps();
    auto check_hull = [&](double v, double lo, double hi, double step, const char* axis) {
        // Half a grid step of slack, so range edges still snap to edge cells.
        const double pad = 0.5 * step;
        if (v < lo - pad || v > hi + pad)
            throw usage_error(std::string("synthetic ") + axis + " range leaves the surface hull [" +
                              format_param(lo) + ", " + format_param(hi) + "]");
    };
    double ga_lo = 1e300, ga_hi = -1e300, dat_lo = 1e300, dat_hi = -1e300, ans_lo = 1e300,
           ans_hi = -1e300;
    for (const auto& p : surface.grid) {
        ga_lo = std::min(ga_lo, p.ga);
        ga_hi = std::max(ga_hi, p.ga);
        dat_lo = std::min(dat_lo, p.dat);
        dat_hi = std::max(dat_hi, p.dat);
        ans_lo = std::min(ans_lo, p.ans);
        ans_hi = std::max(ans_hi, p.ans);
    }

    SynthResult result;
    result.dataset.provenance = "synthetic cohort (seed " + std::to_string(spec.seed) + ")";
    std::uint64_t participant_index = 0;
    for (const auto& group : spec.groups) {
        check_hull(group.ga[0], ga_lo, ga_hi, steps[0], "GA");
        check_hull(group.ga[1], ga_lo, ga_hi, steps[0], "GA");
        check_hull(group.dat[0], dat_lo, dat_hi, steps[1], "DAT");
        check_hull(group.dat[1], dat_lo, dat_hi, steps[1], "DAT");
        check_hull(group.ans[0], ans_lo, ans_hi, steps[2], "ANS");
        check_hull(group.ans[1], ans_lo, ans_hi, steps[2], "ANS");
        for (int i = 0; i < group.count; ++i, ++participant_index) {
            RandomStream rng(derive_stream_seed(spec.seed, "synth", participant_index));
            ParameterPoint drawn{rng.uniform(group.ga[0], group.ga[1]),
                                 rng.uniform(group.dat[0], group.dat[1]),
                                 rng.uniform(group.ans[0], group.ans[1])};
            const ParameterPoint cell = surface.nearest_point(drawn);

            ParticipantRecord rec;
            rec.id = group.label + "-" + std::to_string(i + 1);
            rec.group = group.label;
            for (SentenceType t : spec.types) {
                const SurfaceCell* c = surface.find_cell(cell, t);
                if (!c) throw usage_error("surface cell lookup failed for " + to_string(t));
                const long correct = rng.binomial(static_cast<int>(group.n_items), c->accuracy);
                rec.items.emplace(t, std::make_pair(group.n_items, correct));
            }
            result.dataset.participants.push_back(std::move(rec));
            result.provenance.push_back(SynthProvenance{group.label + "-" + std::to_string(i + 1),
                                                        drawn, cell});
        }
    }
    return result;
}

inline std::string synth_provenance_to_json(const SynthResult& r, std::uint64_t seed) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : r.provenance) {
        arr.push_back(nlohmann::json{
            {"id", p.id},
            {"drawn", {p.drawn.ga, p.drawn.dat, p.drawn.ans}},
            {"cell", {p.cell.ga, p.cell.dat, p.cell.ans}},
        });
    }
    nlohmann::json j{{"seed", seed}, {"participants", arr}};
    return j.dump(2) + "\n";
}

}  // namespace cbr
