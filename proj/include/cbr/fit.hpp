#pragma once

#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cbr/dataset.hpp"
#include "cbr/surface.hpp"

namespace cbr {

struct NonDefaultFlags {
    bool ga = false;
    bool dat = false;
    bool ans = false;
};

/// Per-parameter tolerance for calling a fitted value non-default. Averaging
/// ties produces off-grid values, so exact comparison to the defaults would
/// be ill-defined; half a grid step is the shipped tolerance.
struct FlagEps {
    double ga = 0.05;
    double dat = 0.005;
    double ans = 0.025;

    void validate() const {
        if (!(ga > 0.0 && dat > 0.0 && ans > 0.0))
            throw usage_error("non-default tolerances must be > 0");
    }
};

inline constexpr ParameterPoint kDefaultPoint{1.0, 0.05, 0.15};

struct FitResult {
    std::string participant;
    std::string group;
    SentenceType type = SentenceType::SR;
    std::vector<ParameterPoint> tie_set;  // all argmin cells, grid order
    ParameterPoint fitted;                // componentwise mean over the tie set
    double residual = 0.0;                // minimal |model - observed|
    NonDefaultFlags flags;
};

/// Distances are rounded to 12 decimals before comparison so float noise
/// cannot split a genuine tie.
inline double round_distance(double d) { return std::round(d * 1e12) / 1e12; }

/// Finds every parameter point whose simulated accuracy minimises the
/// absolute distance to the observed accuracy, and averages ties into one
/// fitted vector.
inline FitResult fit_participant(double observed, const AccuracySurface& surface,
                                 SentenceType type) {
    if (!(observed >= 0.0 && observed <= 1.0))
        throw usage_error("observed accuracy " + std::to_string(observed) + " outside [0,1]");
    if (!surface.has_type(type))
        throw usage_error("surface does not cover sentence type " + to_string(type));

    FitResult fit;
    fit.type = type;
    double best = -1.0;
    for (const auto& point : surface.grid) {
        const SurfaceCell* cell = surface.find_cell(point, type);
        if (!cell) throw usage_error("surface is missing cell " + cell_key(point, type));
        const double d = round_distance(std::abs(cell->accuracy - observed));
        if (best < 0.0 || d < best) {
            best = d;
            fit.tie_set.clear();
        }
        if (d == best) fit.tie_set.push_back(point);
    }
    fit.residual = best;
    ParameterPoint mean{0.0, 0.0, 0.0};
    for (const auto& p : fit.tie_set) {
        mean.ga += p.ga;
        mean.dat += p.dat;
        mean.ans += p.ans;
    }
    const auto n = static_cast<double>(fit.tie_set.size());
    fit.fitted = ParameterPoint{mean.ga / n, mean.dat / n, mean.ans / n};
    return fit;
}

inline NonDefaultFlags flag_non_default(const ParameterPoint& fitted,
                                        const ParameterPoint& defaults, const FlagEps& eps) {
    eps.validate();
    // Rounded like fit distances: a tie-average sitting exactly on the
    // tolerance boundary (e.g. mean of 1.0 and 1.1 against eps 0.05) must not
    // flip on float noise.
    NonDefaultFlags f;
    f.ga = round_distance(std::abs(fitted.ga - defaults.ga)) > eps.ga;
    f.dat = round_distance(std::abs(fitted.dat - defaults.dat)) > eps.dat;
    f.ans = round_distance(std::abs(fitted.ans - defaults.ans)) > eps.ans;
    return f;
}

/// Fits every participant of a dataset for the given sentence types.
inline std::vector<FitResult> fit_dataset(const Dataset& ds, const AccuracySurface& surface,
                                          const std::vector<SentenceType>& types,
                                          const ParameterPoint& defaults = kDefaultPoint,
                                          const FlagEps& eps = FlagEps{}) {
    std::vector<FitResult> fits;
    fits.reserve(ds.participants.size() * types.size());
    for (const auto& p : ds.participants) {
        for (SentenceType t : types) {
            if (!p.covers(t))
                throw usage_error("participant '" + p.id + "' has no data for " + to_string(t));
            FitResult f = fit_participant(p.accuracy(t), surface, t);
            f.participant = p.id;
            f.group = p.group;
            f.flags = flag_non_default(f.fitted, defaults, eps);
            fits.push_back(std::move(f));
        }
    }
    return fits;
}

/// Counts of participants flagged non-default, per (sentence type, group):
/// each single parameter and each conjunction.
struct NonDefaultCounts {
    int n_participants = 0;
    int ga = 0;
    int dat = 0;
    int ans = 0;
    int ga_dat = 0;
    int ga_ans = 0;
    int dat_ans = 0;
    int ga_dat_ans = 0;
};

using NonDefaultTable = std::map<std::pair<SentenceType, std::string>, NonDefaultCounts>;

inline NonDefaultTable tabulate_non_default(const std::vector<FitResult>& fits) {
    NonDefaultTable table;
    for (const auto& f : fits) {
        NonDefaultCounts& c = table[{f.type, f.group}];
        ++c.n_participants;
        c.ga += f.flags.ga;
        c.dat += f.flags.dat;
        c.ans += f.flags.ans;
        c.ga_dat += f.flags.ga && f.flags.dat;
        c.ga_ans += f.flags.ga && f.flags.ans;
        c.dat_ans += f.flags.dat && f.flags.ans;
        c.ga_dat_ans += f.flags.ga && f.flags.dat && f.flags.ans;
    }
    return table;
}

inline constexpr const char* kFitsHeader =
    "participant,group,sentence_type,ga,dat,ans,residual,tie_count,flag_ga,flag_dat,flag_ans";

inline std::string fits_to_csv(const std::vector<FitResult>& fits) {
    std::ostringstream out;
    out << kFitsHeader << "\n";
    for (const auto& f : fits) {
        out << f.participant << "," << f.group << "," << to_string(f.type) << ","
            << format_full(f.fitted.ga) << "," << format_full(f.fitted.dat) << ","
            << format_full(f.fitted.ans) << "," << format_full(f.residual) << ","
            << f.tie_set.size() << "," << (f.flags.ga ? 1 : 0) << "," << (f.flags.dat ? 1 : 0)
            << "," << (f.flags.ans ? 1 : 0) << "\n";
    }
    return out.str();
}

inline std::vector<FitResult> load_fits(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != split_csv(kFitsHeader))
        throw usage_error(path.string() + ": expected header '" + kFitsHeader + "'");
    std::vector<FitResult> fits;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string ctx = path.string() + " line " + std::to_string(line_no);
        const auto f = split_csv(line);
        if (f.size() != 11) throw usage_error(ctx + ": expected 11 fields");
        FitResult fit;
        fit.participant = f[0];
        fit.group = f[1];
        fit.type = sentence_type_from_string(f[2]);
        fit.fitted = ParameterPoint{parse_double(f[3], ctx), parse_double(f[4], ctx),
                                    parse_double(f[5], ctx)};
        fit.residual = parse_double(f[6], ctx);
        const long ties = parse_long(f[7], ctx);
        if (ties < 1) throw usage_error(ctx + ": tie_count must be >= 1");
        fit.tie_set.assign(static_cast<size_t>(ties), fit.fitted);  // cardinality only
        fit.flags.ga = parse_long(f[8], ctx) != 0;
        fit.flags.dat = parse_long(f[9], ctx) != 0;
        fit.flags.ans = parse_long(f[10], ctx) != 0;
        fits.push_back(std::move(fit));
    }
    if (fits.empty()) throw usage_error(path.string() + ": no fit rows");
    return fits;
}

}  // namespace cbr
