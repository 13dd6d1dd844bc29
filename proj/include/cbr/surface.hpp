#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cbr/grid.hpp"
#include "cbr/io.hpp"
#include "cbr/trial.hpp"

namespace cbr {

struct SurfaceCell {
    ParameterPoint point;
    SentenceType type = SentenceType::SR;
    long n_correct = 0;
    double accuracy = 0.0;
};

inline std::string cell_key(const ParameterPoint& p, SentenceType type) {
    return format_param(p.ga) + "|" + format_param(p.dat) + "|" + format_param(p.ans) + "|" +
           to_string(type);
}

/// Simulated accuracy for every (parameter point, sentence type) cell,
/// together with everything needed to reproduce it.
struct AccuracySurface {
    std::vector<ParameterPoint> grid;
    std::vector<SentenceType> types;
    std::vector<SurfaceCell> cells;  // point-major, type-minor
    long n_iterations = 0;
    std::uint64_t master_seed = 0;
    RetrievalConstants constants;

    bool has_type(SentenceType t) const {
        return std::find(types.begin(), types.end(), t) != types.end();
    }

    const SurfaceCell* find_cell(const ParameterPoint& p, SentenceType t) const {
        auto it = index_.find(cell_key(p, t));
        return it == index_.end() ? nullptr : &cells[it->second];
    }

    /// Per-axis grid steps (minimum gap between distinct values); 1.0 on a
    /// degenerate axis. Used as scales for nearest-cell matching.
    std::array<double, 3> axis_steps() const {
        auto step_of = [](const std::set<double>& vals) {
            if (vals.size() < 2) return 1.0;
            double step = std::numeric_limits<double>::infinity();
            double prev = 0.0;
            bool first = true;
            for (double v : vals) {
                if (!first) step = std::min(step, v - prev);
                prev = v;
                first = false;
            }
            return step;
        };
        std::set<double> gas, dats, anss;
        for (const auto& p : grid) {
            gas.insert(p.ga);
            dats.insert(p.dat);
            anss.insert(p.ans);
        }
        return {step_of(gas), step_of(dats), step_of(anss)};
    }

    /// Closest grid point under per-axis step-scaled Euclidean distance.
    const ParameterPoint& nearest_point(const ParameterPoint& p) const {
        if (grid.empty()) throw usage_error("surface has no grid points");
        const auto steps = axis_steps();
        size_t best = 0;
        double best_d = -1.0;
        for (size_t i = 0; i < grid.size(); ++i) {
            const double dg = (grid[i].ga - p.ga) / steps[0];
            const double dd = (grid[i].dat - p.dat) / steps[1];
            const double da = (grid[i].ans - p.ans) / steps[2];
            const double d = dg * dg + dd * dd + da * da;
            if (best_d < 0.0 || d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return grid[best];
    }

    void rebuild_index() {
        index_.clear();
        for (size_t i = 0; i < cells.size(); ++i)
            index_.emplace(cell_key(cells[i].point, cells[i].type), i);
    }

    void validate() const {
        if (cells.size() != grid.size() * types.size())
            throw usage_error("surface does not cover every (point, type) pair");
        for (const auto& c : cells) {
            if (c.accuracy < 0.0 || c.accuracy > 1.0)
                throw usage_error("surface accuracy outside [0,1]");
            if (std::llround(c.accuracy * static_cast<double>(n_iterations)) != c.n_correct)
                throw usage_error("surface accuracy is not n_correct / n_iterations");
        }
    }

private:
    std::map<std::string, size_t> index_;
};

/// Counts correct trials for one cell, on a stream derived deterministically
/// from (master seed, point, type). Bit-reproducible for fixed inputs.
inline long count_correct_trials(const SentenceSchedule& schedule, const ParameterPoint& point,
                                 const RetrievalConstants& constants, long n_iterations,
                                 std::uint64_t master_seed) {
    if (n_iterations < 1) throw usage_error("n_iterations must be >= 1");
    RandomStream rng(derive_cell_seed(master_seed, point, schedule.sentence_type));
    long correct = 0;
    for (long i = 0; i < n_iterations; ++i)
        if (run_trial(schedule, point, constants, rng).scored_correct) ++correct;
    return correct;
}

inline double estimate_accuracy(const SentenceSchedule& schedule, const ParameterPoint& point,
                                const RetrievalConstants& constants, long n_iterations,
                                std::uint64_t master_seed) {
    return static_cast<double>(count_correct_trials(schedule, point, constants, n_iterations,
                                                    master_seed)) /
           static_cast<double>(n_iterations);
}

/// Monte Carlo estimate for every grid cell. Cells are independent work
/// items; any thread may pick up any cell because each cell's stream is
/// seeded from its own identity, never from execution order.
inline AccuracySurface run_surface(const ScheduleSet& schedules, const GridSpec& spec,
                                   const std::vector<SentenceType>& types, long n_iterations,
                                   std::uint64_t master_seed, const RetrievalConstants& constants,
                                   unsigned parallelism = 0) {
    if (n_iterations < 1) throw usage_error("n_iterations must be >= 1");
    if (types.empty()) throw usage_error("run_surface: no sentence types requested");
    for (SentenceType t : types)
        if (!schedules.count(t))
            throw usage_error("no schedule available for sentence type " + to_string(t));

    AccuracySurface surface;
    surface.grid = build_grid(spec);
    surface.types = types;
    surface.n_iterations = n_iterations;
    surface.master_seed = master_seed;
    surface.constants = constants;
    surface.cells.resize(surface.grid.size() * types.size());

    const size_t n_cells = surface.cells.size();
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        try {
            for (size_t i = next.fetch_add(1); i < n_cells; i = next.fetch_add(1)) {
                const ParameterPoint& point = surface.grid[i / types.size()];
                const SentenceType type = types[i % types.size()];
                const long correct = count_correct_trials(schedules.at(type), point, constants,
                                                          n_iterations, master_seed);
                surface.cells[i] =
                    SurfaceCell{point, type, correct,
                                static_cast<double>(correct) / static_cast<double>(n_iterations)};
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(n_cells);  // drain remaining work
        }
    };

    unsigned n_threads = parallelism ? parallelism : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(n_cells)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    surface.rebuild_index();
    surface.validate();
    return surface;
}

// ---------------------------------------------------------------------------
// Persistence: a flat CSV plus a JSON sidecar (<file>.meta.json) carrying the
// seed and constants, so every surface is reproducible from its own output.
// ---------------------------------------------------------------------------

inline constexpr const char* kSurfaceHeader = "ga,dat,ans,sentence_type,n_iter,n_correct,accuracy";

inline std::string surface_to_csv(const AccuracySurface& s) {
    std::ostringstream out;
    out << kSurfaceHeader << "\n";
    for (const auto& c : s.cells) {
        out << format_param(c.point.ga) << "," << format_param(c.point.dat) << ","
            << format_param(c.point.ans) << "," << to_string(c.type) << "," << s.n_iterations
            << "," << c.n_correct << "," << format_full(c.accuracy) << "\n";
    }
    return out.str();
}

inline nlohmann::json constants_to_json(const RetrievalConstants& c) {
    return nlohmann::json{{"latency_factor", c.latency_factor},
                          {"threshold", c.threshold},
                          {"decay", c.decay},
                          {"max_strength", c.max_strength},
                          {"mismatch_penalty", c.mismatch_penalty}};
}

inline RetrievalConstants constants_from_json(const nlohmann::json& j) {
    RetrievalConstants c;
    c.latency_factor = j.value("latency_factor", c.latency_factor);
    c.threshold = j.value("threshold", c.threshold);
    c.decay = j.value("decay", c.decay);
    c.max_strength = j.value("max_strength", c.max_strength);
    c.mismatch_penalty = j.value("mismatch_penalty", c.mismatch_penalty);
    c.validate();
    return c;
}

inline std::string surface_meta_to_json(const AccuracySurface& s) {
    nlohmann::json j{{"master_seed", s.master_seed},
                     {"n_iterations", s.n_iterations},
                     {"constants", constants_to_json(s.constants)}};
    return j.dump(2) + "\n";
}

inline std::filesystem::path surface_meta_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p += ".meta.json";
    return p;
}

inline void save_surface(const AccuracySurface& s, const std::filesystem::path& csv_path) {
    atomic_write_file(csv_path, surface_to_csv(s));
    atomic_write_file(surface_meta_path(csv_path), surface_meta_to_json(s));
}

inline AccuracySurface load_surface(const std::filesystem::path& csv_path) {
    std::istringstream in(read_file(csv_path));
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != split_csv(kSurfaceHeader))
        throw usage_error(csv_path.string() + ": expected header '" + kSurfaceHeader + "'");

    AccuracySurface s;
    std::set<std::string> seen_points;
    std::set<SentenceType> seen_types;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        const std::string ctx = csv_path.string() + " line " + std::to_string(line_no);
        if (f.size() != 7) throw usage_error(ctx + ": expected 7 fields");
        SurfaceCell c;
        c.point.ga = parse_double(f[0], ctx);
        c.point.dat = parse_double(f[1], ctx);
        c.point.ans = parse_double(f[2], ctx);
        c.type = sentence_type_from_string(f[3]);
        const long n_iter = parse_long(f[4], ctx);
        c.n_correct = parse_long(f[5], ctx);
        c.accuracy = parse_double(f[6], ctx);
        if (s.cells.empty())
            s.n_iterations = n_iter;
        else if (n_iter != s.n_iterations)
            throw usage_error(ctx + ": inconsistent n_iter across rows");
        const std::string pkey =
            format_param(c.point.ga) + "|" + format_param(c.point.dat) + "|" + format_param(c.point.ans);
        if (seen_points.insert(pkey).second) s.grid.push_back(c.point);
        if (seen_types.insert(c.type).second) s.types.push_back(c.type);
        s.cells.push_back(std::move(c));
    }
    if (s.cells.empty()) throw usage_error(csv_path.string() + ": no surface cells");

    const auto meta = surface_meta_path(csv_path);
    if (std::filesystem::exists(meta)) {
        const auto j = nlohmann::json::parse(read_file(meta));
        s.master_seed = j.value("master_seed", std::uint64_t{0});
        if (j.contains("constants")) s.constants = constants_from_json(j.at("constants"));
    }
    s.rebuild_index();
    s.validate();
    return s;
}

}  // namespace cbr
