#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "cbr/cluster.hpp"
#include "cbr/fit.hpp"
#include "cbr/grid.hpp"
#include "cbr/io.hpp"
#include "cbr/schedule.hpp"
#include "cbr/surface.hpp"

namespace cbr {

/// Everything a run needs beyond its inputs. Serialized with every report so
/// any output can be reproduced from its own header.
struct ModelConfig {
    RetrievalConstants constants;
    ParameterPoint defaults = kDefaultPoint;
    FlagEps flag_eps;
    GridSpec grid;
    Linkage linkage = Linkage::Complete;
    bool standardize = true;
    bool pooled_features = false;  // default: concatenate SR and OR fits
    std::string schedules_file;    // empty -> built-in scripts

    ScheduleSet schedules() const {
        return schedules_file.empty() ? default_schedules() : load_schedules(schedules_file);
    }
};

inline nlohmann::json axis_to_json(const AxisSpec& a) {
    return nlohmann::json{{"lower", a.lower}, {"upper", a.upper}, {"step", a.step}};
}

inline AxisSpec axis_from_json(const nlohmann::json& j, const AxisSpec& fallback) {
    AxisSpec a = fallback;
    a.lower = j.value("lower", a.lower);
    a.upper = j.value("upper", a.upper);
    a.step = j.value("step", a.step);
    return a;
}

inline nlohmann::json config_to_json(const ModelConfig& c) {
    return nlohmann::json{
        {"constants", constants_to_json(c.constants)},
        {"defaults", {{"ga", c.defaults.ga}, {"dat", c.defaults.dat}, {"ans", c.defaults.ans}}},
        {"flag_eps", {{"ga", c.flag_eps.ga}, {"dat", c.flag_eps.dat}, {"ans", c.flag_eps.ans}}},
        {"grid",
         {{"ga", axis_to_json(c.grid.ga)},
          {"dat", axis_to_json(c.grid.dat)},
          {"ans", axis_to_json(c.grid.ans)}}},
        {"linkage", to_string(c.linkage)},
        {"standardize", c.standardize},
        {"pooled_features", c.pooled_features},
        {"schedules_file", c.schedules_file},
    };
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    if (j.contains("constants")) c.constants = constants_from_json(j.at("constants"));
    if (j.contains("defaults")) {
        const auto& d = j.at("defaults");
        c.defaults.ga = d.value("ga", c.defaults.ga);
        c.defaults.dat = d.value("dat", c.defaults.dat);
        c.defaults.ans = d.value("ans", c.defaults.ans);
    }
    if (j.contains("flag_eps")) {
        const auto& e = j.at("flag_eps");
        c.flag_eps.ga = e.value("ga", c.flag_eps.ga);
        c.flag_eps.dat = e.value("dat", c.flag_eps.dat);
        c.flag_eps.ans = e.value("ans", c.flag_eps.ans);
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.contains("ga")) c.grid.ga = axis_from_json(g.at("ga"), c.grid.ga);
        if (g.contains("dat")) c.grid.dat = axis_from_json(g.at("dat"), c.grid.dat);
        if (g.contains("ans")) c.grid.ans = axis_from_json(g.at("ans"), c.grid.ans);
    }
    if (j.contains("linkage")) c.linkage = linkage_from_string(j.at("linkage").get<std::string>());
    c.standardize = j.value("standardize", c.standardize);
    c.pooled_features = j.value("pooled_features", c.pooled_features);
    c.schedules_file = j.value("schedules_file", c.schedules_file);
    c.constants.validate();
    c.defaults.validate();
    c.flag_eps.validate();
    c.grid.validate();
    return c;
}

inline ModelConfig load_config(const std::filesystem::path& path) {
    try {
        return config_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw usage_error(path.string() + ": " + e.what());
    }
}

inline void save_config(const ModelConfig& c, const std::filesystem::path& path) {
    atomic_write_file(path, config_to_json(c).dump(2) + "\n");
}

}  // namespace cbr
