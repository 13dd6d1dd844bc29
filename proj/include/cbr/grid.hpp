#pragma once

#include <cmath>
#include <vector>

#include "cbr/types.hpp"

namespace cbr {

/// Inclusive range with a fixed step for one parameter axis.
struct AxisSpec {
    double lower = 0.0;
    double upper = 0.0;
    double step = 1.0;

    void validate(const char* name) const {
        if (!(step > 0.0)) throw usage_error(std::string(name) + " axis: step must be > 0");
        if (lower > upper) throw usage_error(std::string(name) + " axis: lower > upper");
    }
};

/// The discretised parameter space: one axis per impairment parameter.
struct GridSpec {
    AxisSpec ga{0.2, 1.1, 0.1};
    AxisSpec dat{0.05, 0.1, 0.01};
    AxisSpec ans{0.15, 0.45, 0.05};

    void validate() const {
        ga.validate("GA");
        dat.validate("DAT");
        ans.validate("ANS");
    }
};

/// Rounds to 10 decimals; axis values are generated by index arithmetic and
/// snapped through this, so 0.1-step enumerations carry no accumulation
/// drift and render canonically.
inline double round_param(double v) { return std::round(v * 1e10) / 1e10; }

inline std::vector<double> enumerate_axis(const AxisSpec& axis) {
    // Endpoint inclusion tolerates 1e-9 of floating error in (upper-lower)/step.
    const auto n = static_cast<size_t>(std::floor((axis.upper - axis.lower) / axis.step + 1e-9)) + 1;
    std::vector<double> values;
    values.reserve(n);
    for (size_t k = 0; k < n; ++k)
        values.push_back(round_param(axis.lower + static_cast<double>(k) * axis.step));
    return values;
}

/// Cartesian product in deterministic order: GA outermost, ANS innermost.
inline std::vector<ParameterPoint> build_grid(const GridSpec& spec) {
    spec.validate();
    const auto gas = enumerate_axis(spec.ga);
    const auto dats = enumerate_axis(spec.dat);
    const auto anss = enumerate_axis(spec.ans);
    std::vector<ParameterPoint> grid;
    grid.reserve(gas.size() * dats.size() * anss.size());
    for (double ga : gas)
        for (double dat : dats)
            for (double ans : anss) grid.push_back(ParameterPoint{ga, dat, ans});
    return grid;
}

}  // namespace cbr
