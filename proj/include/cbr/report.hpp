#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cbr/cluster.hpp"
#include "cbr/config.hpp"
#include "cbr/fit.hpp"

namespace cbr {

/// Space-aligned text table: first column left-aligned, the rest right-aligned.
inline std::string render_aligned(const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        std::string line;
        for (size_t c = 0; c < row.size(); ++c) {
            if (c > 0) line += "  ";
            const auto pad = widths[c] - row[c].size();
            if (c == 0) {
                line += row[c] + std::string(pad, ' ');
            } else {
                line += std::string(pad, ' ') + row[c];
            }
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << "\n";
    }
    return out.str();
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

inline std::string format_percent(double fraction) {
    return std::to_string(static_cast<long>(std::llround(fraction * 100.0))) + "%";
}

// --- non-default parameter counts (Table 1/2 analogue) ---------------------

inline std::string render_non_default_table(const NonDefaultTable& table) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"sentence type", "group", "n", "GA", "DAT", "ANS", "GA&DAT", "GA&ANS",
                    "DAT&ANS", "GA&DAT&ANS"});
    for (const auto& [key, c] : table) {
        rows.push_back({to_string(key.first), key.second, std::to_string(c.n_participants),
                        std::to_string(c.ga), std::to_string(c.dat), std::to_string(c.ans),
                        std::to_string(c.ga_dat), std::to_string(c.ga_ans),
                        std::to_string(c.dat_ans), std::to_string(c.ga_dat_ans)});
    }
    return render_aligned(rows);
}

inline std::string non_default_to_csv(const NonDefaultTable& table) {
    std::ostringstream out;
    out << "sentence_type,group,n,ga,dat,ans,ga_dat,ga_ans,dat_ans,ga_dat_ans\n";
    for (const auto& [key, c] : table) {
        out << to_string(key.first) << "," << key.second << "," << c.n_participants << "," << c.ga
            << "," << c.dat << "," << c.ans << "," << c.ga_dat << "," << c.ga_ans << ","
            << c.dat_ans << "," << c.ga_dat_ans << "\n";
    }
    return out.str();
}

// --- clustering discrimination (Table 3/4 analogue) -------------------------

/// Renders one or two discrimination blocks side by side: rows are the
/// predicted groups, columns the true groups (per section), and the bottom
/// row the per-column percentage accuracy.
inline std::string render_discrimination_table(
    const std::vector<std::pair<std::string, Discrimination>>& sections) {
    if (sections.empty()) return "";
    const auto& groups = sections.front().second.groups;

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"predicted group"};
    for (const auto& [name, disc] : sections) {
        header.push_back(name + " " + disc.groups[0]);
        header.push_back(name + " " + disc.groups[1]);
    }
    rows.push_back(header);
    for (int predicted = 0; predicted < 2; ++predicted) {
        std::vector<std::string> row{groups[predicted]};
        for (const auto& [name, disc] : sections) {
            row.push_back(std::to_string(disc.confusion[predicted][0]));
            row.push_back(std::to_string(disc.confusion[predicted][1]));
        }
        rows.push_back(row);
    }
    std::vector<std::string> acc{"accuracy"};
    for (const auto& [name, disc] : sections) {
        acc.push_back(format_percent(disc.group_accuracy[0]));
        acc.push_back(format_percent(disc.group_accuracy[1]));
    }
    rows.push_back(acc);
    return render_aligned(rows);
}

inline std::string discrimination_to_csv(
    const std::string& family,
    const std::vector<std::pair<std::string, Discrimination>>& sections) {
    std::ostringstream out;
    out << "family,section,predicted_group,true_group,count\n";
    for (const auto& [name, disc] : sections)
        for (int p = 0; p < 2; ++p)
            for (int t = 0; t < 2; ++t)
                out << family << "," << name << "," << disc.groups[p] << "," << disc.groups[t]
                    << "," << disc.confusion[p][t] << "\n";
    return out.str();
}

}  // namespace cbr
