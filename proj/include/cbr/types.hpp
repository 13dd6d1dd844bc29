#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cbr {

/// Raised on invalid user input (bad files, bad arguments, violated
/// preconditions that a caller could have checked). The CLI maps these to
/// exit code 1; everything else is an internal error (exit code 2).
class usage_error : public std::runtime_error {
public:
    explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A feature-valued element of declarative memory.
///
/// Feature names are unique within a chunk; the value set is open-ended
/// symbolic strings (e.g. pos=nominal, animate=yes, case=subject).
struct Chunk {
    std::string id;
    std::vector<std::pair<std::string, std::string>> features;
    double encoded_at = 0.0;  // simulation time in seconds

    std::optional<std::string_view> feature_value(std::string_view name) const {
        for (const auto& [k, v] : features) {
            if (k == name) return std::string_view(v);
        }
        return std::nullopt;
    }

    void validate() const {
        if (features.empty())
            throw usage_error("chunk '" + id + "' has no features");
        if (encoded_at < 0.0)
            throw usage_error("chunk '" + id + "' encoded at negative time");
        for (size_t i = 0; i < features.size(); ++i)
            for (size_t j = i + 1; j < features.size(); ++j)
                if (features[i].first == features[j].first)
                    throw usage_error("chunk '" + id + "' repeats feature '" +
                                      features[i].first + "'");
    }
};

/// Retrieval cues: an ordered list of (feature, required value) pairs.
struct CueSet {
    std::vector<std::pair<std::string, std::string>> cues;

    size_t size() const { return cues.size(); }

    void validate() const {
        if (cues.empty()) throw usage_error("cue set is empty");
        for (size_t i = 0; i < cues.size(); ++i)
            for (size_t j = i + 1; j < cues.size(); ++j)
                if (cues[i].first == cues[j].first)
                    throw usage_error("cue set repeats feature '" + cues[i].first + "'");
    }
};

/// Does the chunk carry exactly the cued value?  An absent feature does not
/// match (and counts as a mismatch for the penalty term).
inline bool cue_matches(const Chunk& chunk, const std::pair<std::string, std::string>& cue) {
    auto v = chunk.feature_value(cue.first);
    return v.has_value() && *v == cue.second;
}

/// One point of the impairment-parameter space: goal activation, default
/// action time (seconds per production firing), activation noise scale.
struct ParameterPoint {
    double ga = 1.0;
    double dat = 0.05;
    double ans = 0.15;

    void validate() const {
        if (!(ga > 0.0)) throw usage_error("GA must be > 0");
        if (!(dat > 0.0)) throw usage_error("DAT must be > 0");
        if (!(ans >= 0.0)) throw usage_error("ANS must be >= 0");
    }

    bool operator==(const ParameterPoint&) const = default;
};

/// Fixed constants of the retrieval equations. All are configuration, not
/// code: every run serializes the set it used.
struct RetrievalConstants {
    double latency_factor = 0.2;  // F, seconds
    double threshold = 0.0;       // tau, minimum activation for success
    double decay = 0.5;           // d, base-level decay exponent
    double max_strength = 1.5;    // S_max, associative strength ceiling
    double mismatch_penalty = -1.5;  // MP, per mismatching cue (<= 0)

    void validate() const {
        if (!(latency_factor > 0.0)) throw usage_error("F must be > 0");
        if (!(decay > 0.0)) throw usage_error("decay d must be > 0");
        if (!(max_strength > 0.0)) throw usage_error("S_max must be > 0");
        if (!(mismatch_penalty <= 0.0)) throw usage_error("MP must be <= 0");
    }

    bool operator==(const RetrievalConstants&) const = default;
};

/// Additive decomposition of one chunk's activation at one retrieval.
struct ActivationBreakdown {
    double base = 0.0;     // B_i
    double spread = 0.0;   // S_i
    double penalty = 0.0;  // P_i
    double noise = 0.0;    // epsilon
    double total = 0.0;    // A_i = B_i + S_i + P_i + epsilon
};

/// Result of one competitive retrieval over a candidate set.
struct RetrievalOutcome {
    std::optional<std::string> winner;  // absent on retrieval failure
    double latency = 0.0;               // seconds
    std::vector<std::pair<std::string, ActivationBreakdown>> per_chunk;

    bool success() const { return winner.has_value(); }
};

/// The four simulated sentence types.
enum class SentenceType { SR, OR, SRRefl, ORRefl };

inline constexpr SentenceType kAllSentenceTypes[] = {
    SentenceType::SR, SentenceType::OR, SentenceType::SRRefl, SentenceType::ORRefl};

inline std::string to_string(SentenceType t) {
    switch (t) {
        case SentenceType::SR: return "SR";
        case SentenceType::OR: return "OR";
        case SentenceType::SRRefl: return "SR-REFL";
        case SentenceType::ORRefl: return "OR-REFL";
    }
    throw std::logic_error("unreachable sentence type");
}

inline SentenceType sentence_type_from_string(std::string_view s) {
    if (s == "SR") return SentenceType::SR;
    if (s == "OR") return SentenceType::OR;
    if (s == "SR-REFL") return SentenceType::SRRefl;
    if (s == "OR-REFL") return SentenceType::ORRefl;
    throw usage_error("unknown sentence type '" + std::string(s) +
                      "' (supported: SR, OR, SR-REFL, OR-REFL)");
}

}  // namespace cbr
