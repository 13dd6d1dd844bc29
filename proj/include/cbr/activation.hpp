#pragma once

#include <cmath>
#include <vector>

#include "cbr/rng.hpp"
#include "cbr/types.hpp"

namespace cbr {

/// Base-level activation of a chunk encoded once, decaying as a power law:
/// B = -d * ln(now - encoded_at). Strictly decreasing in the chunk's age.
inline double base_level(const Chunk& chunk, double now, double decay) {
    if (!(now > chunk.encoded_at))
        throw usage_error("retrieval at t=" + std::to_string(now) + " does not postdate chunk '" +
                          chunk.id + "' (encoded at t=" + std::to_string(chunk.encoded_at) + ")");
    return -decay * std::log(now - chunk.encoded_at);
}

/// Spreading activation S_i = sum_j W_j * S_ji with W_j = GA / J.
/// A matching cue j contributes S_ji = S_max - ln(fan_j), where fan_j is the
/// number of candidates sharing the cued value; a non-matching cue
/// contributes nothing. Shared values thus dilute the boost (similarity-based
/// interference).
inline double spreading(const Chunk& chunk, const CueSet& cues, double goal_activation,
                        const std::vector<int>& fan, double max_strength) {
    const double weight = goal_activation / static_cast<double>(cues.size());
    double total = 0.0;
    for (size_t j = 0; j < cues.cues.size(); ++j) {
        if (!cue_matches(chunk, cues.cues[j])) continue;
        if (fan[j] < 1)
            throw usage_error("fan count for matching cue '" + cues.cues[j].first +
                              "' must be >= 1");
        total += weight * (max_strength - std::log(static_cast<double>(fan[j])));
    }
    return total;
}

/// Mismatch penalty P_i: MP per cue whose value the chunk does not carry,
/// counting absent features as mismatches.
inline double mismatch_penalty(const Chunk& chunk, const CueSet& cues, double penalty_per_cue) {
    int mismatches = 0;
    for (const auto& cue : cues.cues)
        if (!cue_matches(chunk, cue)) ++mismatches;
    return penalty_per_cue * static_cast<double>(mismatches);
}

/// One draw of logistic activation noise with location 0 and scale ANS.
inline double sample_noise(double ans, RandomStream& rng) {
    if (ans < 0.0) throw usage_error("ANS must be >= 0");
    return rng.logistic(ans);
}

/// A_i = B_i + S_i + P_i + epsilon, with a fresh noise draw per call.
inline ActivationBreakdown total_activation(const Chunk& chunk, const CueSet& cues,
                                            const ParameterPoint& point,
                                            const RetrievalConstants& constants, double now,
                                            const std::vector<int>& fan, RandomStream& rng) {
    ActivationBreakdown b;
    b.base = base_level(chunk, now, constants.decay);
    b.spread = spreading(chunk, cues, point.ga, fan, constants.max_strength);
    b.penalty = mismatch_penalty(chunk, cues, constants.mismatch_penalty);
    b.noise = sample_noise(point.ans, rng);
    b.total = b.base + b.spread + b.penalty + b.noise;
    return b;
}

/// Retrieval time as a function of activation: T = F * exp(-A).
inline double retrieval_latency(double activation, double latency_factor) {
    if (!(latency_factor > 0.0)) throw usage_error("latency factor F must be > 0");
    return latency_factor * std::exp(-activation);
}

/// Per-cue fan: how many candidates carry each cue's required value.
inline std::vector<int> fan_counts(const std::vector<Chunk>& candidates, const CueSet& cues) {
    std::vector<int> fan(cues.size(), 0);
    for (size_t j = 0; j < cues.cues.size(); ++j)
        for (const auto& c : candidates)
            if (cue_matches(c, cues.cues[j])) ++fan[j];
    return fan;
}

/// Competitive cue-based retrieval. Every candidate gets an independent
/// noise draw; the highest total wins if it clears the threshold, otherwise
/// the retrieval fails after F * exp(-tau) seconds. Draw order follows
/// candidate order, so a fixed stream reproduces the outcome exactly.
inline RetrievalOutcome retrieve(const std::vector<Chunk>& candidates, const CueSet& cues,
                                 const ParameterPoint& point, const RetrievalConstants& constants,
                                 double now, RandomStream& rng) {
    if (candidates.empty()) throw usage_error("retrieve called with no candidate chunks");
    cues.validate();

    const std::vector<int> fan = fan_counts(candidates, cues);

    RetrievalOutcome out;
    out.per_chunk.reserve(candidates.size());
    size_t best = 0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        ActivationBreakdown b = total_activation(candidates[i], cues, point, constants, now, fan, rng);
        out.per_chunk.emplace_back(candidates[i].id, b);
        if (out.per_chunk[i].second.total > out.per_chunk[best].second.total) best = i;
    }

    const double top = out.per_chunk[best].second.total;
    if (top >= constants.threshold) {
        out.winner = candidates[best].id;
        out.latency = retrieval_latency(top, constants.latency_factor);
    } else {
        out.winner.reset();
        out.latency = retrieval_latency(constants.threshold, constants.latency_factor);
    }
    return out;
}

}  // namespace cbr
