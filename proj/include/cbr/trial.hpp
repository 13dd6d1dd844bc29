#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cbr/activation.hpp"
#include "cbr/schedule.hpp"

namespace cbr {

/// Log entry for one retrieve event of a trial.
struct RetrievalRecord {
    std::string label;
    std::string target;
    bool scored = false;
    std::optional<std::string> winner;
    double latency = 0.0;
    std::vector<std::pair<std::string, ActivationBreakdown>> breakdowns;
};

struct TrialOutcome {
    bool scored_correct = false;
    bool scored_failed = false;
    double total_time = 0.0;
    std::vector<RetrievalRecord> retrieval_log;
};

/// Runs one trial of a schedule: advances the clock per heard word, firing
/// and retrieval latency; executes each retrieval against every chunk
/// encoded so far. The scored retrieval decides correctness; a failed scored
/// retrieval counts as incorrect.
inline TrialOutcome run_trial(const SentenceSchedule& schedule, const ParameterPoint& point,
                              const RetrievalConstants& constants, RandomStream& rng) {
    point.validate();
    constants.validate();

    TrialOutcome outcome;
    double clock = 0.0;
    std::vector<Chunk> memory;

    for (const auto& ev : schedule.events) {
        if (std::holds_alternative<HearWord>(ev)) {
            clock += schedule.word_duration;
        } else if (const auto* enc = std::get_if<EncodeChunk>(&ev)) {
            Chunk c = enc->chunk;
            c.encoded_at = clock;
            memory.push_back(std::move(c));
        } else if (const auto* fire = std::get_if<FireProductions>(&ev)) {
            clock += static_cast<double>(fire->count) * point.dat;
        } else if (const auto* ret = std::get_if<Retrieve>(&ev)) {
            RetrievalOutcome r = retrieve(memory, ret->cues, point, constants, clock, rng);
            clock += r.latency;
            if (ret->scored) {
                outcome.scored_failed = !r.success();
                outcome.scored_correct = r.success() && *r.winner == ret->target;
            }
            outcome.retrieval_log.push_back(RetrievalRecord{ret->label, ret->target, ret->scored,
                                                            std::move(r.winner), r.latency,
                                                            std::move(r.per_chunk)});
        }
    }
    outcome.total_time = clock;
    return outcome;
}

}  // namespace cbr
