#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cbr/io.hpp"
#include "cbr/rng.hpp"
#include "cbr/types.hpp"

namespace cbr {

inline constexpr const char* kScoredLabel = "embedded-verb-subject";
inline constexpr const char* kReflexiveLabel = "reflexive-antecedent";
inline constexpr const char* kFillerGapLabel = "filler-gap-object";

/// One heard word; advances the clock by the schedule's word duration.
struct HearWord {
    std::string word;
};

/// Adds a chunk to declarative memory, stamped with the current clock.
struct EncodeChunk {
    Chunk chunk;  // encoded_at is assigned at run time
};

/// A burst of production firings, each consuming DAT seconds.
struct FireProductions {
    int count = 1;
};

/// A cue-based retrieval against everything encoded so far.
struct Retrieve {
    std::string label;
    std::string target;  // chunk id that counts as the correct outcome
    bool scored = false;
    CueSet cues;
};

using ScheduleEvent = std::variant<HearWord, EncodeChunk, FireProductions, Retrieve>;

/// A sentence type rendered as a timed script of events.
struct SentenceSchedule {
    SentenceType sentence_type = SentenceType::SR;
    double word_duration = 0.4;  // seconds per heard word
    std::vector<ScheduleEvent> events;

    bool reflexive() const {
        return sentence_type == SentenceType::SRRefl || sentence_type == SentenceType::ORRefl;
    }

    void validate() const;
};

inline void SentenceSchedule::validate() const {
    if (!(word_duration > 0.0)) throw usage_error("schedule word duration must be > 0");
    std::vector<std::string> encoded;
    int scored_count = 0;
    int reflexive_count = 0;
    for (const auto& ev : events) {
        if (const auto* enc = std::get_if<EncodeChunk>(&ev)) {
            enc->chunk.validate();
            for (const auto& id : encoded)
                if (id == enc->chunk.id)
                    throw usage_error("schedule encodes chunk id '" + enc->chunk.id + "' twice");
            encoded.push_back(enc->chunk.id);
        } else if (const auto* fire = std::get_if<FireProductions>(&ev)) {
            if (fire->count < 1) throw usage_error("fire count must be >= 1");
        } else if (const auto* ret = std::get_if<Retrieve>(&ev)) {
            ret->cues.validate();
            bool known = false;
            for (const auto& id : encoded) known = known || id == ret->target;
            if (!known)
                throw usage_error("retrieve '" + ret->label + "' targets chunk '" + ret->target +
                                  "' before it is encoded");
            if (ret->scored) {
                if (ret->label != kScoredLabel)
                    throw usage_error("the scored retrieve must be labeled '" +
                                      std::string(kScoredLabel) + "'");
                ++scored_count;
            }
            if (ret->label == kReflexiveLabel) {
                if (ret->scored) throw usage_error("the reflexive retrieve must be unscored");
                ++reflexive_count;
            }
        }
    }
    if (scored_count != 1)
        throw usage_error("schedule for " + to_string(sentence_type) + " has " +
                          std::to_string(scored_count) + " scored retrieves (expected exactly 1)");
    const int expected_refl = reflexive() ? 1 : 0;
    if (reflexive_count != expected_refl)
        throw usage_error("schedule for " + to_string(sentence_type) + " has " +
                          std::to_string(reflexive_count) + " reflexive retrieves (expected " +
                          std::to_string(expected_refl) + ")");
}

using ScheduleSet = std::map<SentenceType, SentenceSchedule>;

namespace detail {

inline Chunk np_chunk(std::string id, std::string case_value) {
    return Chunk{std::move(id),
                 {{"pos", "nominal"}, {"animate", "yes"}, {"case", std::move(case_value)}},
                 0.0};
}

inline CueSet subject_cues() {
    return CueSet{{{"pos", "nominal"}, {"animate", "yes"}, {"case", "subject"}}};
}

inline CueSet object_cues() {
    return CueSet{{{"pos", "nominal"}, {"animate", "yes"}, {"case", "object"}}};
}

inline CueSet antecedent_cues() {
    return CueSet{{{"pos", "nominal"}, {"animate", "yes"}}};
}

}  // namespace detail

/// Default script for one sentence type.
///
/// The scripts track the materials word by word ("The woman who hugged the
/// girl washed the boy / herself" and the object-relative counterparts).
/// Only the two relative-clause NPs are encoded as chunks; every word costs
/// one word duration plus three production firings. The scored retrieval is
/// the embedded verb looking for its subject. Object relatives first resolve
/// the filler-gap (object) dependency and spend two extra firings before the
/// scored retrieval, so the subject retrieval happens later and under a
/// fan-2 nominal competition.
inline SentenceSchedule build_schedule(SentenceType type) {
    using detail::antecedent_cues;
    using detail::np_chunk;
    using detail::object_cues;
    using detail::subject_cues;

    SentenceSchedule s;
    s.sentence_type = type;
    s.word_duration = 0.4;
    auto hear = [&s](const char* w) { s.events.emplace_back(HearWord{w}); };
    auto fire = [&s](int n) { s.events.emplace_back(FireProductions{n}); };
    auto encode = [&s](Chunk c) { s.events.emplace_back(EncodeChunk{std::move(c)}); };
    auto retr = [&s](std::string label, std::string target, bool scored, CueSet cues) {
        s.events.emplace_back(Retrieve{std::move(label), std::move(target), scored, std::move(cues)});
    };

    const bool object_relative = type == SentenceType::OR || type == SentenceType::ORRefl;
    const bool reflexive = type == SentenceType::SRRefl || type == SentenceType::ORRefl;

    hear("The");
    fire(3);
    hear("woman");
    encode(np_chunk("NP1", object_relative ? "object" : "subject"));
    fire(3);
    hear("who");
    fire(3);
    if (object_relative) {
        hear("the");
        fire(3);
        hear("girl");
        encode(np_chunk("NP2", "subject"));
        fire(3);
        hear("hugged");
        fire(3);
        retr(kFillerGapLabel, "NP1", false, object_cues());
        fire(2);
        retr(kScoredLabel, "NP2", true, subject_cues());
    } else {
        hear("hugged");
        fire(3);
        retr(kScoredLabel, "NP1", true, subject_cues());
        hear("the");
        fire(3);
        hear("girl");
        encode(np_chunk("NP2", "object"));
        fire(3);
    }
    hear("washed");
    fire(3);
    if (reflexive) {
        hear("herself");
        fire(3);
        retr(kReflexiveLabel, "NP1", false, antecedent_cues());
    } else {
        hear("the");
        fire(3);
        hear("boy");
        fire(3);
    }

    s.validate();
    return s;
}

inline ScheduleSet default_schedules() {
    ScheduleSet set;
    for (SentenceType t : kAllSentenceTypes) set.emplace(t, build_schedule(t));
    return set;
}

// ---------------------------------------------------------------------------
// Schedule file format: one "schedule <TYPE> ... end" block per sentence
// type. Within a block, one event per line:
//
//   word-duration <seconds>
//   hear <word>
//   encode <id> <feature>=<value> ...
//   fire <count>
//   retrieve <label> target=<id> scored=<yes|no> <feature>=<value> ...
//
// '#' starts a comment. The shipped default file is the reference document
// for the format.
// ---------------------------------------------------------------------------

inline std::string serialize_schedules(const ScheduleSet& set) {
    std::ostringstream out;
    out << "# Sentence schedules: encode/fire/retrieve scripts, one block per type.\n";
    for (const auto& [type, sched] : set) {
        out << "\nschedule " << to_string(type) << "\n";
        out << "word-duration " << format_param(sched.word_duration) << "\n";
        for (const auto& ev : sched.events) {
            if (const auto* hear = std::get_if<HearWord>(&ev)) {
                out << "hear " << hear->word << "\n";
            } else if (const auto* enc = std::get_if<EncodeChunk>(&ev)) {
                out << "encode " << enc->chunk.id;
                for (const auto& [k, v] : enc->chunk.features) out << " " << k << "=" << v;
                out << "\n";
            } else if (const auto* fire = std::get_if<FireProductions>(&ev)) {
                out << "fire " << fire->count << "\n";
            } else if (const auto* ret = std::get_if<Retrieve>(&ev)) {
                out << "retrieve " << ret->label << " target=" << ret->target
                    << " scored=" << (ret->scored ? "yes" : "no");
                for (const auto& [k, v] : ret->cues.cues) out << " " << k << "=" << v;
                out << "\n";
            }
        }
        out << "end\n";
    }
    return out.str();
}

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') break;
        tokens.push_back(tok);
    }
    return tokens;
}

inline std::pair<std::string, std::string> split_kv(const std::string& tok, int line_no) {
    auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size())
        throw usage_error("schedule file line " + std::to_string(line_no) +
                          ": expected key=value, got '" + tok + "'");
    return {tok.substr(0, eq), tok.substr(eq + 1)};
}

}  // namespace detail

inline ScheduleSet parse_schedules(std::istream& in) {
    ScheduleSet set;
    SentenceSchedule current;
    bool in_block = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = detail::split_tokens(line);
        if (tokens.empty()) continue;
        const std::string& kw = tokens[0];
        auto expect_args = [&](size_t n) {
            if (tokens.size() < n + 1)
                throw usage_error("schedule file line " + std::to_string(line_no) + ": '" + kw +
                                  "' needs at least " + std::to_string(n) + " argument(s)");
        };
        if (kw == "schedule") {
            if (in_block)
                throw usage_error("schedule file line " + std::to_string(line_no) +
                                  ": nested schedule block");
            expect_args(1);
            current = SentenceSchedule{};
            current.sentence_type = sentence_type_from_string(tokens[1]);
            in_block = true;
        } else if (!in_block) {
            throw usage_error("schedule file line " + std::to_string(line_no) + ": '" + kw +
                              "' outside a schedule block");
        } else if (kw == "end") {
            current.validate();
            if (!set.emplace(current.sentence_type, current).second)
                throw usage_error("schedule file line " + std::to_string(line_no) +
                                  ": duplicate block for " + to_string(current.sentence_type));
            in_block = false;
        } else if (kw == "word-duration") {
            expect_args(1);
            current.word_duration =
                parse_double(tokens[1], "schedule file line " + std::to_string(line_no));
        } else if (kw == "hear") {
            expect_args(1);
            current.events.emplace_back(HearWord{tokens[1]});
        } else if (kw == "fire") {
            expect_args(1);
            current.events.emplace_back(FireProductions{static_cast<int>(
                parse_long(tokens[1], "schedule file line " + std::to_string(line_no)))});
        } else if (kw == "encode") {
            expect_args(2);
            Chunk c;
            c.id = tokens[1];
            for (size_t i = 2; i < tokens.size(); ++i)
                c.features.push_back(detail::split_kv(tokens[i], line_no));
            current.events.emplace_back(EncodeChunk{std::move(c)});
        } else if (kw == "retrieve") {
            expect_args(3);
            Retrieve r;
            r.label = tokens[1];
            for (size_t i = 2; i < tokens.size(); ++i) {
                auto [k, v] = detail::split_kv(tokens[i], line_no);
                if (k == "target")
                    r.target = v;
                else if (k == "scored")
                    r.scored = (v == "yes" || v == "true");
                else
                    r.cues.cues.emplace_back(k, v);
            }
            if (r.target.empty())
                throw usage_error("schedule file line " + std::to_string(line_no) +
                                  ": retrieve without target=");
            current.events.emplace_back(std::move(r));
        } else {
            throw usage_error("schedule file line " + std::to_string(line_no) +
                              ": unknown keyword '" + kw + "'");
        }
    }
    if (in_block) throw usage_error("schedule file ends inside a schedule block (missing 'end')");
    if (set.empty()) throw usage_error("schedule file defines no schedules");
    return set;
}

inline ScheduleSet load_schedules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open schedule file '" + path + "'");
    return parse_schedules(in);
}

}  // namespace cbr
