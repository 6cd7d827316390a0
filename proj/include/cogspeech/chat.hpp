#pragma once

#include "cogspeech/common.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cogspeech::chat {

enum class Label { NonAD = 0, AD = 1 };

struct Token {
    std::string surface;
    std::string normalized;
    bool is_filler = false;
    bool is_nonword = false;
    bool is_terminator = false;

    /// True for tokens that count as words (not fillers, not terminators).
    bool is_word() const noexcept { return !is_filler && !is_terminator; }
    bool operator==(const Token&) const = default;
};

struct Utterance {
    std::string speaker;
    std::vector<Token> tokens;
    std::optional<std::int64_t> start_ms;
    std::optional<std::int64_t> end_ms;
    std::string raw;
    int retraced_words = 0;
    int pause_markers = 0;

    std::vector<std::string> words() const;
    int filler_count() const;
    bool operator==(const Utterance&) const = default;
};

struct Transcript {
    std::string id;
    std::vector<Utterance> utterances;
    std::optional<Label> label;
    std::optional<int> mmse;
    std::optional<std::string> audio_path;

    bool operator==(const Transcript&) const = default;
};

struct Interval {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    bool operator==(const Interval&) const = default;
};

inline constexpr std::string_view kDefaultParticipant = "PAR";

/// Parses the supported CHAT subset. Throws ParseError carrying the 1-based
/// line number on malformed tier lines or time codes.
Transcript parse_chat(std::string_view text, std::string id = {});

std::vector<Utterance> participant_utterances(const Transcript& t,
                                              std::string_view code = kDefaultParticipant);

/// Merged, sorted participant intervals. std::nullopt means no participant
/// utterance carries timing information.
std::optional<std::vector<Interval>> participant_segments(
    const Transcript& t, std::string_view code = kDefaultParticipant);

std::vector<Interval> merge_intervals(std::vector<Interval> intervals);

/// Canonical debug form: a header record followed by one JSON record per utterance.
std::string dump_transcript(const Transcript& t);
Transcript parse_dump(std::string_view text);

/// Tokenizes one main-tier body (the text after "*XXX:").
Utterance parse_tier_body(std::string_view speaker, std::string_view body, std::size_t line_no);

bool is_filler_word(std::string_view w);

}  // namespace cogspeech::chat
