#include "cogspeech/chat.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace cogspeech::chat {
namespace {

constexpr char kBullet = '\x15';

constexpr std::array<std::string_view, 8> kFillers = {"um", "uh", "er", "erm", "ah", "hm", "hmm", "mm"};

bool is_control_char(char c) {
    switch (c) {
        case '&': case '[': case ']': case '<': case '>': case '@': case '+':
        case '(': case ')': case ':': case '^': case '/': case '*': case '%':
        case kBullet: case '"':
            return true;
        default:
            return false;
    }
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::optional<std::pair<std::int64_t, std::int64_t>> parse_timecode(std::string_view s) {
    const auto us = s.find('_');
    if (us == std::string_view::npos) return std::nullopt;
    const auto a = s.substr(0, us);
    const auto b = s.substr(us + 1);
    if (!all_digits(a) || !all_digits(b)) return std::nullopt;
    return std::make_pair(std::stoll(std::string(a)), std::stoll(std::string(b)));
}

bool is_terminator(std::string_view s) {
    if (s == "." || s == "?" || s == "!") return true;
    if (s.size() >= 2 && s.front() == '+') {
        const char last = s.back();
        return last == '.' || last == '?' || last == '!';
    }
    return false;
}

std::string clean_word(std::string_view s, bool& neologism) {
    neologism = false;
    const auto at = s.find('@');
    if (at != std::string_view::npos) {
        neologism = s.substr(at) == "@n" || s.substr(at) == "@u";
        s = s.substr(0, at);
    }
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (is_control_char(c)) continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

// Lexical items produced by the first scanning pass over a tier body.
struct Item {
    enum Kind { Word, GroupOpen, GroupClose, Annotation } kind;
    std::string text;
};

std::vector<Item> scan(std::string_view body, std::size_t line_no) {
    std::vector<Item> items;
    std::size_t i = 0;
    while (i < body.size()) {
        const char c = body[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '[') {
            const auto close = body.find(']', i);
            if (close == std::string_view::npos) throw ParseError("unterminated '[' annotation on line " + std::to_string(line_no), line_no);
            items.push_back({Item::Annotation, trim(body.substr(i + 1, close - i - 1))});
            i = close + 1;
            continue;
        }
        if (c == '<') {
            items.push_back({Item::GroupOpen, {}});
            ++i;
            continue;
        }
        if (c == '>') {
            items.push_back({Item::GroupClose, {}});
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < body.size() && !std::isspace(static_cast<unsigned char>(body[j])) && body[j] != '[' &&
               body[j] != '>' && !(body[j] == '<' && j > i)) {
            ++j;
        }
        items.push_back({Item::Word, std::string(body.substr(i, j - i))});
        i = j;
    }
    return items;
}

}  // namespace

bool is_filler_word(std::string_view w) {
    return std::find(kFillers.begin(), kFillers.end(), w) != kFillers.end();
}

std::vector<std::string> Utterance::words() const {
    std::vector<std::string> out;
    for (const auto& t : tokens)
        if (t.is_word()) out.push_back(t.normalized);
    return out;
}

int Utterance::filler_count() const {
    return static_cast<int>(std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.is_filler; }));
}

Utterance parse_tier_body(std::string_view speaker, std::string_view body, std::size_t line_no) {
    Utterance u;
    u.speaker = std::string(speaker);
    u.raw = trim(body);

    // Bullet time codes: \x15start_end\x15.
    std::string text;
    text.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == kBullet) {
            const auto close = body.find(kBullet, i + 1);
            if (close == std::string_view::npos) throw ParseError("unterminated time-code bullet on line " + std::to_string(line_no), line_no);
            const auto tc = parse_timecode(body.substr(i + 1, close - i - 1));
            if (!tc) throw ParseError("malformed time code on line " + std::to_string(line_no), line_no);
            u.start_ms = tc->first;
            u.end_ms = tc->second;
            i = close;
            text.push_back(' ');
            continue;
        }
        text.push_back(body[i]);
    }

    const auto items = scan(text, line_no);
    std::vector<std::size_t> group_starts;
    std::optional<std::pair<std::size_t, std::size_t>> last_group;
    bool last_was_word = false;

    auto count_words = [&](std::size_t b, std::size_t e) {
        int n = 0;
        for (std::size_t k = b; k < e; ++k) n += u.tokens[k].is_word() ? 1 : 0;
        return n;
    };

    for (const auto& item : items) {
        switch (item.kind) {
            case Item::GroupOpen:
                group_starts.push_back(u.tokens.size());
                last_group.reset();
                last_was_word = false;
                break;
            case Item::GroupClose:
                if (group_starts.empty()) throw ParseError("unbalanced '>' on line " + std::to_string(line_no), line_no);
                last_group = std::make_pair(group_starts.back(), u.tokens.size());
                group_starts.pop_back();
                last_was_word = false;
                break;
            case Item::Annotation: {
                const auto& a = item.text;
                if (a == "/" || a == "//" || a == "///") {
                    if (last_group) {
                        u.retraced_words += count_words(last_group->first, last_group->second);
                        u.tokens.erase(u.tokens.begin() + static_cast<std::ptrdiff_t>(last_group->first),
                                       u.tokens.begin() + static_cast<std::ptrdiff_t>(last_group->second));
                    } else if (last_was_word && !u.tokens.empty()) {
                        u.retraced_words += u.tokens.back().is_word() ? 1 : 0;
                        u.tokens.pop_back();
                    }
                } else if (a.size() > 1 && a[0] == ':' && last_was_word && !u.tokens.empty()) {
                    // "[: target]" replaces the preceding word form.
                    bool neo = false;
                    auto repl = clean_word(trim(a.substr(1)), neo);
                    if (!repl.empty()) {
                        u.tokens.back().normalized = repl;
                        u.tokens.back().is_nonword = false;
                    }
                }
                last_group.reset();
                last_was_word = false;
                break;
            }
            case Item::Word: {
                last_group.reset();
                last_was_word = false;
                std::string_view w = item.text;
                if (const auto tc = parse_timecode(w); tc && &item == &items.back()) {
                    if (tc->second < tc->first) throw ParseError("time code end precedes start on line " + std::to_string(line_no), line_no);
                    u.start_ms = tc->first;
                    u.end_ms = tc->second;
                    break;
                }
                if (w == "(.)" || w == "(..)" || w == "(...)") {
                    ++u.pause_markers;
                    break;
                }
                if (is_terminator(w)) {
                    u.tokens.push_back({std::string(w), std::string(1, w.back()), false, false, true});
                    break;
                }
                if (w.front() == '+' || w.front() == '0' || w == "," || w == ";" || w == ":" || w == "‡" || w == "„") break;
                if (w.front() == '&') {
                    std::string_view rest = w.substr(1);
                    if (!rest.empty() && rest.front() == '-') rest.remove_prefix(1);
                    else if (!rest.empty() && (rest.front() == '=' || rest.front() == '+' || rest.front() == '~')) break;
                    const auto norm = to_lower(rest);
                    if (w.size() > 1 && w[1] == '-') {
                        u.tokens.push_back({std::string(w), norm, true, false, false});
                        last_was_word = true;
                    } else if (is_filler_word(norm)) {
                        u.tokens.push_back({std::string(w), norm, true, false, false});
                        last_was_word = true;
                    }
                    break;
                }
                // Terminator glued to the final word ("cookies.").
                std::string_view term;
                if (w.size() > 1 && (w.back() == '.' || w.back() == '?' || w.back() == '!') &&
                    std::isalpha(static_cast<unsigned char>(w[w.size() - 2]))) {
                    term = w.substr(w.size() - 1);
                    w.remove_suffix(1);
                }
                bool neologism = false;
                const auto norm = clean_word(w, neologism);
                if (!norm.empty()) {
                    Token t{std::string(w), norm, false, false, false};
                    if (norm == "xxx" || norm == "yyy" || norm == "www" || neologism) t.is_nonword = true;
                    else if (is_filler_word(norm)) t.is_filler = true;
                    u.tokens.push_back(std::move(t));
                    last_was_word = true;
                }
                if (!term.empty()) {
                    u.tokens.push_back({std::string(term), std::string(term), false, false, true});
                    last_was_word = false;
                }
                break;
            }
        }
    }
    if (u.start_ms && u.end_ms && *u.end_ms < *u.start_ms)
        throw ParseError("time code end precedes start on line " + std::to_string(line_no), line_no);
    return u;
}

Transcript parse_chat(std::string_view text, std::string id) {
    Transcript t;
    t.id = std::move(id);

    // Join continuation lines (leading tab/space) onto the preceding tier.
    struct Line {
        std::string text;
        std::size_t number;
    };
    std::vector<Line> lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        if (raw.size() >= 3 && static_cast<unsigned char>(raw[0]) == 0xEF && static_cast<unsigned char>(raw[1]) == 0xBB &&
            static_cast<unsigned char>(raw[2]) == 0xBF)
            raw.remove_prefix(3);
        if (trim(raw).empty()) continue;
        if (raw.front() == '\t' || raw.front() == ' ') {
            if (lines.empty()) throw ParseError("continuation line without a tier on line " + std::to_string(line_no), line_no);
            lines.back().text += ' ';
            lines.back().text += trim(raw);
            continue;
        }
        lines.push_back({std::string(raw), line_no});
        if (nl == text.size()) break;
    }

    for (const auto& line : lines) {
        const std::string_view s = line.text;
        switch (s.front()) {
            case '@': {
                if (t.id.empty() && s.rfind("@Media:", 0) == 0) {
                    auto fields = split(trim(s.substr(7)), ',');
                    if (!fields.empty()) t.id = trim(fields[0]);
                }
                break;
            }
            case '%':
                break;
            case '*': {
                const auto colon = s.find(':');
                if (colon == std::string_view::npos || colon == 1)
                    throw ParseError("malformed tier line " + std::to_string(line.number), line.number);
                const auto code = s.substr(1, colon - 1);
                if (!std::all_of(code.begin(), code.end(), [](unsigned char c) { return std::isalnum(c); }))
                    throw ParseError("malformed tier code on line " + std::to_string(line.number), line.number);
                t.utterances.push_back(parse_tier_body(code, s.substr(colon + 1), line.number));
                break;
            }
            default:
                throw ParseError("unexpected line " + std::to_string(line.number), line.number);
        }
    }
    return t;
}

std::vector<Utterance> participant_utterances(const Transcript& t, std::string_view code) {
    std::vector<Utterance> out;
    for (const auto& u : t.utterances)
        if (u.speaker == code) out.push_back(u);
    return out;
}

std::vector<Interval> merge_intervals(std::vector<Interval> intervals) {
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.start_ms < b.start_ms || (a.start_ms == b.start_ms && a.end_ms < b.end_ms); });
    std::vector<Interval> out;
    for (const auto& iv : intervals) {
        if (!out.empty() && iv.start_ms <= out.back().end_ms) out.back().end_ms = std::max(out.back().end_ms, iv.end_ms);
        else out.push_back(iv);
    }
    return out;
}

std::optional<std::vector<Interval>> participant_segments(const Transcript& t, std::string_view code) {
    std::vector<Interval> raw;
    for (const auto& u : t.utterances)
        if (u.speaker == code && u.start_ms && u.end_ms) raw.push_back({*u.start_ms, *u.end_ms});
    if (raw.empty()) return std::nullopt;
    return merge_intervals(std::move(raw));
}

std::string dump_transcript(const Transcript& t) {
    using nlohmann::json;
    std::ostringstream os;
    json head{{"id", t.id}};
    head["label"] = t.label ? json(static_cast<int>(*t.label)) : json(nullptr);
    head["mmse"] = t.mmse ? json(*t.mmse) : json(nullptr);
    head["audio_path"] = t.audio_path ? json(*t.audio_path) : json(nullptr);
    os << head.dump() << '\n';
    for (const auto& u : t.utterances) {
        json rec{{"speaker", u.speaker}, {"raw", u.raw}, {"retraced", u.retraced_words}, {"pauses", u.pause_markers}};
        rec["start_ms"] = u.start_ms ? json(*u.start_ms) : json(nullptr);
        rec["end_ms"] = u.end_ms ? json(*u.end_ms) : json(nullptr);
        json toks = json::array();
        for (const auto& tok : u.tokens)
            toks.push_back(json::array({tok.surface, tok.normalized, tok.is_filler, tok.is_nonword, tok.is_terminator}));
        rec["tokens"] = std::move(toks);
        os << rec.dump() << '\n';
    }
    return os.str();
}

Transcript parse_dump(std::string_view text) {
    using nlohmann::json;
    Transcript t;
    bool first = true;
    std::size_t line_no = 0;
    for (const auto& line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad dump record: ") + e.what(), line_no);
        }
        if (first) {
            t.id = rec.at("id").get<std::string>();
            if (!rec.at("label").is_null()) t.label = static_cast<Label>(rec["label"].get<int>());
            if (!rec.at("mmse").is_null()) t.mmse = rec["mmse"].get<int>();
            if (!rec.at("audio_path").is_null()) t.audio_path = rec["audio_path"].get<std::string>();
            first = false;
            continue;
        }
        Utterance u;
        u.speaker = rec.at("speaker").get<std::string>();
        u.raw = rec.at("raw").get<std::string>();
        u.retraced_words = rec.at("retraced").get<int>();
        u.pause_markers = rec.at("pauses").get<int>();
        if (!rec.at("start_ms").is_null()) u.start_ms = rec["start_ms"].get<std::int64_t>();
        if (!rec.at("end_ms").is_null()) u.end_ms = rec["end_ms"].get<std::int64_t>();
        for (const auto& tok : rec.at("tokens"))
            u.tokens.push_back({tok[0].get<std::string>(), tok[1].get<std::string>(), tok[2].get<bool>(), tok[3].get<bool>(),
                                tok[4].get<bool>()});
        t.utterances.push_back(std::move(u));
    }
    return t;
}

}  // namespace cogspeech::chat
