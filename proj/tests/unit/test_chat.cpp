#include "cogspeech/chat.hpp"

#include <doctest.h>

#include <algorithm>

using namespace cogspeech;

namespace {
const char* kSample =
    "@UTF8\n@Begin\n@Media:\tS042, audio\n"
    "*INV:\ttell me what you see . \x15" "0_1500\x15\n"
    "*PAR:\t&-um the boy <is taking> [/] is taking a cookie . \x15" "1500_4200\x15\n"
    "%mor:\tdet|the n|boy\n"
    "*PAR:\tthe (.) water xxx is overflowing ! \x15" "4000_6000\x15\n"
    "@End\n";
}

TEST_CASE("main tiers, fillers, retracing and terminators") {
    const auto t = chat::parse_chat(kSample);
    CHECK(t.id == "S042");
    REQUIRE(t.utterances.size() == 3);
    const auto& u = t.utterances[1];
    CHECK(u.speaker == "PAR");
    CHECK(u.filler_count() == 1);
    CHECK(u.retraced_words == 2);
    CHECK(u.words() == std::vector<std::string>{"the", "boy", "is", "taking", "a", "cookie"});
    CHECK(u.tokens.back().is_terminator);
    CHECK(u.start_ms == 1500);
    CHECK(u.end_ms == 4200);

    const auto& v = t.utterances[2];
    CHECK(v.pause_markers == 1);
    const auto words = v.words();
    CHECK(words.size() == 5);
    CHECK(std::count_if(v.tokens.begin(), v.tokens.end(), [](const chat::Token& k) { return k.is_nonword; }) == 1);
}

TEST_CASE("participant segments are merged and sorted") {
    const auto t = chat::parse_chat(kSample);
    const auto segs = chat::participant_segments(t);
    REQUIRE(segs);
    REQUIRE(segs->size() == 1);
    CHECK((*segs)[0] == chat::Interval{1500, 6000});
    CHECK(chat::participant_utterances(t).size() == 2);

    const auto untimed = chat::parse_chat("*PAR:\thello there .\n");
    CHECK_FALSE(chat::participant_segments(untimed).has_value());
}

TEST_CASE("merge_intervals joins overlaps and touching ranges") {
    const auto m = chat::merge_intervals({{50, 60}, {0, 10}, {10, 20}, {55, 70}});
    REQUIRE(m.size() == 2);
    CHECK(m[0] == chat::Interval{0, 20});
    CHECK(m[1] == chat::Interval{50, 70});
}

TEST_CASE("malformed input reports the line number") {
    try {
        chat::parse_chat("@Begin\n*PAR:\thello . \x15" "12_x\x15\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 2);
    }
    CHECK_THROWS_AS(chat::parse_chat("@Begin\nplain text line\n"), ParseError);
    CHECK_THROWS_AS(chat::parse_chat("*PAR:\thello . \x15" "900_100\x15\n"), ParseError);
}

TEST_CASE("dump round trip") {
    auto t = chat::parse_chat(kSample);
    t.label = chat::Label::AD;
    t.mmse = 21;
    const auto back = chat::parse_dump(chat::dump_transcript(t));
    CHECK(back == t);
}

TEST_CASE("continuation lines join the previous tier") {
    const auto t = chat::parse_chat("*PAR:\tthe boy\n\tis falling .\n");
    REQUIRE(t.utterances.size() == 1);
    CHECK(t.utterances[0].words().size() == 4);
}
