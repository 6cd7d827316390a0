#include "cogspeech/semantics.hpp"

#include "helpers.hpp"

#include <algorithm>

using namespace cogspeech;
using namespace cogspeech::semantics;

namespace {
std::vector<EmbeddingSpace> toy_spaces() {
    std::vector<EmbeddingSpace> spaces;
    for (int s = 0; s < 5; ++s) spaces.push_back(EmbeddingSpace::parse("s" + std::to_string(s), "boy 1 0\ncookie 0 1\nsteal 1 1\n"));
    return spaces;
}
}  // namespace

TEST_CASE("suffix stripping produces lemma candidates") {
    auto has = [](const std::vector<std::string>& v, const std::string& w) { return std::find(v.begin(), v.end(), w) != v.end(); };
    CHECK(has(lemma_candidates("Cookies"), "cookie"));
    CHECK(has(lemma_candidates("stealing"), "steal"));
    CHECK(has(lemma_candidates("running"), "run"));
    CHECK(has(lemma_candidates("washed"), "wash"));
    CHECK(has(lemma_candidates("ladies"), "lady"));
}

TEST_CASE("content-unit lexicon parsing and matching") {
    const auto lex = ContentUnitLexicon::parse("boy\tsubject\tboy,son\ncookie\tobject\tcookie\nsteal\taction\tsteal\n");
    CHECK(lex.units().size() == 3);
    CHECK(lex.count(UnitCategory::Subject) == 1);
    CHECK(lex.match("sons") == 0u);
    CHECK(lex.match("stealing") == 2u);
    CHECK_FALSE(lex.match("window"));
    CHECK_THROWS_AS(ContentUnitLexicon::parse("x\tanimal\tdog\n"), ParseError);
    CHECK_THROWS_AS(ContentUnitLexicon::parse("# only a comment\n"), ConfigError);
    CHECK(ContentUnitLexicon::builtin().units().size() > 10);
}

TEST_CASE("embedding text format") {
    const auto sp = EmbeddingSpace::parse("toy", "2 3\ncat 1 2 3\ndog 4 5 6\n");
    CHECK(sp.dim() == 3);
    CHECK(sp.size() == 2);
    REQUIRE(sp.find("dog"));
    CHECK((*sp.find("dog"))[2] == 6.0);
    CHECK_THROWS_AS(EmbeddingSpace::parse("toy", "cat 1 2 3\ndog 4 5\n"), ParseError);
    CHECK_THROWS_AS(EmbeddingSpace::parse("toy", "cat 1 x 3\n"), ParseError);
    CHECK_THROWS_AS(EmbeddingSpace::parse("toy", ""), ConfigError);
}

TEST_CASE("cosine helpers and utterance vectors") {
    CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(cosine_distance({1, 1}, {2, 2}) == doctest::Approx(0.0));
    const auto sp = toy_spaces()[0];
    const auto v = utterance_vector({"boy", "cookie", "zebra"}, sp);
    REQUIRE(v);
    CHECK((*v)[0] == doctest::Approx(0.5));
    CHECK_FALSE(utterance_vector({"zebra"}, sp));
}

TEST_CASE("coherence block on three utterances") {
    const auto spaces = toy_spaces();
    const auto f = coherence_features({{"boy"}, {"cookie"}, {"boy"}}, spaces, 0);
    REQUIRE(f.size() == kCoherenceCount);
    CHECK(*value_of(f, "coh_space1_avg_consecutive_dist") == doctest::Approx(1.0));
    CHECK(*value_of(f, "coh_space1_min_consecutive_dist") == doctest::Approx(1.0));
    CHECK(*value_of(f, "utt_frac_sim_below_0.5") == doctest::Approx(2.0 / 3.0));
    CHECK(*value_of(f, "utt_frac_sim_below_0") == doctest::Approx(0.0));
    CHECK(*value_of(f, "utt_avg_pair_dist") == doctest::Approx(2.0 / 3.0));
    CHECK(*value_of(f, "utt_min_pair_dist") == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("content-unit block counts and sizes") {
    const auto lex = ContentUnitLexicon::parse("boy\tsubject\tboy\ncookie\tobject\tcookie\nsteal\taction\tsteal\n");
    const std::vector<std::string> toks{"the", "boy", "stealing", "cookies", "boy"};
    const auto f = content_unit_features(toks, {toks}, lex, toy_spaces());
    REQUIRE(f.size() == kContentUnitCount);
    CHECK(content_unit_names().size() == kContentUnitCount);
    CHECK(coherence_names().size() == kCoherenceCount);
    CHECK(*value_of(f, "cu_distinct_to_total") == doctest::Approx(1.0));
    CHECK(*value_of(f, "cu_mentions_subject_per_token") == doctest::Approx(2.0 / 5.0));
    CHECK(*value_of(f, "cu_distinct_place_to_total") == doctest::Approx(0.0).scale(1.0));
    CHECK(*value_of(f, "cu_distinct_to_mentions") == doctest::Approx(3.0 / 4.0));
}
