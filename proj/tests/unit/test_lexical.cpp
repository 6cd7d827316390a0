#include "cogspeech/lexical.hpp"

#include "helpers.hpp"

#include <cmath>

using namespace cogspeech;
using namespace cogspeech::lexical;

TEST_CASE("richness on a small sample") {
    const std::vector<std::string> toks{"a", "b", "a", "c"};
    const auto b = richness_features(toks, RichnessConfig{2});
    CHECK(*value_of(b, "lex_ttr") == doctest::Approx(0.75));
    // Windows ab, ba, ac are all distinct.
    CHECK(*value_of(b, "lex_mattr") == doctest::Approx(1.0));
    CHECK(*value_of(b, "lex_msttr") == doctest::Approx(1.0));
    CHECK(*value_of(b, "lex_brunet") == doctest::Approx(std::pow(4.0, std::pow(3.0, -0.165))));
    CHECK(*value_of(b, "lex_honore") == doctest::Approx(100.0 * std::log(4.0) / (1.0 - 2.0 / 3.0)));
    CHECK(*value_of(b, "lex_hapax_proportion") == doctest::Approx(0.5));
}

TEST_CASE("honore is missing when every word is a hapax") {
    const auto b = richness_features({"x", "y", "z"});
    CHECK_FALSE(value_of(b, "lex_honore").has_value());
    CHECK_THROWS_AS(richness_features({}), DataError);
}

TEST_CASE("mattr window larger than the text falls back to ttr") {
    const std::vector<std::string> toks{"a", "a", "b"};
    CHECK(moving_average_ttr(toks, 20) == doctest::Approx(type_token_ratio(toks)));
    CHECK(moving_average_ttr({"a", "a", "b", "b"}, 2) == doctest::Approx((1.0 + 2.0 + 1.0) / 6.0));
}

TEST_CASE("norm lexicon parse and per-scope means") {
    const auto lex = NormLexicon::parse("boy\timageability\t600\ncookie\timageability\t620\nfall\timageability\t400\n");
    CHECK(lex.size() == 3);
    CHECK_FALSE(lex.lookup("dog", Norm::Imageability));
    const std::vector<TaggedToken> toks{{"boy", "NN"}, {"cookie", "NN"}, {"fall", "VB"}, {"the", "DT"}};
    const auto b = norm_features(toks, lex);
    CHECK(b.size() == kNormFeatureCount);
    CHECK(*value_of(b, "norm_imageability_all") == doctest::Approx(540.0));
    CHECK(*value_of(b, "norm_imageability_noun") == doctest::Approx(610.0));
    CHECK(*value_of(b, "norm_imageability_verb") == doctest::Approx(400.0));
    CHECK_FALSE(value_of(b, "norm_familiarity_all").has_value());
    CHECK_THROWS_AS(NormLexicon::parse("boy\tshininess\t1\n"), ParseError);
}

TEST_CASE("category features and rates") {
    const auto lists = WordLists::builtin();
    const std::vector<TaggedToken> toks{{"this", "DT"}, {"boy", "NN"}, {"takes", "VBZ"}, {"the", "DT"}, {"cookie", "NN"}};
    const auto b = category_and_ratio_features(toks, lists, Durations{10.0, 2.5});
    CHECK(b.size() == kCategoryCount);
    CHECK(*value_of(b, "cat_demonstratives") == doctest::Approx(0.2));
    CHECK(*value_of(b, "ratio_noun_verb") == doctest::Approx(2.0));
    CHECK(*value_of(b, "len_avg_word_letters") == doctest::Approx((4 + 3 + 5 + 3 + 6) / 5.0));
    CHECK(*value_of(b, "rate_words_per_second") > 0.0);
    const auto no_audio = category_and_ratio_features(toks, lists);
    CHECK_FALSE(value_of(no_audio, "rate_words_per_second").has_value());
}

TEST_CASE("syllable counting") {
    CHECK(count_syllables("cookie") == 2);
    CHECK(count_syllables("the") == 1);
    CHECK(count_syllables("overflowing") >= 3);
}
