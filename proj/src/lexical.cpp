#include "cogspeech/lexical.hpp"

#include "builtin_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cogspeech::lexical {
namespace {

constexpr std::array<std::string_view, kNormCount> kNormNames = {
    "imageability", "age_of_acquisition", "familiarity", "frequency", "valence", "arousal", "dominance"};

bool is_noun(const std::string& tag) { return tag.rfind("NN", 0) == 0; }
bool is_verb(const std::string& tag) { return tag.rfind("VB", 0) == 0; }
bool is_pronoun(const std::string& tag) { return tag == "PRP" || tag == "PRP$" || tag == "WP"; }

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, int> type_counts(const std::vector<std::string>& tokens) {
    std::map<std::string, int> counts;
    for (const auto& t : tokens) ++counts[t];
    return counts;
}

}  // namespace

std::string_view norm_name(Norm n) { return kNormNames[static_cast<std::size_t>(n)]; }

std::optional<Norm> norm_from_name(std::string_view name) {
    const auto lower = to_lower(name);
    for (std::size_t i = 0; i < kNormNames.size(); ++i)
        if (kNormNames[i] == lower) return static_cast<Norm>(i);
    if (lower == "aoa") return Norm::AgeOfAcquisition;
    return std::nullopt;
}

NormLexicon NormLexicon::parse(std::string_view tsv) {
    NormLexicon lex;
    std::size_t line_no = 0;
    for (const auto& line : split(tsv, '\n')) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        const auto fields = split(trim(line), '\t');
        if (fields.size() != 3) throw ParseError("norm lexicon line needs word, norm and value", line_no);
        const auto norm = norm_from_name(fields[1]);
        if (!norm) throw ParseError("unknown norm '" + fields[1] + "'", line_no);
        double v = 0;
        try {
            std::size_t used = 0;
            v = std::stod(fields[2], &used);
            if (used != fields[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("bad norm value '" + fields[2] + "'", line_no);
        }
        lex.set(fields[0], *norm, v);
    }
    return lex;
}

NormLexicon NormLexicon::load(const std::string& path) { return parse(read_file(path)); }

void NormLexicon::set(std::string_view word, Norm norm, double value) {
    entries_[to_lower(word)][static_cast<std::size_t>(norm)] = value;
}

std::optional<double> NormLexicon::lookup(std::string_view word, Norm norm) const {
    auto it = entries_.find(to_lower(word));
    if (it == entries_.end()) return std::nullopt;
    return it->second[static_cast<std::size_t>(norm)];
}

std::set<std::string> WordLists::parse_list(std::string_view text) {
    std::set<std::string> out;
    for (const auto& line : split(text, '\n')) {
        auto w = trim(line);
        if (!w.empty() && w[0] != '#') out.insert(to_lower(w));
    }
    return out;
}

std::set<std::string> WordLists::load_list(const std::string& path) { return parse_list(read_file(path)); }

WordLists WordLists::builtin() {
    WordLists lists;
    lists.demonstratives = parse_list(detail::kDemonstrativesText);
    lists.function_words = parse_list(detail::kFunctionWordsText);
    lists.light_verbs = parse_list(detail::kLightVerbsText);
    return lists;
}

std::vector<std::string> richness_names() {
    return {"lex_ttr", "lex_mattr", "lex_msttr", "lex_brunet", "lex_honore", "lex_hapax_proportion"};
}

std::vector<std::string> norm_feature_names() {
    std::vector<std::string> names;
    auto scopes = {"all", "noun", "verb"};
    for (std::size_t i = 0; i < 4; ++i)
        for (const char* s : scopes) names.push_back("norm_" + std::string(kNormNames[i]) + "_" + s);
    for (std::size_t i = 4; i < kNormCount; ++i)
        for (const char* s : scopes) names.push_back("sentiment_" + std::string(kNormNames[i]) + "_" + s);
    return names;
}

std::vector<std::string> category_names() {
    return {"cat_demonstratives",  "cat_function_words",     "cat_light_verbs",       "cat_inflected_verbs",
            "cat_propositions",    "ratio_noun_noun_verb",   "ratio_noun_verb",       "ratio_pronoun_noun_pronoun",
            "len_avg_word_letters", "invalid_word_proportion", "rate_words_per_second", "rate_syllables_per_second"};
}

double type_token_ratio(const std::vector<std::string>& tokens) {
    if (tokens.empty()) return 0.0;
    return static_cast<double>(type_counts(tokens).size()) / static_cast<double>(tokens.size());
}

double moving_average_ttr(const std::vector<std::string>& tokens, std::size_t window) {
    const std::size_t n = tokens.size();
    if (n == 0) return 0.0;
    const std::size_t w = std::min(window, n);
    // Sliding counts: each window TTR is its distinct count over w.
    std::map<std::string, int> counts;
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < w; ++i)
        if (counts[tokens[i]]++ == 0) ++distinct;
    double sum = static_cast<double>(distinct);
    std::size_t windows = 1;
    for (std::size_t i = w; i < n; ++i) {
        if (--counts[tokens[i - w]] == 0) --distinct;
        if (counts[tokens[i]]++ == 0) ++distinct;
        sum += static_cast<double>(distinct);
        ++windows;
    }
    return sum / (static_cast<double>(windows) * static_cast<double>(w));
}

double mean_segmental_ttr(const std::vector<std::string>& tokens, std::size_t segment) {
    const std::size_t n = tokens.size();
    if (n == 0) return 0.0;
    if (n < segment) return type_token_ratio(tokens);
    double sum = 0.0;
    std::size_t segs = 0;
    for (std::size_t start = 0; start + segment <= n; start += segment) {
        std::vector<std::string> seg(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                     tokens.begin() + static_cast<std::ptrdiff_t>(start + segment));
        sum += type_token_ratio(seg);
        ++segs;
    }
    return sum / static_cast<double>(segs);
}

double brunet_index(double n_tokens, double n_types) { return std::pow(n_tokens, std::pow(n_types, -0.165)); }

MaybeValue honore_statistic(double n_tokens, double n_types, double n_hapax) {
    if (n_types <= 0 || n_hapax >= n_types) return std::nullopt;
    return 100.0 * std::log(n_tokens) / (1.0 - n_hapax / n_types);
}

FeatureBlock richness_features(const std::vector<std::string>& tokens, const RichnessConfig& cfg) {
    if (tokens.empty()) throw DataError("richness features need at least one word");
    const auto counts = type_counts(tokens);
    const double n = static_cast<double>(tokens.size());
    const double v = static_cast<double>(counts.size());
    const double v1 = static_cast<double>(std::count_if(counts.begin(), counts.end(), [](const auto& kv) { return kv.second == 1; }));
    const auto names = richness_names();
    return {{names[0], v / n},
            {names[1], moving_average_ttr(tokens, cfg.mattr_window)},
            {names[2], mean_segmental_ttr(tokens, cfg.mattr_window)},
            {names[3], brunet_index(n, v)},
            {names[4], honore_statistic(n, v, v1)},
            {names[5], v1 / n}};
}

FeatureBlock norm_features(const std::vector<TaggedToken>& tokens, const NormLexicon& lexicon) {
    const auto names = norm_feature_names();
    FeatureBlock out;
    auto scope_mean = [&](Norm norm, int scope) -> MaybeValue {
        double sum = 0.0;
        int hits = 0;
        for (const auto& t : tokens) {
            if (scope == 1 && !is_noun(t.tag)) continue;
            if (scope == 2 && !is_verb(t.tag)) continue;
            if (auto v = lexicon.lookup(t.word, norm)) {
                sum += *v;
                ++hits;
            }
        }
        if (hits == 0) return std::nullopt;
        return sum / hits;
    };
    std::size_t k = 0;
    for (std::size_t i = 0; i < kNormCount; ++i)
        for (int scope = 0; scope < 3; ++scope) out.push_back({names[k++], scope_mean(static_cast<Norm>(i), scope)});
    return out;
}

int count_syllables(std::string_view word) {
    auto is_vowel = [](char c) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
    };
    int groups = 0;
    bool in_group = false;
    bool any_alpha = false;
    for (char c : word) {
        if (!std::isalpha(static_cast<unsigned char>(c))) {
            in_group = false;
            continue;
        }
        any_alpha = true;
        const bool v = is_vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    if (!any_alpha) return 0;
    return std::max(groups, 1);
}

FeatureBlock category_and_ratio_features(const std::vector<TaggedToken>& tokens, const WordLists& lists,
                                         const Durations& durations) {
    const auto names = category_names();
    const double n = static_cast<double>(tokens.size());
    double demo = 0, func = 0, light = 0, inflected = 0, props = 0, nouns = 0, verbs = 0, prons = 0;
    double letters = 0, lettered_words = 0, invalid = 0, syllables = 0;
    for (const auto& t : tokens) {
        demo += lists.demonstratives.contains(t.word);
        func += lists.function_words.contains(t.word);
        light += lists.light_verbs.contains(t.word) && (t.tag.empty() || is_verb(t.tag));
        inflected += t.tag == "VBD" || t.tag == "VBG" || t.tag == "VBN" || t.tag == "VBZ";
        props += is_verb(t.tag) || t.tag.rfind("JJ", 0) == 0 || t.tag.rfind("RB", 0) == 0 || t.tag == "CC" || t.tag == "IN";
        nouns += is_noun(t.tag);
        verbs += is_verb(t.tag);
        prons += is_pronoun(t.tag);
        if (t.is_nonword || !lists.dictionary.contains(t.word)) invalid += 1;
        if (!t.is_nonword) {
            const auto l = std::count_if(t.word.begin(), t.word.end(), [](unsigned char c) { return std::isalpha(c); });
            if (l > 0) {
                letters += static_cast<double>(l);
                lettered_words += 1;
            }
            syllables += count_syllables(t.word);
        }
    }
    FeatureBlock out;
    out.push_back({names[0], safe_ratio(demo, n)});
    out.push_back({names[1], safe_ratio(func, n)});
    out.push_back({names[2], safe_ratio(light, n)});
    out.push_back({names[3], safe_ratio(inflected, n)});
    out.push_back({names[4], safe_ratio(props, n)});
    out.push_back({names[5], safe_ratio(nouns, nouns + verbs)});
    out.push_back({names[6], safe_ratio(nouns, verbs)});
    out.push_back({names[7], safe_ratio(prons, nouns + prons)});
    out.push_back({names[8], safe_ratio(letters, lettered_words)});
    out.push_back({names[9], safe_ratio(invalid, n)});
    out.push_back({names[10], durations.audio_seconds && *durations.audio_seconds > 0 ? MaybeValue(n / *durations.audio_seconds)
                                                                                       : MaybeValue()});
    out.push_back({names[11], durations.speech_seconds && *durations.speech_seconds > 0
                                  ? MaybeValue(syllables / *durations.speech_seconds)
                                  : MaybeValue()});
    return out;
}

}  // namespace cogspeech::lexical
