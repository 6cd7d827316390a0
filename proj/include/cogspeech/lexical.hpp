#pragma once

#include "cogspeech/common.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cogspeech::lexical {

enum class Norm { Imageability = 0, AgeOfAcquisition, Familiarity, Frequency, Valence, Arousal, Dominance };
inline constexpr std::size_t kNormCount = 7;

std::string_view norm_name(Norm n);
std::optional<Norm> norm_from_name(std::string_view name);

/// Word norms keyed by lowercase word. Absent entries stay absent.
class NormLexicon {
public:
    /// Reads `word<TAB>norm_name<TAB>value` lines.
    static NormLexicon parse(std::string_view tsv);
    static NormLexicon load(const std::string& path);

    void set(std::string_view word, Norm norm, double value);
    std::optional<double> lookup(std::string_view word, Norm norm) const;
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::unordered_map<std::string, std::array<std::optional<double>, kNormCount>> entries_;
};

struct WordLists {
    std::set<std::string> demonstratives;
    std::set<std::string> function_words;
    std::set<std::string> light_verbs;
    std::set<std::string> dictionary;

    /// One word per line, lowercased on load.
    static std::set<std::string> parse_list(std::string_view text);
    static std::set<std::string> load_list(const std::string& path);
    /// Built-in demonstrative, function-word and light-verb lists; empty dictionary.
    static WordLists builtin();
};

/// A word with its aligned POS tag (empty when the utterance has no parse).
struct TaggedToken {
    std::string word;
    std::string tag;
    bool is_nonword = false;
};

struct RichnessConfig {
    std::size_t mattr_window = 20;
};

inline constexpr std::size_t kRichnessCount = 6;
inline constexpr std::size_t kNormFeatureCount = 21;
inline constexpr std::size_t kCategoryCount = 12;

std::vector<std::string> richness_names();
std::vector<std::string> norm_feature_names();
std::vector<std::string> category_names();

double type_token_ratio(const std::vector<std::string>& tokens);
double moving_average_ttr(const std::vector<std::string>& tokens, std::size_t window);
double mean_segmental_ttr(const std::vector<std::string>& tokens, std::size_t segment);
double brunet_index(double n_tokens, double n_types);
MaybeValue honore_statistic(double n_tokens, double n_types, double n_hapax);

/// TTR, MATTR, mean segmental TTR, Brunet's W, Honore's R, hapax proportion.
/// Throws DataError on empty input.
FeatureBlock richness_features(const std::vector<std::string>& tokens, const RichnessConfig& cfg = {});

/// Means of the 7 norms over all words, nouns and verbs (21 values).
FeatureBlock norm_features(const std::vector<TaggedToken>& tokens, const NormLexicon& lexicon);

struct Durations {
    std::optional<double> audio_seconds;
    std::optional<double> speech_seconds;
};

/// Word-category proportions, noun ratios, word length, invalid words, rates.
FeatureBlock category_and_ratio_features(const std::vector<TaggedToken>& tokens, const WordLists& lists,
                                         const Durations& durations = {});

int count_syllables(std::string_view word);

}  // namespace cogspeech::lexical
