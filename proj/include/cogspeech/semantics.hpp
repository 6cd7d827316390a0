#pragma once

#include "cogspeech/common.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cogspeech::semantics {

using Vector = std::vector<double>;

class EmbeddingSpace {
public:
    EmbeddingSpace(std::string name, std::size_t dim);

    /// Plain-text "word v1 ... vd" lines; an optional "count dim" header is skipped.
    /// The dimension is taken from the first vector when `dim` is 0.
    static EmbeddingSpace parse(std::string name, std::string_view text, std::size_t dim = 0);
    static EmbeddingSpace load(std::string name, const std::string& path, std::size_t dim = 0);

    void add(std::string_view word, Vector v);
    const Vector* find(std::string_view word) const;

    const std::string& name() const noexcept { return name_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return vectors_.size(); }

private:
    std::string name_;
    std::size_t dim_;
    std::unordered_map<std::string, Vector> vectors_;
};

enum class UnitCategory { Subject, Place, Object, Action };

struct ContentUnit {
    std::string name;
    UnitCategory category;
    std::set<std::string> lemmas;
};

class ContentUnitLexicon {
public:
    /// `unit<TAB>category<TAB>lemma1,lemma2,...`; throws ConfigError when empty.
    static ContentUnitLexicon parse(std::string_view tsv);
    static ContentUnitLexicon load(const std::string& path);
    static const ContentUnitLexicon& builtin();

    const std::vector<ContentUnit>& units() const noexcept { return units_; }
    /// Index of the unit a token refers to, after suffix stripping.
    std::optional<std::size_t> match(std::string_view token) const;
    std::size_t count(UnitCategory c) const;

private:
    std::vector<ContentUnit> units_;
    std::unordered_map<std::string, std::size_t> lemma_index_;
};

/// Candidate lemmas for a surface form via the suffix-stripping table.
std::vector<std::string> lemma_candidates(std::string_view word);

double cosine_similarity(const Vector& a, const Vector& b);
inline double cosine_distance(const Vector& a, const Vector& b) { return 1.0 - cosine_similarity(a, b); }

/// Mean of in-vocabulary token vectors; absent when none is in vocabulary.
std::optional<Vector> utterance_vector(const std::vector<std::string>& words, const EmbeddingSpace& space);

inline constexpr std::size_t kSpaceCount = 5;
inline constexpr std::size_t kCoherenceCount = 20;
inline constexpr std::size_t kContentUnitCount = 25;

std::vector<std::string> coherence_names(std::size_t n_spaces = kSpaceCount);
std::vector<std::string> content_unit_names(std::size_t n_spaces = kSpaceCount);

/// Local coherence (avg/max/min consecutive distance per space) followed by
/// the pairwise threshold fractions and distances on the primary space.
FeatureBlock coherence_features(const std::vector<std::vector<std::string>>& utterances,
                                const std::vector<EmbeddingSpace>& spaces, std::size_t primary);

/// Content-unit frequency features (10) and global coherence against the
/// content-unit centroid (3 per space).
FeatureBlock content_unit_features(const std::vector<std::string>& tokens,
                                   const std::vector<std::vector<std::string>>& utterances,
                                   const ContentUnitLexicon& lexicon, const std::vector<EmbeddingSpace>& spaces);

}  // namespace cogspeech::semantics
