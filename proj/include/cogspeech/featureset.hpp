#pragma once

#include "cogspeech/acoustics.hpp"
#include "cogspeech/chat.hpp"
#include "cogspeech/common.hpp"
#include "cogspeech/lexical.hpp"
#include "cogspeech/semantics.hpp"
#include "cogspeech/treebank.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cogspeech::features {

enum class Group { LexicoSyntactic, Acoustic, Semantic };
std::string_view group_name(Group g);

struct Descriptor {
    std::string name;
    Group group;
    std::string module;
    std::string block;
};

inline constexpr std::size_t kFeatureCount = 509;
inline constexpr std::size_t kLexicoSyntacticCount = 297;
inline constexpr std::size_t kAcousticCount = 187;
inline constexpr std::size_t kSemanticCount = 25;

class FeatureRegistry {
public:
    /// Registry derived from a production registry (rule names depend on it).
    static FeatureRegistry build(const treebank::ProductionRegistry& productions);
    static const FeatureRegistry& standard();

    const std::vector<Descriptor>& descriptors() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    std::vector<std::string> names() const;
    std::optional<std::size_t> index_of(const std::string& name) const;
    std::size_t group_count(Group g) const;
    /// Indices of all features produced by `block`.
    std::vector<std::size_t> block_indices(const std::string& block) const;
    /// FNV-1a hash of the ordered names, as 16 hex digits.
    std::string hash() const { return hash_; }

private:
    std::vector<Descriptor> items_;
    std::map<std::string, std::size_t> index_;
    std::string hash_;
};

std::string names_hash(const std::vector<std::string>& names);

struct ExtractionOptions {
    lexical::RichnessConfig richness;
    acoustics::FrameConfig frames;
    acoustics::PitchConfig pitch;
    acoustics::MfccConfig mfcc;
    acoustics::PauseConfig pauses;
    bool restrict_audio_to_participant = true;
    std::string participant = std::string(chat::kDefaultParticipant);
};

struct Resources {
    treebank::ProductionRegistry productions = treebank::ProductionRegistry::builtin();
    lexical::NormLexicon norms;
    lexical::WordLists lists = lexical::WordLists::builtin();
    semantics::ContentUnitLexicon units = semantics::ContentUnitLexicon::builtin();
    std::vector<semantics::EmbeddingSpace> spaces;
    std::size_t primary_space = 0;
    ExtractionOptions options;
};

struct MaskRecord {
    std::string block;
    std::string reason;
    std::size_t count = 0;
};

struct FeatureVector {
    std::string id;
    std::vector<MaybeValue> values;  // registry order
    std::vector<MaskRecord> provenance;
    bool audio_restricted = false;

    std::size_t masked_count() const;
};

/// Extracts every registry feature. `trees` holds one optional parse per
/// participant utterance; either input may be absent, masking its blocks.
FeatureVector extract_all(const chat::Transcript& transcript,
                          const std::vector<std::optional<treebank::ParseTree>>* trees,
                          const acoustics::AudioSignal* audio, const Resources& resources,
                          const FeatureRegistry& registry);

/// POS tags aligned to the word tokens of one utterance (empty when unmatched).
std::vector<std::string> align_tags(const std::vector<std::string>& words, const treebank::ParseTree* tree);

/// Participant words joined by single spaces.
std::string participant_text(const chat::Transcript& t, std::string_view code = chat::kDefaultParticipant);

/// Feature matrix with optional targets. Missing values are NaN.
struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<std::string> ids;
    Matrix X;
    std::vector<std::optional<int>> labels;
    std::vector<std::optional<double>> mmse;

    std::size_t size() const noexcept { return ids.size(); }
    bool has_labels() const;
    bool has_mmse() const;
    std::vector<int> label_vector() const;
    std::vector<double> mmse_vector() const;
    /// Rows restricted to `idx`.
    Dataset subset(std::span<const std::size_t> idx) const;
    void validate() const;
};

/// Builds a dataset from extracted vectors and per-id targets.
Dataset assemble(const std::vector<FeatureVector>& rows, const FeatureRegistry& registry,
                 const std::map<std::string, std::pair<std::optional<int>, std::optional<double>>>& targets = {});

/// Per-column median of the non-missing training values.
struct Imputer {
    std::vector<double> fill;
    std::vector<std::string> warnings;

    static Imputer fit(const Matrix& X, const std::vector<std::string>& names = {});
    Matrix apply(const Matrix& X) const;
};

class VersionError : public DataError {
public:
    using DataError::DataError;
};

std::string matrix_to_csv(const Dataset& d);
/// Parses a matrix CSV. When `expected` is given the header must match its
/// names exactly. A hash that disagrees with the header is always an error.
Dataset matrix_from_csv(std::string_view text, const FeatureRegistry* expected = nullptr);
void write_matrix(const std::string& path, const Dataset& d);
Dataset read_matrix(const std::string& path, const FeatureRegistry* expected = nullptr);

/// `id,label,mmse` rows. Label accepts 1/0, AD/nonAD, cd/cc.
std::map<std::string, std::pair<std::optional<int>, std::optional<double>>> parse_labels_csv(std::string_view text);

struct TranscriptRecord {
    std::string id;
    std::string text;
    std::optional<int> label;
};
std::string transcripts_to_csv(const std::vector<TranscriptRecord>& rows);
std::vector<TranscriptRecord> transcripts_from_csv(std::string_view text);

/// RFC-4180 style field splitting (quoted fields, doubled quotes).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);
std::string format_double(double v);

/// Writes to a temp file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_text_file(const std::string& path);

}  // namespace cogspeech::features
