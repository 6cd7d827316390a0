#pragma once

#include "cogspeech/eval.hpp"
#include "cogspeech/featureset.hpp"
#include "cogspeech/ml.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cogspeech::config {

inline constexpr const char* kResourcesEnv = "COGSPEECH_RESOURCES";

struct EmbeddingEntry {
    std::string name;
    std::string path;
    std::size_t dim = 0;  // 0 = infer from the file
};

struct ResourcePaths {
    std::optional<std::string> norms;
    std::optional<std::string> dictionary;
    std::optional<std::string> demonstratives;
    std::optional<std::string> function_words;
    std::optional<std::string> light_verbs;
    std::optional<std::string> content_units;
    std::optional<std::string> syntax_registry;
    std::vector<EmbeddingEntry> embeddings;
    std::size_t primary_embedding = 0;
};

struct CvOptions {
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    std::string protocol = "loso";
    std::vector<std::size_t> k_grid = eval::kDefaultKGrid;
    std::vector<double> alpha_grid = eval::kDefaultAlphaGrid;
    std::optional<std::size_t> bonferroni_tests;
};

struct PipelineConfig {
    std::string base_dir;  // relative resource paths resolve here first
    ResourcePaths resources;
    features::ExtractionOptions extraction;
    ml::ModelSpec model;
    CvOptions cv;
};

/// Parses a JSON config. Unknown keys at any level raise ConfigError.
PipelineConfig parse_config(std::string_view json_text, const std::string& base_dir = ".");
PipelineConfig load_config(const std::string& path);

/// Config from `path`, else `$COGSPEECH_RESOURCES/config.json`, else defaults.
PipelineConfig resolve_config(const std::optional<std::string>& path);

/// Resolves a resource path against the config directory, then the
/// COGSPEECH_RESOURCES root. Throws ConfigError naming both places when absent.
std::string resolve_resource(const PipelineConfig& cfg, const std::string& path, const std::string& what);

/// Loads every configured resource.
features::Resources load_resources(const PipelineConfig& cfg);

/// Canonical JSON with every key and its current value.
std::string config_to_json(const PipelineConfig& cfg);

}  // namespace cogspeech::config
