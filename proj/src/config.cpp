#include "cogspeech/config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <set>

namespace cogspeech::config {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
    }
}

void read_path(const json& obj, const char* key, std::optional<std::string>& out, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    std::string s;
    read(obj, key, s, where);
    out = s;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j, {"resources", "extraction", "model", "cv"}, "config");
    PipelineConfig cfg;
    cfg.base_dir = base_dir;

    if (j.contains("resources")) {
        const auto& r = j["resources"];
        reject_unknown(r,
                       {"norms", "dictionary", "demonstratives", "function_words", "light_verbs", "content_units",
                        "syntax_registry", "embeddings", "primary_embedding"},
                       "resources");
        auto& p = cfg.resources;
        read_path(r, "norms", p.norms, "resources");
        read_path(r, "dictionary", p.dictionary, "resources");
        read_path(r, "demonstratives", p.demonstratives, "resources");
        read_path(r, "function_words", p.function_words, "resources");
        read_path(r, "light_verbs", p.light_verbs, "resources");
        read_path(r, "content_units", p.content_units, "resources");
        read_path(r, "syntax_registry", p.syntax_registry, "resources");
        read(r, "primary_embedding", p.primary_embedding, "resources");
        if (r.contains("embeddings")) {
            if (!r["embeddings"].is_array()) throw ConfigError("resources.embeddings must be an array");
            for (const auto& e : r["embeddings"]) {
                reject_unknown(e, {"name", "path", "dim"}, "resources.embeddings[]");
                EmbeddingEntry entry;
                read(e, "name", entry.name, "resources.embeddings[]");
                read(e, "path", entry.path, "resources.embeddings[]");
                read(e, "dim", entry.dim, "resources.embeddings[]");
                if (entry.path.empty()) throw ConfigError("every embedding entry needs a path");
                if (entry.name.empty()) entry.name = fs::path(entry.path).stem().string();
                p.embeddings.push_back(std::move(entry));
            }
        }
    }

    if (j.contains("extraction")) {
        const auto& e = j["extraction"];
        const std::string w = "extraction";
        reject_unknown(e,
                       {"mattr_window", "vad_threshold", "min_pause_s", "long_pause_s", "window_ms", "hop_ms", "f0_min_hz",
                        "f0_max_hz", "voicing_threshold", "mel_filters", "restrict_audio_to_participant", "participant"},
                       w);
        auto& x = cfg.extraction;
        read(e, "mattr_window", x.richness.mattr_window, w);
        read(e, "vad_threshold", x.pauses.energy_fraction, w);
        read(e, "min_pause_s", x.pauses.min_pause_s, w);
        read(e, "long_pause_s", x.pauses.long_pause_s, w);
        read(e, "window_ms", x.frames.window_ms, w);
        read(e, "hop_ms", x.frames.hop_ms, w);
        read(e, "f0_min_hz", x.pitch.min_hz, w);
        read(e, "f0_max_hz", x.pitch.max_hz, w);
        read(e, "voicing_threshold", x.pitch.voicing_threshold, w);
        read(e, "mel_filters", x.mfcc.n_filters, w);
        read(e, "restrict_audio_to_participant", x.restrict_audio_to_participant, w);
        read(e, "participant", x.participant, w);
        x.frames.validate();
        if (x.richness.mattr_window == 0) throw ConfigError("extraction.mattr_window must be positive");
        if (!(x.pitch.min_hz > 0) || x.pitch.max_hz <= x.pitch.min_hz) throw ConfigError("extraction F0 range is invalid");
    }

    if (j.contains("model")) {
        const auto& m = j["model"];
        const std::string w = "model";
        reject_unknown(m,
                       {"kind", "k_features", "C", "gamma", "svm_tol", "n_trees", "max_features", "min_split", "min_leaf",
                        "bootstrap", "hidden", "epochs", "learning_rate", "nb_smoothing", "alpha", "standardize"},
                       w);
        auto& s = cfg.model;
        if (m.contains("kind")) {
            std::string k;
            read(m, "kind", k, w);
            s.kind = ml::model_from_name(k);
        }
        read(m, "k_features", s.k_features, w);
        read(m, "C", s.svm.C, w);
        read(m, "gamma", s.svm.gamma, w);
        read(m, "svm_tol", s.svm.tol, w);
        read(m, "n_trees", s.forest.n_trees, w);
        read(m, "max_features", s.forest.max_features, w);
        read(m, "min_split", s.forest.min_split, w);
        read(m, "min_leaf", s.forest.min_leaf, w);
        read(m, "bootstrap", s.forest.bootstrap, w);
        read(m, "hidden", s.mlp.hidden, w);
        read(m, "epochs", s.mlp.epochs, w);
        read(m, "learning_rate", s.mlp.learning_rate, w);
        read(m, "nb_smoothing", s.nb_smoothing, w);
        read(m, "alpha", s.alpha, w);
        if (m.contains("standardize") && !m["standardize"].is_null()) {
            bool b = true;
            read(m, "standardize", b, w);
            s.standardize = b;
        }
    }

    if (j.contains("cv")) {
        const auto& c = j["cv"];
        const std::string w = "cv";
        reject_unknown(c, {"seeds", "protocol", "k_grid", "alpha_grid", "bonferroni_tests"}, w);
        read(c, "seeds", cfg.cv.seeds, w);
        read(c, "protocol", cfg.cv.protocol, w);
        read(c, "k_grid", cfg.cv.k_grid, w);
        read(c, "alpha_grid", cfg.cv.alpha_grid, w);
        if (c.contains("bonferroni_tests") && !c["bonferroni_tests"].is_null()) {
            std::size_t n = 0;
            read(c, "bonferroni_tests", n, w);
            cfg.cv.bonferroni_tests = n;
        }
        eval::ProtocolSpec::parse(cfg.cv.protocol);
        if (cfg.cv.seeds.empty()) throw ConfigError("cv.seeds must not be empty");
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = features::read_text_file(path);
    } catch (const DataError&) {
        throw ConfigError("cannot read config file " + path);
    }
    auto dir = fs::path(path).parent_path();
    return parse_config(text, dir.empty() ? "." : dir.string());
}

PipelineConfig resolve_config(const std::optional<std::string>& path) {
    if (path) return load_config(*path);
    if (const char* root = std::getenv(kResourcesEnv)) {
        const auto candidate = fs::path(root) / "config.json";
        if (fs::exists(candidate)) return load_config(candidate.string());
        PipelineConfig cfg;
        cfg.base_dir = root;
        return cfg;
    }
    return PipelineConfig{};
}

std::string resolve_resource(const PipelineConfig& cfg, const std::string& path, const std::string& what) {
    const fs::path p(path);
    if (p.is_absolute()) {
        if (fs::exists(p)) return p.string();
        throw ConfigError(what + " not found at " + p.string());
    }
    const auto first = fs::path(cfg.base_dir.empty() ? "." : cfg.base_dir) / p;
    if (fs::exists(first)) return first.string();
    std::string tried = first.string();
    if (const char* root = std::getenv(kResourcesEnv)) {
        const auto second = fs::path(root) / p;
        if (fs::exists(second)) return second.string();
        tried += " or " + second.string();
    }
    throw ConfigError(what + " not found (looked in " + tried + "); fix the config path or set " + kResourcesEnv);
}

features::Resources load_resources(const PipelineConfig& cfg) {
    features::Resources res;
    const auto& p = cfg.resources;
    if (p.syntax_registry)
        res.productions = treebank::ProductionRegistry::load(resolve_resource(cfg, *p.syntax_registry, "syntax registry"));
    if (p.norms) res.norms = lexical::NormLexicon::load(resolve_resource(cfg, *p.norms, "norm lexicon"));
    if (p.dictionary) res.lists.dictionary = lexical::WordLists::load_list(resolve_resource(cfg, *p.dictionary, "dictionary"));
    if (p.demonstratives)
        res.lists.demonstratives = lexical::WordLists::load_list(resolve_resource(cfg, *p.demonstratives, "demonstrative list"));
    if (p.function_words)
        res.lists.function_words = lexical::WordLists::load_list(resolve_resource(cfg, *p.function_words, "function-word list"));
    if (p.light_verbs)
        res.lists.light_verbs = lexical::WordLists::load_list(resolve_resource(cfg, *p.light_verbs, "light-verb list"));
    if (p.content_units)
        res.units = semantics::ContentUnitLexicon::load(resolve_resource(cfg, *p.content_units, "content-unit lexicon"));
    if (!p.embeddings.empty() && p.embeddings.size() != semantics::kSpaceCount)
        throw ConfigError("exactly 5 embedding spaces are required, got " + std::to_string(p.embeddings.size()));
    for (const auto& e : p.embeddings)
        res.spaces.push_back(semantics::EmbeddingSpace::load(e.name, resolve_resource(cfg, e.path, "embedding " + e.name), e.dim));
    if (!res.spaces.empty() && p.primary_embedding >= res.spaces.size())
        throw ConfigError("resources.primary_embedding is out of range");
    res.primary_space = p.primary_embedding;
    res.options = cfg.extraction;
    return res;
}

std::string config_to_json(const PipelineConfig& cfg) {
    json j;
    auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
    const auto& p = cfg.resources;
    json emb = json::array();
    for (const auto& e : p.embeddings) emb.push_back({{"name", e.name}, {"path", e.path}, {"dim", e.dim}});
    j["resources"] = {{"norms", opt(p.norms)},
                      {"dictionary", opt(p.dictionary)},
                      {"demonstratives", opt(p.demonstratives)},
                      {"function_words", opt(p.function_words)},
                      {"light_verbs", opt(p.light_verbs)},
                      {"content_units", opt(p.content_units)},
                      {"syntax_registry", opt(p.syntax_registry)},
                      {"embeddings", emb},
                      {"primary_embedding", p.primary_embedding}};
    const auto& x = cfg.extraction;
    j["extraction"] = {{"mattr_window", x.richness.mattr_window},
                       {"vad_threshold", x.pauses.energy_fraction},
                       {"min_pause_s", x.pauses.min_pause_s},
                       {"long_pause_s", x.pauses.long_pause_s},
                       {"window_ms", x.frames.window_ms},
                       {"hop_ms", x.frames.hop_ms},
                       {"f0_min_hz", x.pitch.min_hz},
                       {"f0_max_hz", x.pitch.max_hz},
                       {"voicing_threshold", x.pitch.voicing_threshold},
                       {"mel_filters", x.mfcc.n_filters},
                       {"restrict_audio_to_participant", x.restrict_audio_to_participant},
                       {"participant", x.participant}};
    const auto& s = cfg.model;
    j["model"] = {{"kind", std::string(ml::model_name(s.kind))},
                  {"k_features", s.k_features},
                  {"C", s.svm.C},
                  {"gamma", s.svm.gamma},
                  {"svm_tol", s.svm.tol},
                  {"n_trees", s.forest.n_trees},
                  {"max_features", s.forest.max_features},
                  {"min_split", s.forest.min_split},
                  {"min_leaf", s.forest.min_leaf},
                  {"bootstrap", s.forest.bootstrap},
                  {"hidden", s.mlp.hidden},
                  {"epochs", s.mlp.epochs},
                  {"learning_rate", s.mlp.learning_rate},
                  {"nb_smoothing", s.nb_smoothing},
                  {"alpha", s.alpha},
                  {"standardize", s.standardize ? json(*s.standardize) : json(nullptr)}};
    j["cv"] = {{"seeds", cfg.cv.seeds},
               {"protocol", cfg.cv.protocol},
               {"k_grid", cfg.cv.k_grid},
               {"alpha_grid", cfg.cv.alpha_grid},
               {"bonferroni_tests", cfg.cv.bonferroni_tests ? json(*cfg.cv.bonferroni_tests) : json(nullptr)}};
    return j.dump(2) + "\n";
}

}  // namespace cogspeech::config
