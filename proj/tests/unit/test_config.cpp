#include "cogspeech/config.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace cogspeech;
using namespace cogspeech::config;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("cogspeech_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}
}  // namespace

TEST_CASE("defaults and overrides") {
    const auto cfg = parse_config("{}");
    CHECK(cfg.cv.seeds == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(cfg.cv.protocol == "loso");
    CHECK(cfg.model.kind == ml::ModelKind::Svm);

    const auto c2 = parse_config(R"({"model": {"kind": "ridge", "alpha": 12, "k_features": 35},
                                     "extraction": {"mattr_window": 30}, "cv": {"seeds": [4], "protocol": "kfold:5"}})");
    CHECK(c2.model.kind == ml::ModelKind::Ridge);
    CHECK(c2.model.alpha == 12.0);
    CHECK(c2.model.k_features == 35);
    CHECK(c2.extraction.richness.mattr_window == 30);
    CHECK(c2.cv.seeds == std::vector<std::uint64_t>{4});
    CHECK(parse_config(config_to_json(c2)).model.alpha == 12.0);
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK(message_of([] { parse_config(R"({"model": {"kernel": "rbf"}})"); }).find("model.kernel") != std::string::npos);
    CHECK_THROWS_AS(parse_config(R"({"surprise": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"C": "big"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"cv": {"seeds": []}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"extraction": {"f0_min_hz": 300, "f0_max_hz": 100}})"), ConfigError);
}

TEST_CASE("resource paths resolve against the config directory, then the environment") {
    const auto dir = scratch("cfg");
    const auto env = scratch("env");
    write(dir / "norms.tsv", "boy\timageability\t600\n");
    write(env / "dict.txt", "boy\n");
    write(dir / "config.json", R"({"resources": {"norms": "norms.tsv", "dictionary": "dict.txt"}})");

    ::setenv(kResourcesEnv, env.c_str(), 1);
    const auto cfg = load_config((dir / "config.json").string());
    CHECK(fs::path(resolve_resource(cfg, "norms.tsv", "norms")) == dir / "norms.tsv");
    CHECK(fs::path(resolve_resource(cfg, "dict.txt", "dictionary")) == env / "dict.txt");
    const auto res = load_resources(cfg);
    CHECK(res.norms.size() == 1);
    CHECK(res.lists.dictionary.contains("boy"));

    const auto msg = message_of([&] { resolve_resource(cfg, "missing.txt", "embedding space1"); });
    CHECK(msg.find("embedding space1") != std::string::npos);
    CHECK(msg.find(kResourcesEnv) != std::string::npos);

    write(env / "config.json", R"({"model": {"kind": "nb"}})");
    CHECK(resolve_config(std::nullopt).model.kind == ml::ModelKind::Nb);
    ::unsetenv(kResourcesEnv);
    CHECK(resolve_config(std::nullopt).model.kind == ml::ModelKind::Svm);
    CHECK_THROWS_AS(load_config((dir / "absent.json").string()), ConfigError);
}

TEST_CASE("embedding spaces must come in a full set") {
    const auto dir = scratch("emb");
    write(dir / "a.txt", "boy 1 0\n");
    auto cfg = parse_config(R"({"resources": {"embeddings": [{"name": "a", "path": "a.txt"}]}})", dir.string());
    CHECK_THROWS_AS(load_resources(cfg), ConfigError);
}
