#include "cogspeech/config.hpp"
#include "cogspeech/featureset.hpp"
#include "cogspeech/fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace cogspeech;
using namespace cogspeech::features;
namespace fs = std::filesystem;

namespace {
Dataset tiny_dataset() {
    Dataset d;
    d.feature_names = FeatureRegistry::standard().names();
    d.ids = {"A", "B"};
    d.X = Matrix(2, d.feature_names.size(), 0.5);
    d.X(0, 3) = std::numeric_limits<double>::quiet_NaN();
    d.X(1, 7) = std::numeric_limits<double>::infinity();
    d.X(1, 8) = -1.25e-7;
    d.labels = {1, 0};
    d.mmse = {std::nullopt, 29.0};
    return d;
}

const Resources& corpus_resources(std::string& corpus_dir) {
    static std::string dir;
    static Resources res;
    if (dir.empty()) {
        const auto root = fs::temp_directory_path() / "cogspeech_unit_corpus";
        fs::remove_all(root);
        const auto layout = fixtures::write_corpus(root.string(), {2, 2, 6, 7, 16000});
        res = config::load_resources(config::load_config(layout.config_path));
        dir = layout.corpus_dir;
    }
    corpus_dir = dir;
    return res;
}
}  // namespace

TEST_CASE("registry has the expected inventory") {
    const auto& reg = FeatureRegistry::standard();
    CHECK(reg.size() == kFeatureCount);
    CHECK(reg.group_count(Group::LexicoSyntactic) == kLexicoSyntacticCount);
    CHECK(reg.group_count(Group::Acoustic) == kAcousticCount);
    CHECK(reg.group_count(Group::Semantic) == kSemanticCount);
    CHECK(reg.hash().size() == 16);
    CHECK(reg.hash() == names_hash(reg.names()));
    const auto names = reg.names();
    CHECK(reg.index_of(names[42]) == 42u);
    CHECK_FALSE(reg.index_of("no_such_feature"));
}

TEST_CASE("matrix CSV round trip keeps missing and infinite values") {
    const auto d = tiny_dataset();
    const auto text = matrix_to_csv(d);
    CHECK(text.rfind("#cogspeech-matrix v1 registry=" + FeatureRegistry::standard().hash(), 0) == 0);
    const auto back = matrix_from_csv(text, &FeatureRegistry::standard());
    CHECK(back.ids == d.ids);
    CHECK(back.labels == d.labels);
    CHECK(back.mmse == d.mmse);
    CHECK(std::isnan(back.X(0, 3)));
    CHECK(back.X(1, 7) == std::numeric_limits<double>::infinity());
    CHECK(back.X(1, 8) == d.X(1, 8));
    CHECK(back.X(0, 0) == 0.5);
}

TEST_CASE("a stale registry hash is a version error") {
    auto text = matrix_to_csv(tiny_dataset());
    const auto pos = text.find("registry=") + 9;
    text[pos] = text[pos] == '0' ? '1' : '0';
    CHECK_THROWS_AS(matrix_from_csv(text), VersionError);

    Dataset small;
    small.feature_names = {"x", "y"};
    small.ids = {"A"};
    small.X = Matrix(1, 2, 1.0);
    small.labels = {1};
    small.mmse = {std::nullopt};
    const auto other = matrix_to_csv(small);
    CHECK_NOTHROW(matrix_from_csv(other));
    CHECK_THROWS_AS(matrix_from_csv(other, &FeatureRegistry::standard()), VersionError);
}

TEST_CASE("labels and transcripts sidecars") {
    const auto labels = parse_labels_csv("id,label,mmse\nS1,AD,20\nS2,cc,\nS3,1,25\nS4,0,30\n");
    CHECK(labels.at("S1").first == 1);
    CHECK(labels.at("S1").second == 20.0);
    CHECK(labels.at("S2").first == 0);
    CHECK_FALSE(labels.at("S2").second.has_value());
    CHECK(labels.at("S3").first == 1);

    const std::vector<TranscriptRecord> rows{{"S1", "the boy, \"quoted\" text", 1}, {"S2", "plain", std::nullopt}};
    const auto csv = transcripts_to_csv(rows);
    CHECK(csv.rfind("id,text,label\n", 0) == 0);
    const auto back = transcripts_from_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[0].text == rows[0].text);
    CHECK(back[0].label == 1);
    CHECK_FALSE(back[1].label.has_value());
    CHECK_THROWS_AS(transcripts_from_csv("name,text\nS1,x\n"), DataError);
}

TEST_CASE("imputer uses training medians") {
    Matrix X(3, 2);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    X(0, 0) = 1;
    X(1, 0) = 5;
    X(2, 0) = nan;
    X(0, 1) = nan;
    X(1, 1) = nan;
    X(2, 1) = nan;
    const auto imp = Imputer::fit(X, {"a", "b"});
    CHECK(imp.fill[0] == 3.0);
    CHECK(imp.fill[1] == 0.0);
    CHECK(imp.warnings.size() == 1);
    const auto Y = imp.apply(X);
    CHECK(Y(2, 0) == 3.0);
    CHECK(Y(0, 1) == 0.0);
}

TEST_CASE("extraction with and without audio") {
    std::string corpus;
    const auto& res = corpus_resources(corpus);
    const auto& reg = FeatureRegistry::standard();
    const auto text = read_text_file(corpus + "/S001.cha");
    const auto transcript = chat::parse_chat(text, "S001");
    const auto trees = treebank::parse_trees_file(read_text_file(corpus + "/S001.trees"));
    const auto audio = acoustics::read_wav(corpus + "/S001.wav");

    const auto full = extract_all(transcript, &trees, &audio, res, reg);
    CHECK(full.values.size() == kFeatureCount);
    CHECK(full.masked_count() == 0);
    CHECK(full.audio_restricted);

    const auto no_audio = extract_all(transcript, &trees, nullptr, res, reg);
    CHECK(no_audio.masked_count() == 189);
    for (std::size_t i = 0; i < reg.size(); ++i)
        if (reg.descriptors()[i].group == Group::Acoustic) CHECK_FALSE(no_audio.values[i].has_value());

    const auto no_trees = extract_all(transcript, nullptr, &audio, res, reg);
    CHECK(no_trees.masked_count() >= treebank::kSyntaxFeatureCount);
    CHECK_FALSE(no_trees.provenance.empty());
}

TEST_CASE("participant text and tag alignment") {
    const auto t = chat::parse_chat("*INV:\twhat do you see ?\n*PAR:\t&-um the boy falls .\n");
    CHECK(participant_text(t) == "the boy falls");
    const auto tree = treebank::parse_bracketed("(S (NP (DT the) (NN boy)) (VP (VBZ falls)) (. .))");
    CHECK(align_tags({"the", "boy", "falls"}, &tree) == std::vector<std::string>{"DT", "NN", "VBZ"});
    CHECK(align_tags({"the", "boy"}, nullptr) == std::vector<std::string>{"", ""});
}
