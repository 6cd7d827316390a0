#include "cogspeech/config.hpp"
#include "cogspeech/eval.hpp"
#include "cogspeech/featureset.hpp"
#include "cogspeech/fixtures.hpp"
#include "cogspeech/ml.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace cogspeech;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kConvergence = 4 };

struct Common {
    std::optional<std::string> config;
    std::string seeds;
    std::string model;
    std::string protocol;
    std::optional<std::size_t> k_features;
    std::optional<double> alpha;
    std::string task = "classify";
};

void add_common(CLI::App* cmd, Common& c, bool with_model) {
    cmd->add_option("--config", c.config, "Pipeline config JSON (default: $COGSPEECH_RESOURCES/config.json)");
    cmd->add_option("--seed", c.seeds, "Seed or comma-separated seeds");
    if (!with_model) return;
    cmd->add_option("--model", c.model, "svm, nn, rf, nb, ols or ridge")
        ->check(CLI::IsMember({"svm", "nn", "rf", "nb", "ols", "ridge"}));
    cmd->add_option("--protocol", c.protocol, "loso or kfold:K");
    cmd->add_option("--k-features", c.k_features, "Number of ANOVA/F-selected features (0 = all)");
    cmd->add_option("--alpha", c.alpha, "Ridge penalty");
    cmd->add_option("--task", c.task, "classify or regress")->check(CLI::IsMember({"classify", "regress"}));
}

std::vector<std::uint64_t> parse_seeds(const std::string& text, const std::vector<std::uint64_t>& fallback) {
    if (text.empty()) return fallback;
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("invalid seed '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("--seed needs at least one value");
    return out;
}

config::PipelineConfig load_cfg(const Common& c) {
    auto cfg = config::resolve_config(c.config);
    if (!c.model.empty()) {
        cfg.model.kind = ml::model_from_name(c.model);
    }
    if (c.k_features) cfg.model.k_features = *c.k_features;
    if (c.alpha) cfg.model.alpha = *c.alpha;
    if (!c.protocol.empty()) cfg.cv.protocol = c.protocol;
    cfg.cv.seeds = parse_seeds(c.seeds, cfg.cv.seeds);
    return cfg;
}

eval::Task task_for(const Common& c, const ml::ModelSpec& spec) {
    // Regression models imply the regression task unless told otherwise.
    if (c.task == "classify" && ml::is_regression(spec.kind)) return eval::Task::Regress;
    return eval::task_from_name(c.task);
}

// --- extract ------------------------------------------------------------

int cmd_extract(const std::string& corpus_dir, const std::string& out, const Common& c, bool no_audio) {
    const auto cfg = load_cfg(c);
    if (!fs::is_directory(corpus_dir)) throw DataError("corpus directory not found: " + corpus_dir);
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(corpus_dir))
        if (e.is_regular_file() && e.path().extension() == ".cha") ids.push_back(e.path().stem().string());
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) throw DataError("no .cha transcripts in " + corpus_dir + " (expected corpus/{id}.cha)");

    const auto res = config::load_resources(cfg);
    const auto registry = features::FeatureRegistry::build(res.productions);

    std::map<std::string, std::pair<std::optional<int>, std::optional<double>>> targets;
    const fs::path labels_path = fs::path(corpus_dir) / "labels.csv";
    if (fs::exists(labels_path)) targets = features::parse_labels_csv(features::read_text_file(labels_path.string()));

    std::vector<features::FeatureVector> rows;
    std::vector<features::TranscriptRecord> texts;
    nlohmann::json prov = {{"registry_hash", registry.hash()}, {"feature_count", registry.size()}};
    nlohmann::json items = nlohmann::json::array();
    for (const auto& id : ids) {
        const fs::path base = fs::path(corpus_dir) / id;
        auto transcript = chat::parse_chat(features::read_text_file(base.string() + ".cha"), id);
        transcript.id = id;

        std::optional<std::vector<std::optional<treebank::ParseTree>>> trees;
        if (fs::exists(base.string() + ".trees"))
            trees = treebank::parse_trees_file(features::read_text_file(base.string() + ".trees"));
        std::optional<acoustics::AudioSignal> audio;
        if (!no_audio && fs::exists(base.string() + ".wav")) audio = acoustics::read_wav(base.string() + ".wav");

        auto fv = features::extract_all(transcript, trees ? &*trees : nullptr, audio ? &*audio : nullptr, res, registry);
        fv.id = id;

        nlohmann::json masks = nlohmann::json::array();
        for (const auto& m : fv.provenance) masks.push_back({{"block", m.block}, {"reason", m.reason}, {"count", m.count}});
        items.push_back({{"id", id},
                         {"masked", fv.masked_count()},
                         {"masks", masks},
                         {"has_trees", trees.has_value()},
                         {"has_audio", audio.has_value()},
                         {"audio_restricted", fv.audio_restricted}});

        std::optional<int> label;
        if (auto it = targets.find(id); it != targets.end()) label = it->second.first;
        texts.push_back({id, features::participant_text(transcript, cfg.extraction.participant), label});
        rows.push_back(std::move(fv));
    }
    prov["transcripts"] = items;

    const auto data = features::assemble(rows, registry, targets);
    features::write_matrix(out, data);
    features::write_file_atomic(out + ".provenance.json", prov.dump(2) + "\n");
    features::write_file_atomic(out + ".transcripts.csv", features::transcripts_to_csv(texts));

    std::size_t masked = 0;
    for (const auto& r : rows) masked += r.masked_count();
    std::cout << "extracted " << rows.size() << " x " << registry.size() << " features (" << masked
              << " masked values) -> " << out << "\n";
    return kOk;
}

// --- cv -----------------------------------------------------------------

int cmd_cv(const std::string& matrix, const std::string& out, const Common& c, bool grid) {
    const auto cfg = load_cfg(c);
    const auto data = features::read_matrix(matrix);
    auto spec = cfg.model;
    const auto task = task_for(c, spec);
    const auto protocol = eval::ProtocolSpec::parse(cfg.cv.protocol);

    if (!grid) {
        const auto report = eval::cross_validate(data, spec, task, protocol, cfg.cv.seeds);
        features::write_file_atomic(out, eval::report_to_csv(report));
        std::cout << eval::report_table(report);
        return kOk;
    }

    const auto result = eval::grid_search(data, spec, task, protocol, cfg.cv.seeds, cfg.cv.k_grid, cfg.cv.alpha_grid);
    const auto& best = result.points[result.best];
    features::write_file_atomic(out, eval::report_to_csv(best.report));

    const std::string key = task == eval::Task::Classify ? "accuracy" : "rmse";
    std::string summary = "k_features,alpha," + key + "\n";
    for (const auto& p : result.points) {
        const auto it = p.report.mean.find(key);
        summary += std::to_string(p.spec.k_features) + "," + features::format_double(p.spec.alpha) + "," +
                   features::format_double(it != p.report.mean.end() && it->second ? *it->second : NAN) + "\n";
    }
    features::write_file_atomic(out + ".grid.csv", summary);
    nlohmann::json chosen = {{"model", std::string(ml::model_name(best.spec.kind))},
                             {"k_features", best.spec.k_features},
                             {"protocol", protocol.name()},
                             {"task", std::string(eval::task_name(task))}};
    if (best.spec.kind == ml::ModelKind::Ridge) chosen["alpha"] = best.spec.alpha;
    features::write_file_atomic(out + ".best.json", chosen.dump(2) + "\n");
    std::cout << "grid: " << result.points.size() << " points, best " << best.report.model << "\n";
    std::cout << eval::report_table(best.report);
    return kOk;
}

// --- train / predict ----------------------------------------------------

std::vector<double> targets_for(const features::Dataset& d, eval::Task task) {
    if (task == eval::Task::Classify) {
        if (!d.has_labels()) throw DataError("matrix has no labels for every row; cannot train a classifier");
        const auto y = d.label_vector();
        return {y.begin(), y.end()};
    }
    if (!d.has_mmse()) throw DataError("matrix has no MMSE for every row; cannot train a regressor");
    return d.mmse_vector();
}

int cmd_train(const std::string& matrix, const std::string& out, const Common& c) {
    const auto cfg = load_cfg(c);
    const auto data = features::read_matrix(matrix);
    const auto task = task_for(c, cfg.model);
    if ((task == eval::Task::Regress) != ml::is_regression(cfg.model.kind))
        throw ConfigError("model " + std::string(ml::model_name(cfg.model.kind)) + " does not fit task " +
                          std::string(eval::task_name(task)));
    const auto y = targets_for(data, task);
    nlohmann::json bundle = {{"format", "cogspeech-model-set"}, {"version", 1}, {"models", nlohmann::json::array()}};
    for (auto seed : cfg.cv.seeds) {
        auto spec = cfg.model;
        spec.seed = seed;
        const auto p = ml::Pipeline::fit(data.X, y, spec, data.feature_names);
        bundle["models"].push_back(nlohmann::json::parse(p.to_json()));
    }
    features::write_file_atomic(out, bundle.dump() + "\n");
    std::cout << "trained " << cfg.cv.seeds.size() << " model(s) -> " << out << "\n";
    return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& matrix, const std::string& out) {
    nlohmann::json bundle;
    try {
        bundle = nlohmann::json::parse(features::read_text_file(model_path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file is not valid JSON: " + std::string(e.what()));
    }
    std::vector<ml::Pipeline> models;
    if (bundle.value("format", "") == "cogspeech-model-set") {
        for (const auto& m : bundle.at("models")) models.push_back(ml::Pipeline::from_json(m.dump()));
    } else {
        models.push_back(ml::Pipeline::from_json(bundle.dump()));
    }
    if (models.empty()) throw DataError("model file holds no models");

    const auto data = features::read_matrix(matrix);
    const auto hash = features::names_hash(data.feature_names);
    for (const auto& m : models)
        if (m.registry_hash != hash)
            throw features::VersionError("feature registry mismatch: model " + m.registry_hash + ", matrix " + hash);

    const bool regress = ml::is_regression(models.front().spec().kind);
    std::vector<std::vector<double>> preds;
    for (const auto& m : models) preds.push_back(m.predict(data.X));

    std::vector<double> final(data.size(), 0.0);
    if (regress) {
        for (const auto& p : preds)
            for (std::size_t i = 0; i < p.size(); ++i) final[i] += p[i] / static_cast<double>(preds.size());
    } else if (preds.size() == 1) {
        final = preds.front();
    } else {
        std::vector<std::vector<int>> sets;
        for (const auto& p : preds) sets.emplace_back(p.begin(), p.end());
        const auto vote = eval::majority_vote(sets);
        final.assign(vote.begin(), vote.end());
    }

    std::string csv = "id,prediction";
    for (std::size_t s = 0; s < models.size(); ++s) csv += ",seed_" + std::to_string(models[s].spec().seed);
    csv += "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        csv += features::csv_escape(data.ids[i]) + "," + features::format_double(final[i]);
        for (const auto& p : preds) csv += "," + features::format_double(p[i]);
        csv += "\n";
    }
    features::write_file_atomic(out, csv);
    std::cout << "wrote " << data.size() << " predictions -> " << out << "\n";
    return kOk;
}

// --- stats / tsne -------------------------------------------------------

int cmd_stats(const std::string& matrix, const std::string& out, const Common& c) {
    const auto cfg = load_cfg(c);
    const auto data = features::read_matrix(matrix);
    if (!data.has_labels()) throw DataError("stats needs a label for every row");
    auto report = eval::feature_differentiation(data, cfg.cv.bonferroni_tests);
    if (data.has_mmse()) {
        const auto w = eval::loso_ridge_weights(data, cfg.model.alpha);
        for (std::size_t j = 0; j < w.size(); ++j) report.features[j].ridge_weight = w[j];
    }
    features::write_file_atomic(out, eval::stats_to_csv(report));
    const auto sig = report.significant_indices();
    std::cout << "tests: " << report.n_tests << ", Bonferroni threshold " << report.threshold << ", significant "
              << sig.size() << "\n";
    for (auto j : sig) {
        const auto& f = report.features[j];
        std::cout << "  " << f.name << "  AD " << (f.mean_ad ? *f.mean_ad : NAN) << "  non-AD "
                  << (f.mean_nonad ? *f.mean_nonad : NAN) << "  p " << (f.test.p ? *f.test.p : NAN) << "\n";
    }
    return kOk;
}

int cmd_tsne(const std::string& matrix, const std::string& out, std::optional<std::string> svg, const Common& c,
             bool significant_only, double perplexity, std::size_t iterations, double learning_rate) {
    const auto cfg = load_cfg(c);
    auto data = features::read_matrix(matrix);
    std::vector<std::size_t> cols(data.feature_names.size());
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
    if (significant_only) {
        if (!data.has_labels()) throw DataError("--significant-only needs a label for every row");
        cols = eval::feature_differentiation(data, cfg.cv.bonferroni_tests).significant_indices();
        if (cols.empty()) throw DataError("no feature passes the Bonferroni threshold; drop --significant-only");
    }
    const auto imputer = features::Imputer::fit(data.X);
    const auto X = imputer.apply(data.X).select_cols(cols);
    const auto sc = ml::Standardizer::fit(X);
    eval::TsneParams p;
    p.perplexity = perplexity;
    p.iterations = iterations;
    p.learning_rate = learning_rate;
    p.seed = cfg.cv.seeds.front();
    const auto result = eval::tsne_embed(sc.apply(X), p);
    features::write_file_atomic(out, eval::tsne_to_csv(result.Y, data.ids, data.labels));
    if (svg) features::write_file_atomic(*svg, eval::tsne_svg(result.Y, data.labels));
    std::cout << "t-SNE on " << cols.size() << " features, final KL " << result.kl_history.back() << " -> " << out << "\n";
    return kOk;
}

// --- fixtures / report --------------------------------------------------

int cmd_fixtures(const std::string& out_dir, std::size_t n_ad, std::size_t n_nonad, std::uint64_t seed) {
    fixtures::CorpusOptions opt;
    opt.n_ad = n_ad;
    opt.n_nonad = n_nonad;
    opt.seed = seed;
    const auto layout = fixtures::write_corpus(out_dir, opt);
    std::cout << "corpus: " << layout.corpus_dir << " (" << layout.ids.size() << " sessions)\n"
              << "config: " << layout.config_path << "\n";
    return kOk;
}

int cmd_fixture_matrix(const std::string& kind, const std::string& out, std::uint64_t seed) {
    features::Dataset d;
    if (kind == "discriminability") d = fixtures::discriminability_dataset(50, 10, 499, 0.75, seed);
    else if (kind == "planted") d = fixtures::planted_dataset(40, 13, 509, 1.25, seed);
    else if (kind == "regression") d = fixtures::regression_dataset(60, 20, 5, 0.5, seed);
    else d = fixtures::blobs_dataset(50, 10, 20.0, seed);
    features::write_matrix(out, d);
    std::cout << kind << " matrix " << d.size() << " x " << d.feature_names.size() << " -> " << out << "\n";
    return kOk;
}

int cmd_report_validate(const std::string& path) {
    const auto report = eval::report_from_csv(features::read_text_file(path));
    const auto problems = eval::validate_report(report, 1e-9);
    if (problems.empty()) {
        std::cout << "valid: " << report.predictions.size() << " predictions, " << report.seeds.size() << " seed(s)\n";
        return kOk;
    }
    for (const auto& p : problems) std::cerr << "invalid: " << p << "\n";
    return kData;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speech and transcript features for cognitive-impairment screening"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cogspeech 0.1.0");

    Common common;
    std::string in, out, model_path;
    std::optional<std::string> svg;
    bool grid = false, no_audio = false, significant_only = false;
    double perplexity = 30.0, learning_rate = 0.0;
    std::size_t iterations = 1000, n_ad = 6, n_nonad = 6;
    std::uint64_t fixture_seed = 7;
    std::string fixture_kind = "discriminability";

    auto* extract = app.add_subcommand("extract", "Extract the feature matrix from a corpus directory");
    extract->add_option("corpus", in, "Directory with {id}.cha, {id}.trees, {id}.wav and labels.csv")->required();
    extract->add_option("-o,--output", out, "Feature matrix CSV")->required();
    extract->add_flag("--no-audio", no_audio, "Ignore audio files");
    add_common(extract, common, false);

    auto* cv = app.add_subcommand("cv", "Cross-validate a model on a feature matrix");
    cv->add_option("matrix", in, "Feature matrix CSV")->required();
    cv->add_option("-o,--output", out, "CvReport CSV")->required();
    cv->add_flag("--grid", grid, "Search k (and alpha for ridge) over the configured grids");
    add_common(cv, common, true);

    auto* train = app.add_subcommand("train", "Fit one model per seed on the whole matrix");
    train->add_option("matrix", in, "Feature matrix CSV")->required();
    train->add_option("-o,--output", out, "Model JSON")->required();
    add_common(train, common, true);

    auto* predict = app.add_subcommand("predict", "Predict with a trained model (majority over seeds)");
    predict->add_option("model", model_path, "Model JSON")->required();
    predict->add_option("matrix", in, "Feature matrix CSV")->required();
    predict->add_option("-o,--output", out, "Predictions CSV")->required();

    auto* stats = app.add_subcommand("stats", "Per-feature group tests, MMSE correlation and ridge weights");
    stats->add_option("matrix", in, "Feature matrix CSV")->required();
    stats->add_option("-o,--output", out, "Stats CSV")->required();
    add_common(stats, common, true);

    auto* tsne = app.add_subcommand("tsne", "2-D t-SNE embedding of the feature matrix");
    tsne->add_option("matrix", in, "Feature matrix CSV")->required();
    tsne->add_option("-o,--output", out, "Coordinates CSV")->required();
    tsne->add_option("--svg", svg, "Scatter plot SVG");
    tsne->add_flag("--significant-only", significant_only, "Use Bonferroni-significant features only");
    tsne->add_option("--perplexity", perplexity, "Target perplexity");
    tsne->add_option("--iterations", iterations, "Gradient steps");
    tsne->add_option("--learning-rate", learning_rate, "Step size (0 = max(n / 12 / 4, 50))");
    add_common(tsne, common, false);

    auto* fx = app.add_subcommand("fixtures", "Synthetic test data");
    fx->require_subcommand(1);
    auto* fx_gen = fx->add_subcommand("generate", "Write the synthetic corpus and resources");
    fx_gen->add_option("out", out, "Output directory")->required();
    fx_gen->add_option("--n-ad", n_ad, "AD sessions");
    fx_gen->add_option("--n-nonad", n_nonad, "Non-AD sessions");
    fx_gen->add_option("--seed", fixture_seed, "Generator seed");
    auto* fx_mat = fx->add_subcommand("matrix", "Write a synthetic feature matrix");
    fx_mat->add_option("kind", fixture_kind, "discriminability, planted, regression or blobs")
        ->check(CLI::IsMember({"discriminability", "planted", "regression", "blobs"}));
    fx_mat->add_option("-o,--output", out, "Matrix CSV")->required();
    fx_mat->add_option("--seed", fixture_seed, "Generator seed");

    auto* rep = app.add_subcommand("report", "CvReport utilities");
    rep->require_subcommand(1);
    auto* rep_val = rep->add_subcommand("validate", "Check a CvReport CSV");
    rep_val->add_option("report", in, "CvReport CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*extract) return cmd_extract(in, out, common, no_audio);
        if (*cv) return cmd_cv(in, out, common, grid);
        if (*train) return cmd_train(in, out, common);
        if (*predict) return cmd_predict(model_path, in, out);
        if (*stats) return cmd_stats(in, out, common);
        if (*tsne) return cmd_tsne(in, out, svg, common, significant_only, perplexity, iterations, learning_rate);
        if (*fx_gen) return cmd_fixtures(out, n_ad, n_nonad, fixture_seed);
        if (*fx_mat) return cmd_fixture_matrix(fixture_kind, out, fixture_seed);
        if (*rep_val) return cmd_report_validate(in);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConvergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}
