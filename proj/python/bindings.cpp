#include "cogspeech/config.hpp"
#include "cogspeech/eval.hpp"
#include "cogspeech/featureset.hpp"
#include "cogspeech/fixtures.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>

namespace py = pybind11;
using namespace cogspeech;

namespace {

py::array_t<double> to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto buf = out.mutable_unchecked<2>();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) buf(r, c) = m(r, c);
    return out;
}

Matrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ConfigError("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    auto buf = a.unchecked<2>();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = buf(r, c);
    return m;
}

py::dict dataset_dict(const features::Dataset& d) {
    py::dict out;
    out["ids"] = d.ids;
    out["feature_names"] = d.feature_names;
    out["X"] = to_numpy(d.X);
    out["labels"] = d.labels;
    out["mmse"] = d.mmse;
    return out;
}

py::dict metrics_dict(const eval::MetricMap& m) {
    py::dict out;
    for (const auto& [k, v] : m) out[py::str(k)] = v ? py::cast(*v) : py::none();
    return out;
}

py::dict extract(const std::string& chat_text, const std::optional<std::string>& trees_text,
                 const std::optional<std::string>& wav_path, const std::optional<std::string>& config_path,
                 const std::string& id) {
    const auto cfg = config::resolve_config(config_path);
    const auto res = config::load_resources(cfg);
    const auto& reg = features::FeatureRegistry::standard();
    const auto transcript = chat::parse_chat(chat_text, id);
    std::optional<std::vector<std::optional<treebank::ParseTree>>> trees;
    if (trees_text) trees = treebank::parse_trees_file(*trees_text);
    std::optional<acoustics::AudioSignal> audio;
    if (wav_path) audio = acoustics::read_wav(*wav_path);
    const auto fv = features::extract_all(transcript, trees ? &*trees : nullptr, audio ? &*audio : nullptr, res, reg);
    py::dict values;
    const auto names = reg.names();
    for (std::size_t i = 0; i < names.size(); ++i)
        values[py::str(names[i])] = fv.values[i] ? py::cast(*fv.values[i]) : py::none();
    py::list masks;
    for (const auto& m : fv.provenance) masks.append(py::make_tuple(m.block, m.reason, m.count));
    py::dict out;
    out["id"] = fv.id;
    out["values"] = values;
    out["masked"] = masks;
    out["audio_restricted"] = fv.audio_restricted;
    return out;
}

py::dict cross_validate(const std::string& matrix_path, const std::string& model, const std::string& protocol,
                        const std::vector<std::uint64_t>& seeds, std::size_t k_features, double alpha) {
    const auto data = features::read_matrix(matrix_path, &features::FeatureRegistry::standard());
    ml::ModelSpec spec;
    spec.kind = ml::model_from_name(model);
    spec.k_features = k_features;
    spec.alpha = alpha;
    const auto task = ml::is_regression(spec.kind) ? eval::Task::Regress : eval::Task::Classify;
    const auto rep = eval::cross_validate(data, spec, task, eval::ProtocolSpec::parse(protocol), seeds);
    py::dict per_seed;
    for (const auto& [s, m] : rep.per_seed) per_seed[py::int_(s)] = metrics_dict(m);
    py::dict out;
    out["mean"] = metrics_dict(rep.mean);
    out["per_seed"] = per_seed;
    out["csv"] = eval::report_to_csv(rep);
    return out;
}

}  // namespace

PYBIND11_MODULE(_cogspeech, m) {
    m.doc() = "Feature extraction and evaluation for picture-description speech";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    auto data_error = py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<features::VersionError>(m, "VersionError", data_error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

    m.def("feature_names", [] { return features::FeatureRegistry::standard().names(); });
    m.def("registry_hash", [] { return features::FeatureRegistry::standard().hash(); });
    m.def("feature_groups", [] {
        std::vector<std::string> out;
        for (const auto& d : features::FeatureRegistry::standard().descriptors())
            out.emplace_back(features::group_name(d.group));
        return out;
    });

    m.def("parse_chat", [](const std::string& text, const std::string& id) {
        const auto t = chat::parse_chat(text, id);
        py::list utts;
        for (const auto& u : t.utterances) {
            py::dict d;
            d["speaker"] = u.speaker;
            d["words"] = u.words();
            d["fillers"] = u.filler_count();
            d["start_ms"] = u.start_ms;
            d["end_ms"] = u.end_ms;
            utts.append(d);
        }
        return utts;
    }, py::arg("text"), py::arg("id") = "");

    m.def("extract", &extract, py::arg("chat_text"), py::arg("trees_text") = py::none(), py::arg("wav_path") = py::none(),
          py::arg("config_path") = py::none(), py::arg("id") = "",
          "Extracts every registry feature for one transcript; missing inputs mask their blocks.");

    m.def("read_matrix", [](const std::string& path) {
        return dataset_dict(features::read_matrix(path, &features::FeatureRegistry::standard()));
    }, py::arg("path"));

    m.def("cross_validate", &cross_validate, py::arg("matrix_path"), py::arg("model") = "svm",
          py::arg("protocol") = "loso", py::arg("seeds") = std::vector<std::uint64_t>{0, 1, 2},
          py::arg("k_features") = 0, py::arg("alpha") = 10.0);

    m.def("validate_report", [](const std::string& csv_text) {
        return eval::validate_report(eval::report_from_csv(csv_text));
    }, py::arg("csv_text"), "Returns the problems found in a CvReport CSV (empty when valid).");

    m.def("tsne", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& X, double perplexity,
                     std::size_t iterations, std::uint64_t seed) {
        eval::TsneParams p;
        p.perplexity = perplexity;
        p.iterations = iterations;
        p.seed = seed;
        const auto r = eval::tsne_embed(from_numpy(X), p);
        return py::make_tuple(to_numpy(r.Y), r.kl_history);
    }, py::arg("X"), py::arg("perplexity") = 30.0, py::arg("iterations") = 1000, py::arg("seed") = 0);

    m.def("generate_fixtures", [](const std::string& out_dir, std::size_t n_ad, std::size_t n_nonad, std::uint64_t seed) {
        fixtures::CorpusOptions opt;
        opt.n_ad = n_ad;
        opt.n_nonad = n_nonad;
        opt.seed = seed;
        const auto layout = fixtures::write_corpus(out_dir, opt);
        py::dict out;
        out["corpus_dir"] = layout.corpus_dir;
        out["resources_dir"] = layout.resources_dir;
        out["config_path"] = layout.config_path;
        out["ids"] = layout.ids;
        return out;
    }, py::arg("out_dir"), py::arg("n_ad") = 6, py::arg("n_nonad") = 6, py::arg("seed") = 7);
}
