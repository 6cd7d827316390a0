#include "cogspeech/featureset.hpp"

#include "cogspeech/speechgraph.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace cogspeech::features {
namespace {

constexpr std::string_view kMatrixMagic = "#cogspeech-matrix v1";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct BlockSpec {
    std::string block;
    Group group;
    std::string module;
    std::vector<std::string> names;
};

std::vector<BlockSpec> block_layout(const treebank::ProductionRegistry& productions) {
    using G = Group;
    return {
        {"syntax", G::LexicoSyntactic, "treebank", treebank::syntax_feature_names(productions)},
        {"richness", G::LexicoSyntactic, "lexical", lexical::richness_names()},
        {"norms", G::LexicoSyntactic, "lexical", lexical::norm_feature_names()},
        {"categories", G::LexicoSyntactic, "lexical", lexical::category_names()},
        {"coherence", G::LexicoSyntactic, "semantics", semantics::coherence_names()},
        {"graph", G::LexicoSyntactic, "speechgraph", speechgraph::graph_feature_names()},
        {"pauses", G::Acoustic, "acoustics", acoustics::pause_duration_names()},
        {"f0", G::Acoustic, "acoustics", acoustics::f0_names()},
        {"zcr", G::Acoustic, "acoustics", acoustics::zcr_names()},
        {"mfcc", G::Acoustic, "acoustics", acoustics::mfcc_feature_names()},
        {"content_units", G::Semantic, "semantics", semantics::content_unit_names()},
    };
}

std::optional<int> parse_label(const std::string& raw) {
    const auto s = to_lower(trim(raw));
    if (s.empty() || s == "na") return std::nullopt;
    if (s == "1" || s == "ad" || s == "cd" || s == "dementia") return 1;
    if (s == "0" || s == "nonad" || s == "non-ad" || s == "cc" || s == "control") return 0;
    throw DataError("unrecognized label '" + raw + "'");
}

std::optional<double> parse_optional_number(const std::string& raw, const std::string& what) {
    const auto s = trim(raw);
    if (s.empty() || s == "NA" || s == "na") return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw DataError("bad " + what + " value '" + raw + "'");
    }
}

bool is_punct_tag(const std::string& tag) {
    return tag == "." || tag == "," || tag == ":" || tag == "``" || tag == "''" || tag == "-LRB-" || tag == "-RRB-";
}

}  // namespace

std::string_view group_name(Group g) {
    switch (g) {
    case Group::LexicoSyntactic: return "lexicosyntactic";
    case Group::Acoustic: return "acoustic";
    case Group::Semantic: return "semantic";
    }
    return "";
}

std::string names_hash(const std::vector<std::string>& names) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 1099511628211ULL;
    };
    for (const auto& n : names) {
        for (unsigned char c : n) mix(c);
        mix('\n');
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FeatureRegistry FeatureRegistry::build(const treebank::ProductionRegistry& productions) {
    FeatureRegistry reg;
    for (auto& spec : block_layout(productions))
        for (auto& n : spec.names) {
            if (reg.index_.contains(n)) throw ConfigError("duplicate feature name '" + n + "'");
            reg.index_[n] = reg.items_.size();
            reg.items_.push_back({n, spec.group, spec.module, spec.block});
        }
    if (reg.items_.size() != kFeatureCount) throw ConfigError("feature registry does not hold 509 entries");
    reg.hash_ = names_hash(reg.names());
    return reg;
}

const FeatureRegistry& FeatureRegistry::standard() {
    static const FeatureRegistry reg = build(treebank::ProductionRegistry::builtin());
    return reg;
}

std::vector<std::string> FeatureRegistry::names() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& d : items_) out.push_back(d.name);
    return out;
}

std::optional<std::size_t> FeatureRegistry::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t FeatureRegistry::group_count(Group g) const {
    return static_cast<std::size_t>(std::count_if(items_.begin(), items_.end(), [&](const auto& d) { return d.group == g; }));
}

std::vector<std::size_t> FeatureRegistry::block_indices(const std::string& block) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < items_.size(); ++i)
        if (items_[i].block == block) out.push_back(i);
    return out;
}

std::size_t FeatureVector::masked_count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](const MaybeValue& v) { return !v; }));
}

std::vector<std::string> align_tags(const std::vector<std::string>& words, const treebank::ParseTree* tree) {
    std::vector<std::string> tags(words.size());
    if (!tree) return tags;
    std::vector<treebank::TaggedWord> pre;
    for (auto& tw : treebank::preterminals(*tree))
        if (!is_punct_tag(tw.tag)) pre.push_back(std::move(tw));
    if (pre.size() == words.size()) {
        for (std::size_t i = 0; i < words.size(); ++i) tags[i] = pre[i].tag;
        return tags;
    }
    // Greedy in-order matching on lowercase text.
    std::size_t j = 0;
    for (std::size_t i = 0; i < words.size() && j < pre.size(); ++i) {
        const auto w = to_lower(words[i]);
        for (std::size_t k = j; k < pre.size(); ++k)
            if (to_lower(pre[k].word) == w) {
                tags[i] = pre[k].tag;
                j = k + 1;
                break;
            }
    }
    return tags;
}

std::string participant_text(const chat::Transcript& t, std::string_view code) {
    std::string out;
    for (const auto& u : chat::participant_utterances(t, code))
        for (const auto& w : u.words()) {
            if (!out.empty()) out += ' ';
            out += w;
        }
    return out;
}

FeatureVector extract_all(const chat::Transcript& transcript,
                          const std::vector<std::optional<treebank::ParseTree>>* trees,
                          const acoustics::AudioSignal* audio, const Resources& res, const FeatureRegistry& registry) {
    const auto& opt = res.options;
    FeatureVector fv;
    fv.id = transcript.id;
    fv.values.assign(registry.size(), std::nullopt);

    auto put = [&](const FeatureBlock& block) {
        for (const auto& nv : block) {
            auto idx = registry.index_of(nv.name);
            if (!idx) throw Error("extractor produced unregistered feature '" + nv.name + "'");
            if (nv.value && std::isfinite(*nv.value)) fv.values[*idx] = nv.value;
        }
    };
    auto mask = [&](const std::string& block, const std::string& reason) {
        fv.provenance.push_back({block, reason, registry.block_indices(block).size()});
    };

    const auto utts = chat::participant_utterances(transcript, opt.participant);
    std::vector<std::vector<std::string>> utt_words;
    std::vector<std::string> words;
    std::vector<lexical::TaggedToken> tagged;
    int fillers = 0;
    for (std::size_t u = 0; u < utts.size(); ++u) {
        auto ws = utts[u].words();
        fillers += utts[u].filler_count();
        const treebank::ParseTree* tree = nullptr;
        if (trees && u < trees->size() && (*trees)[u]) tree = &*(*trees)[u];
        const auto tags = align_tags(ws, tree);
        std::vector<std::string> clean;
        std::size_t wi = 0;
        for (const auto& tok : utts[u].tokens) {
            if (!tok.is_word()) continue;
            tagged.push_back({to_lower(tok.normalized), tags[wi], tok.is_nonword});
            if (!tok.is_nonword) clean.push_back(to_lower(tok.normalized));
            ++wi;
        }
        words.insert(words.end(), clean.begin(), clean.end());
        utt_words.push_back(std::move(clean));
    }

    // Audio first: durations feed the rate features.
    std::optional<acoustics::SilenceSummary> silences;
    if (audio && !audio->samples.empty()) {
        acoustics::AudioSignal sig = *audio;
        if (opt.restrict_audio_to_participant) {
            if (auto segs = chat::participant_segments(transcript, opt.participant)) {
                auto r = acoustics::restrict_to(*audio, *segs);
                if (!r.samples.empty()) {
                    sig = std::move(r);
                    fv.audio_restricted = true;
                }
            }
        }
        silences = acoustics::detect_silences(sig, opt.frames, opt.pauses);
        put(acoustics::pause_and_duration_features(sig, {static_cast<int>(tagged.size()), fillers}, opt.frames, opt.pauses));
        put(acoustics::f0_stats(sig, opt.frames, opt.pitch));
        put(acoustics::zcr_stats(sig, opt.frames));
        put(acoustics::mfcc_block(sig, opt.frames, opt.mfcc));
    } else {
        for (const char* b : {"pauses", "f0", "zcr", "mfcc"}) mask(b, "no audio");
    }

    if (words.empty()) {
        for (const char* b : {"syntax", "richness", "norms", "categories", "coherence", "graph", "content_units"})
            mask(b, "no participant speech");
        return fv;
    }

    std::vector<treebank::ParseTree> parsed;
    if (trees)
        for (const auto& t : *trees)
            if (t) parsed.push_back(*t);
    if (parsed.empty()) {
        mask("syntax", "no parse trees");
    } else {
        try {
            put(treebank::syntax_features(parsed, res.productions));
        } catch (const DataError& e) {
            mask("syntax", e.what());
        }
    }

    put(lexical::richness_features(words, opt.richness));
    put(lexical::norm_features(tagged, res.norms));
    lexical::Durations durations;
    if (silences) {
        durations.audio_seconds = silences->total_seconds;
        durations.speech_seconds = silences->spoken_seconds;
    }
    put(lexical::category_and_ratio_features(tagged, res.lists, durations));
    put(speechgraph::graph_features(speechgraph::build_graph(words)));

    if (res.spaces.size() == semantics::kSpaceCount) {
        put(semantics::coherence_features(utt_words, res.spaces, res.primary_space));
    } else {
        mask("coherence", "embedding spaces not configured");
    }
    if (res.spaces.size() == semantics::kSpaceCount) {
        put(semantics::content_unit_features(words, utt_words, res.units, res.spaces));
    } else {
        // The frequency part needs no embeddings.
        put(semantics::content_unit_features(words, utt_words, res.units, {}));
        mask("content_units", "embedding spaces not configured (global coherence)");
    }
    return fv;
}

// --- dataset ----------------------------------------------------------

bool Dataset::has_labels() const {
    return !labels.empty() && std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });
}

bool Dataset::has_mmse() const {
    return !mmse.empty() && std::all_of(mmse.begin(), mmse.end(), [](const auto& m) { return m.has_value(); });
}

std::vector<int> Dataset::label_vector() const {
    if (!has_labels()) throw DataError("dataset lacks labels for some rows");
    std::vector<int> out;
    for (const auto& l : labels) out.push_back(*l);
    return out;
}

std::vector<double> Dataset::mmse_vector() const {
    if (!has_mmse()) throw DataError("dataset lacks MMSE targets for some rows");
    std::vector<double> out;
    for (const auto& m : mmse) out.push_back(*m);
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
    Dataset d;
    d.feature_names = feature_names;
    d.X = X.select_rows(idx);
    for (auto i : idx) {
        d.ids.push_back(ids[i]);
        d.labels.push_back(labels[i]);
        d.mmse.push_back(mmse[i]);
    }
    return d;
}

void Dataset::validate() const {
    const auto n = ids.size();
    if (X.rows() != n || labels.size() != n || mmse.size() != n) throw DataError("dataset columns have unequal lengths");
    if (X.cols() != feature_names.size()) throw DataError("dataset feature count disagrees with its names");
    for (const auto& l : labels)
        if (l && *l != 0 && *l != 1) throw DataError("labels must be binary");
}

Dataset assemble(const std::vector<FeatureVector>& rows, const FeatureRegistry& registry,
                 const std::map<std::string, std::pair<std::optional<int>, std::optional<double>>>& targets) {
    Dataset d;
    d.feature_names = registry.names();
    d.X = Matrix(rows.size(), registry.size(), kNaN);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].values.size() != registry.size()) throw DataError("feature vector length disagrees with registry");
        for (std::size_t c = 0; c < registry.size(); ++c)
            if (rows[r].values[c]) d.X(r, c) = *rows[r].values[c];
        d.ids.push_back(rows[r].id);
        auto it = targets.find(rows[r].id);
        d.labels.push_back(it == targets.end() ? std::nullopt : it->second.first);
        d.mmse.push_back(it == targets.end() ? std::nullopt : it->second.second);
    }
    return d;
}

// --- imputation -------------------------------------------------------

Imputer Imputer::fit(const Matrix& X, const std::vector<std::string>& names) {
    Imputer imp;
    imp.fill.assign(X.cols(), 0.0);
    for (std::size_t c = 0; c < X.cols(); ++c) {
        std::vector<double> vals;
        for (std::size_t r = 0; r < X.rows(); ++r)
            if (!std::isnan(X(r, c))) vals.push_back(X(r, c));
        if (vals.empty()) {
            imp.warnings.push_back("feature " + (c < names.size() ? names[c] : std::to_string(c)) +
                                   " has no observed values; imputing 0");
            continue;
        }
        imp.fill[c] = median_of(std::move(vals));
    }
    return imp;
}

Matrix Imputer::apply(const Matrix& X) const {
    if (X.cols() != fill.size()) throw DataError("imputer width disagrees with matrix");
    Matrix out = X;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c)
            if (std::isnan(out(r, c))) out(r, c) = fill[c];
    return out;
}

// --- CSV --------------------------------------------------------------

std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw ParseError("unterminated quoted CSV field", text.size());
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string matrix_to_csv(const Dataset& d) {
    d.validate();
    std::ostringstream os;
    os << kMatrixMagic << " registry=" << names_hash(d.feature_names) << '\n';
    os << "id,label,mmse";
    for (const auto& n : d.feature_names) os << ',' << csv_escape(n);
    os << '\n';
    for (std::size_t r = 0; r < d.size(); ++r) {
        os << csv_escape(d.ids[r]) << ',' << (d.labels[r] ? std::to_string(*d.labels[r]) : "NA") << ','
           << (d.mmse[r] ? format_double(*d.mmse[r]) : "NA");
        for (std::size_t c = 0; c < d.X.cols(); ++c) os << ',' << format_double(d.X(r, c));
        os << '\n';
    }
    return os.str();
}

Dataset matrix_from_csv(std::string_view text, const FeatureRegistry* expected) {
    const auto nl = text.find('\n');
    const std::string first = trim(text.substr(0, nl));
    if (first.rfind(kMatrixMagic, 0) != 0) throw VersionError("matrix file lacks the version line");
    const auto at = first.find("registry=");
    if (at == std::string::npos) throw VersionError("matrix file lacks a registry hash");
    const std::string hash = first.substr(at + 9);
    auto rows = parse_csv(nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1));
    if (rows.empty()) throw DataError("matrix file has no header");
    const auto& header = rows[0];
    if (header.size() < 3 || header[0] != "id" || header[1] != "label" || header[2] != "mmse")
        throw DataError("matrix header must start with id,label,mmse");
    Dataset d;
    d.feature_names.assign(header.begin() + 3, header.end());
    if (names_hash(d.feature_names) != hash)
        throw VersionError("matrix header does not match its registry hash " + hash);
    if (expected) {
        if (hash != expected->hash()) throw VersionError("matrix registry " + hash + " differs from " + expected->hash());
    }
    const std::size_t d_cols = d.feature_names.size();
    d.X = Matrix(rows.size() - 1, d_cols);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw ParseError("matrix row has " + std::to_string(row.size()) + " fields, expected " +
                                 std::to_string(header.size()),
                             r + 1);
        d.ids.push_back(row[0]);
        d.labels.push_back(parse_label(row[1]));
        d.mmse.push_back(parse_optional_number(row[2], "mmse"));
        for (std::size_t c = 0; c < d_cols; ++c) {
            const auto& f = row[c + 3];
            if (f == "NA") d.X(r - 1, c) = kNaN;
            else if (f == "inf") d.X(r - 1, c) = std::numeric_limits<double>::infinity();
            else if (f == "-inf") d.X(r - 1, c) = -std::numeric_limits<double>::infinity();
            else d.X(r - 1, c) = *parse_optional_number(f, d.feature_names[c]);
        }
    }
    d.validate();
    return d;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

void write_matrix(const std::string& path, const Dataset& d) { write_file_atomic(path, matrix_to_csv(d)); }

Dataset read_matrix(const std::string& path, const FeatureRegistry* expected) {
    return matrix_from_csv(read_text_file(path), expected);
}

std::map<std::string, std::pair<std::optional<int>, std::optional<double>>> parse_labels_csv(std::string_view text) {
    std::map<std::string, std::pair<std::optional<int>, std::optional<double>>> out;
    const auto rows = parse_csv(text);
    if (rows.empty()) return out;
    std::size_t start = 0;
    if (!rows[0].empty() && to_lower(trim(rows[0][0])) == "id") start = 1;
    for (std::size_t r = start; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() < 2) throw ParseError("labels row needs id and label", r + 1);
        std::optional<double> mmse;
        if (row.size() >= 3) mmse = parse_optional_number(row[2], "mmse");
        out[trim(row[0])] = {parse_label(row[1]), mmse};
    }
    return out;
}

std::string transcripts_to_csv(const std::vector<TranscriptRecord>& rows) {
    std::string out = "id,text,label\n";
    for (const auto& r : rows)
        out += csv_escape(r.id) + ',' + csv_escape(r.text) + ',' + (r.label ? std::to_string(*r.label) : "") + '\n';
    return out;
}

std::vector<TranscriptRecord> transcripts_from_csv(std::string_view text) {
    const auto rows = parse_csv(text);
    if (rows.empty() || rows[0] != std::vector<std::string>{"id", "text", "label"})
        throw DataError("transcripts CSV must have header id,text,label");
    std::vector<TranscriptRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 3) throw ParseError("transcripts row needs 3 fields", r + 1);
        out.push_back({rows[r][0], rows[r][1], parse_label(rows[r][2])});
    }
    return out;
}

}  // namespace cogspeech::features
