#include "cogspeech/fixtures.hpp"

#include "cogspeech/chat.hpp"
#include "cogspeech/lexical.hpp"
#include "cogspeech/ml.hpp"
#include "cogspeech/semantics.hpp"
#include "cogspeech/treebank.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>

namespace cogspeech::fixtures {
namespace {

namespace fs = std::filesystem;

struct Sentence {
    const char* chat;
    const char* tree;
};

// Content-rich descriptions.
const Sentence kDetailed[] = {
    {"the boy is taking a cookie from the jar .",
     "(ROOT (S (NP (DT the) (NN boy)) (VP (VBZ is) (VP (VBG taking) (NP (DT a) (NN cookie)) (PP (IN from) (NP (DT the) (NN jar))))) (. .)))"},
    {"the stool is falling over .",
     "(ROOT (S (NP (DT the) (NN stool)) (VP (VBZ is) (VP (VBG falling) (ADVP (RB over)))) (. .)))"},
    {"the mother is washing the dishes and the water is overflowing .",
     "(ROOT (S (S (NP (DT the) (NN mother)) (VP (VBZ is) (VP (VBG washing) (NP (DT the) (NNS dishes))))) (CC and) (S (NP (DT the) (NN water)) (VP (VBZ is) (VP (VBG overflowing)))) (. .)))"},
    {"the little girl is asking for a cookie .",
     "(ROOT (S (NP (DT the) (JJ little) (NN girl)) (VP (VBZ is) (VP (VBG asking) (PP (IN for) (NP (DT a) (NN cookie))))) (. .)))"},
    {"she is drying a plate with a towel .",
     "(ROOT (S (NP (PRP she)) (VP (VBZ is) (VP (VBG drying) (NP (DT a) (NN plate)) (PP (IN with) (NP (DT a) (NN towel))))) (. .)))"},
    {"the water is spilling on the floor .",
     "(ROOT (S (NP (DT the) (NN water)) (VP (VBZ is) (VP (VBG spilling) (PP (IN on) (NP (DT the) (NN floor))))) (. .)))"},
    {"the boy who is on the stool wants a cookie .",
     "(ROOT (S (NP (NP (DT the) (NN boy)) (SBAR (WHNP (WP who)) (S (VP (VBZ is) (PP (IN on) (NP (DT the) (NN stool))))))) (VP (VBZ wants) (NP (DT a) (NN cookie))) (. .)))"},
    {"outside the window there is a garden .",
     "(ROOT (S (S (PP (IN outside) (NP (DT the) (NN window))) (NP (EX there)) (VP (VBZ is) (NP (DT a) (NN garden)))) (. .)))"},
    {"the sink is full of water .",
     "(ROOT (S (NP (DT the) (NN sink)) (VP (VBZ is) (ADJP (JJ full) (PP (IN of) (NP (NN water))))) (. .)))"},
    {"the boy and the girl want cookies .",
     "(ROOT (S (NP (NP (DT the) (NN boy)) (CC and) (NP (DT the) (NN girl))) (VP (VBP want) (NP (NNS cookies))) (. .)))"},
    {"the boy took a cookie .",
     "(ROOT (S (NP (DT the) (NN boy)) (VP (VBD took) (NP (DT a) (NN cookie))) (. .)))"},
    {"the curtains are open at the window .",
     "(ROOT (S (NP (DT the) (NNS curtains)) (VP (VBP are) (ADJP (JJ open) (PP (IN at) (NP (DT the) (NN window))))) (. .)))"},
    {"the mother does not see the water .",
     "(ROOT (S (NP (DT the) (NN mother)) (VP (VBZ does) (ADVP (RB not)) (VP (VB see) (NP (DT the) (NN water)))) (. .)))"},
    {"the girl is laughing .",
     "(ROOT (S (NP (DT the) (NN girl)) (VP (VBZ is) (VP (VBG laughing))) (. .)))"},
};

// Sparse, pronoun-heavy descriptions with fillers and pauses.
const Sentence kSparse[] = {
    {"&-um he is taking it .",
     "(ROOT (S (NP (PRP he)) (VP (VBZ is) (VP (VBG taking) (NP (PRP it)))) (. .)))"},
    {"she is &-uh doing something .",
     "(ROOT (S (NP (PRP she)) (VP (VBZ is) (VP (VBG doing) (NP (NN something)))) (. .)))"},
    {"&-uh there is a thing (.) .",
     "(ROOT (S (NP (EX there)) (VP (VBZ is) (NP (DT a) (NN thing))) (. .)))"},
    {"it is falling .",
     "(ROOT (S (NP (PRP it)) (VP (VBZ is) (VP (VBG falling))) (. .)))"},
    {"&-um the water .",
     "(ROOT (FRAG (NP (DT the) (NN water)) (. .)))"},
    {"she is &-um washing .",
     "(ROOT (S (NP (PRP she)) (VP (VBZ is) (VP (VBG washing))) (. .)))"},
    {"he wants that .",
     "(ROOT (S (NP (PRP he)) (VP (VBZ wants) (NP (DT that))) (. .)))"},
    {"and they want it .",
     "(ROOT (S (S (CC and) (NP (PRP they)) (VP (VBP want) (NP (PRP it)))) (. .)))"},
    {"<the boy> [/] the boy is &-um on the thing .",
     "(ROOT (S (NP (DT the) (NN boy)) (VP (VBZ is) (PP (IN on) (NP (DT the) (NN thing)))) (. .)))"},
    {"I see a boy (.) .",
     "(ROOT (S (NP (PRP I)) (VP (VBP see) (NP (DT a) (NN boy))) (. .)))"},
    {"she is drying it .",
     "(ROOT (S (NP (PRP she)) (VP (VBZ is) (VP (VBG drying) (NP (PRP it)))) (. .)))"},
    {"&-uh xxx the cookie .",
     "(ROOT (FRAG (NP (DT the) (NN cookie)) (. .)))"},
    {"the girl wants a cookie .",
     "(ROOT (S (NP (DT the) (NN girl)) (VP (VBZ wants) (NP (DT a) (NN cookie))) (. .)))"},
};

constexpr const char* kInvestigator = "just tell me everything that you see happening in the picture .";

std::string id_for(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%03zu", i + 1);
    return buf;
}

std::string bullet(std::int64_t a, std::int64_t b) {
    return "\x15" + std::to_string(a) + "_" + std::to_string(b) + "\x15";
}

double normal(ml::Rng& rng) {
    const double u1 = std::max(ml::uniform01(rng), 1e-300);
    const double u2 = ml::uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Appends a harmonic tone with 10 ms raised-cosine edges.
void append_tone(std::vector<double>& out, int sr, double seconds, double f0, double amp) {
    const auto n = static_cast<std::size_t>(std::llround(seconds * sr));
    const auto ramp = static_cast<std::size_t>(0.01 * sr);
    double norm = 0.0;
    for (int h = 1; h <= 5; ++h) norm += 1.0 / h;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        double v = 0.0;
        for (int h = 1; h <= 5; ++h) v += std::sin(2.0 * std::numbers::pi * f0 * h * t) / h;
        double env = 1.0;
        if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / ramp);
        else if (n - i <= ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(n - i) / ramp);
        out.push_back(amp * env * v / norm);
    }
}

void append_silence(std::vector<double>& out, int sr, double seconds) {
    out.insert(out.end(), static_cast<std::size_t>(std::llround(seconds * sr)), 0.0);
}

std::int64_t ms_of(std::size_t samples, int sr) {
    return static_cast<std::int64_t>(std::llround(1000.0 * static_cast<double>(samples) / sr));
}

std::size_t spoken_tokens(const char* body) {
    const auto u = chat::parse_tier_body("PAR", body, 1);
    std::size_t n = 0;
    for (const auto& t : u.tokens) n += t.is_terminator ? 0 : 1;
    return n;
}

std::uint64_t word_hash(std::string_view w) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : w) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::vector<Sample> make_samples(const CorpusOptions& opt) {
    const std::size_t n = opt.n_ad + opt.n_nonad;
    const int sr = opt.sample_rate;
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const bool ad = s < opt.n_ad;
        ml::Rng rng(ml::derive_seed(opt.seed, s));
        Sample smp;
        smp.id = id_for(s);
        smp.label = ad ? 1 : 0;
        smp.mmse = ad ? 14 + static_cast<int>(ml::uniform_index(rng, 11)) : 27 + static_cast<int>(ml::uniform_index(rng, 4));

        // Mostly class-typical sentences, with one from the other bank.
        std::vector<const Sentence*> picks;
        const auto* own = ad ? kSparse : kDetailed;
        const std::size_t own_n = ad ? std::size(kSparse) : std::size(kDetailed);
        std::vector<std::size_t> order(own_n);
        for (std::size_t i = 0; i < own_n; ++i) order[i] = i;
        for (std::size_t i = own_n; i > 1; --i) std::swap(order[i - 1], order[ml::uniform_index(rng, i)]);
        const std::size_t count = std::min(opt.utterances, own_n);
        for (std::size_t i = 0; i + 1 < count; ++i) picks.push_back(&own[order[i]]);
        if (ad) {
            // Every session needs at least one prepositional phrase.
            constexpr std::size_t with_pp[] = {0, 3, 4, 5, 6, 8, 11};
            picks.push_back(&kDetailed[with_pp[ml::uniform_index(rng, std::size(with_pp))]]);
        } else {
            picks.push_back(&kSparse[ml::uniform_index(rng, std::size(kSparse))]);
        }
        // The first pick always carries a subordinate clause for detailed speakers.
        if (!ad) picks.front() = &kDetailed[6];

        std::vector<double> audio;
        const double base_f0 = ad ? 130.0 + 20.0 * ml::uniform01(rng) : 190.0 + 30.0 * ml::uniform01(rng);
        std::ostringstream cha;
        cha << "@UTF8\n@Begin\n@Languages:\teng\n@Participants:\tPAR Participant, INV Investigator\n"
            << "@Media:\t" << smp.id << ", audio\n";

        append_silence(audio, sr, 0.3);
        std::size_t seg_start = audio.size();
        for (int w = 0; w < 10; ++w) {
            append_tone(audio, sr, 0.2, 110.0, 0.25);
            append_silence(audio, sr, 0.02);
        }
        cha << "*INV:\t" << kInvestigator << " " << bullet(ms_of(seg_start, sr), ms_of(audio.size(), sr)) << "\n";
        append_silence(audio, sr, 0.5);

        std::ostringstream trees;
        std::size_t prev_end = audio.size() - static_cast<std::size_t>(0.5 * sr);
        for (const auto* sent : picks) {
            const double gap = ad ? 0.6 + 0.4 * ml::uniform01(rng) : 0.2 + 0.15 * ml::uniform01(rng);
            append_silence(audio, sr, gap);
            const std::size_t words = spoken_tokens(sent->chat);
            for (std::size_t w = 0; w < words; ++w) {
                const double dur = 0.25 + 0.05 * ml::uniform01(rng);
                const double f0 = base_f0 * (0.9 + 0.2 * ml::uniform01(rng));
                append_tone(audio, sr, dur, f0, 0.3 + 0.1 * ml::uniform01(rng));
                if (w + 1 < words) append_silence(audio, sr, 0.02);
            }
            cha << "*PAR:\t" << sent->chat << " " << bullet(ms_of(prev_end, sr), ms_of(audio.size(), sr)) << "\n";
            trees << sent->tree << "\n";
            prev_end = audio.size();
        }
        append_silence(audio, sr, 0.3);
        cha << "@End\n";

        for (auto& x : audio) x += 1e-4 * (2.0 * ml::uniform01(rng) - 1.0);
        smp.chat = cha.str();
        smp.trees = trees.str();
        smp.audio.samples = std::move(audio);
        smp.audio.sample_rate = sr;
        out.push_back(std::move(smp));
    }
    return out;
}

std::vector<std::string> vocabulary() {
    std::set<std::string> words;
    auto add_tree = [&](const char* text) {
        for (const auto& pt : treebank::preterminals(treebank::parse_bracketed(text)))
            if (pt.tag != ".") words.insert(to_lower(pt.word));
    };
    for (const auto& s : kDetailed) add_tree(s.tree);
    for (const auto& s : kSparse) add_tree(s.tree);
    for (const auto& u : semantics::ContentUnitLexicon::builtin().units())
        for (const auto& l : u.lemmas) words.insert(l);
    std::istringstream inv(kInvestigator);
    for (std::string w; inv >> w;)
        if (w != ".") words.insert(w);
    return {words.begin(), words.end()};
}

CorpusLayout write_corpus(const std::string& out_dir, const CorpusOptions& opt) {
    CorpusLayout layout;
    const fs::path root(out_dir);
    const fs::path corpus = root / "corpus";
    const fs::path res = root / "resources";
    fs::create_directories(corpus);
    fs::create_directories(res);
    layout.corpus_dir = corpus.string();
    layout.resources_dir = res.string();

    std::string labels = "id,label,mmse\n";
    for (const auto& s : make_samples(opt)) {
        features::write_file_atomic((corpus / (s.id + ".cha")).string(), s.chat);
        features::write_file_atomic((corpus / (s.id + ".trees")).string(), s.trees);
        acoustics::write_wav((corpus / (s.id + ".wav")).string(), s.audio);
        labels += s.id + "," + std::to_string(s.label) + "," + std::to_string(s.mmse) + "\n";
        layout.ids.push_back(s.id);
    }
    features::write_file_atomic((corpus / "labels.csv").string(), labels);

    const auto vocab = vocabulary();
    std::string norms, dict;
    // Plausible value ranges per norm, in lexical::Norm order.
    const double lo[] = {100, 2, 100, 0, 1, 1, 1};
    const double hi[] = {700, 12, 700, 6, 9, 9, 9};
    for (const auto& w : vocab) {
        dict += w + "\n";
        ml::Rng rng(word_hash(w));
        for (std::size_t k = 0; k < lexical::kNormCount; ++k) {
            const double v = lo[k] + (hi[k] - lo[k]) * ml::uniform01(rng);
            norms += w + "\t" + std::string(lexical::norm_name(static_cast<lexical::Norm>(k))) + "\t" + fmt(v) + "\n";
        }
    }
    features::write_file_atomic((res / "norms.tsv").string(), norms);
    features::write_file_atomic((res / "dictionary.txt").string(), dict);

    const std::size_t dims[] = {50, 100, 200, 300, 300};
    nlohmann::json emb = nlohmann::json::array();
    for (std::size_t sp = 0; sp < semantics::kSpaceCount; ++sp) {
        ml::Rng topic_rng(ml::derive_seed(opt.seed + 1000, sp));
        std::vector<double> topic(dims[sp]);
        for (auto& t : topic) t = normal(topic_rng);
        std::string text = std::to_string(vocab.size()) + " " + std::to_string(dims[sp]) + "\n";
        for (const auto& w : vocab) {
            ml::Rng rng(ml::derive_seed(word_hash(w), sp));
            text += w;
            for (std::size_t d = 0; d < dims[sp]; ++d) text += " " + fmt(0.7 * topic[d] + normal(rng));
            text += "\n";
        }
        const std::string name = "space" + std::to_string(sp + 1);
        features::write_file_atomic((res / (name + ".txt")).string(), text);
        emb.push_back({{"name", name}, {"path", name + ".txt"}, {"dim", dims[sp]}});
    }

    nlohmann::json cfg = {{"resources",
                           {{"norms", "norms.tsv"},
                            {"dictionary", "dictionary.txt"},
                            {"embeddings", emb},
                            {"primary_embedding", 0}}},
                          {"cv", {{"seeds", {0, 1, 2}}, {"protocol", "loso"}}}};
    layout.config_path = (res / "config.json").string();
    features::write_file_atomic(layout.config_path, cfg.dump(2) + "\n");
    return layout;
}

namespace {

features::Dataset blank(std::size_t n, std::size_t d) {
    features::Dataset ds;
    ds.X = Matrix(n, d);
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) ds.ids.push_back(id_for(i));
    ds.labels.assign(n, std::nullopt);
    ds.mmse.assign(n, std::nullopt);
    return ds;
}

}  // namespace

features::Dataset discriminability_dataset(std::size_t n_per_class, std::size_t informative, std::size_t noise,
                                           double shift, std::uint64_t seed) {
    const std::size_t n = 2 * n_per_class;
    const std::size_t d = informative + noise;
    auto ds = blank(n, d);
    ml::Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i % 2 == 0 ? 1 : 0;
        ds.labels[i] = y;
        for (std::size_t j = 0; j < d; ++j) {
            double v = normal(rng);
            if (j < informative) v += y ? shift : -shift;
            ds.X(i, j) = v;
        }
    }
    return ds;
}

std::vector<std::size_t> planted_columns(std::size_t planted, std::size_t total) {
    std::vector<std::size_t> cols;
    const std::size_t stride = std::max<std::size_t>(1, total / planted);
    for (std::size_t k = 0; k < planted; ++k) cols.push_back(k * stride + stride / 2);
    return cols;
}

features::Dataset planted_dataset(std::size_t n_per_class, std::size_t planted, std::size_t total, double shift,
                                  std::uint64_t seed) {
    const std::size_t n = 2 * n_per_class;
    auto ds = blank(n, total);
    const auto cols = planted_columns(planted, total);
    std::vector<bool> is_planted(total, false);
    for (auto c : cols) is_planted[c] = true;
    ml::Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i % 2 == 0 ? 1 : 0;
        ds.labels[i] = y;
        ds.mmse[i] = y ? 16.0 + static_cast<double>(ml::uniform_index(rng, 9)) : 27.0 + static_cast<double>(ml::uniform_index(rng, 4));
        for (std::size_t j = 0; j < total; ++j) {
            double v = normal(rng);
            if (is_planted[j]) v += y ? shift : -shift;
            ds.X(i, j) = v;
        }
    }
    return ds;
}

features::Dataset regression_dataset(std::size_t n, std::size_t d, std::size_t informative, double noise_sd,
                                     std::uint64_t seed) {
    auto ds = blank(n, d);
    ml::Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 24.0;
        for (std::size_t j = 0; j < d; ++j) {
            ds.X(i, j) = normal(rng);
            if (j < informative) y += 1.5 * ds.X(i, j);
        }
        y += noise_sd * normal(rng);
        ds.mmse[i] = ml::clip_mmse(y);
    }
    return ds;
}

features::Dataset blobs_dataset(std::size_t n_per_blob, std::size_t d, double separation, std::uint64_t seed) {
    const std::size_t n = 2 * n_per_blob;
    auto ds = blank(n, d);
    ml::Rng rng(seed);
    const double offset = separation / (2.0 * std::sqrt(static_cast<double>(d)));
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i < n_per_blob ? 1 : 0;
        ds.labels[i] = y;
        for (std::size_t j = 0; j < d; ++j) ds.X(i, j) = normal(rng) + (y ? offset : -offset);
    }
    return ds;
}

}  // namespace cogspeech::fixtures
