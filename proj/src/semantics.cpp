#include "cogspeech/semantics.hpp"

#include "builtin_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cogspeech::semantics {
namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double norm2(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<Vector> utterance_vectors(const std::vector<std::vector<std::string>>& utterances, const EmbeddingSpace& space) {
    std::vector<Vector> out;
    for (const auto& u : utterances) {
        auto v = utterance_vector(u, space);
        if (v && norm2(*v) > 0.0) out.push_back(std::move(*v));
    }
    return out;
}

constexpr const char* kCategoryNames[] = {"subject", "place", "object", "action"};

}  // namespace

EmbeddingSpace::EmbeddingSpace(std::string name, std::size_t dim) : name_(std::move(name)), dim_(dim) {}

EmbeddingSpace EmbeddingSpace::parse(std::string name, std::string_view text, std::size_t dim) {
    EmbeddingSpace space(std::move(name), dim);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string line(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        std::istringstream is(line);
        std::string word;
        if (!(is >> word)) continue;
        Vector v;
        double x;
        while (is >> x) v.push_back(x);
        if (!is.eof()) throw ParseError("non-numeric embedding component for '" + word + "'", line_no);
        if (line_no == 1 && v.size() == 1) continue;  // "count dim" header
        if (space.dim_ == 0) space.dim_ = v.size();
        if (v.size() != space.dim_)
            throw ParseError("embedding for '" + word + "' has " + std::to_string(v.size()) + " components, expected " +
                                 std::to_string(space.dim_),
                             line_no);
        space.add(word, std::move(v));
    }
    if (space.dim_ == 0) throw ConfigError("embedding space '" + space.name_ + "' is empty");
    return space;
}

EmbeddingSpace EmbeddingSpace::load(std::string name, const std::string& path, std::size_t dim) {
    return parse(std::move(name), read_file(path), dim);
}

void EmbeddingSpace::add(std::string_view word, Vector v) {
    if (v.size() != dim_) throw DataError("embedding dimension mismatch for '" + std::string(word) + "'");
    vectors_[to_lower(word)] = std::move(v);
}

const Vector* EmbeddingSpace::find(std::string_view word) const {
    auto it = vectors_.find(to_lower(word));
    return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<std::string> lemma_candidates(std::string_view word) {
    std::string w = to_lower(word);
    std::vector<std::string> out{w};
    auto ends_with = [&](std::string_view suf) { return w.size() > suf.size() + 1 && w.compare(w.size() - suf.size(), suf.size(), suf) == 0; };
    auto stem = [&](std::size_t cut) { return w.substr(0, w.size() - cut); };
    auto add_with_undouble = [&](std::string s) {
        out.push_back(s);
        out.push_back(s + "e");
        if (s.size() >= 2 && s[s.size() - 1] == s[s.size() - 2]) out.push_back(s.substr(0, s.size() - 1));
    };
    if (ends_with("ies")) out.push_back(stem(3) + "y");
    if (ends_with("ied")) out.push_back(stem(3) + "y");
    if (ends_with("ing")) add_with_undouble(stem(3));
    if (ends_with("ed")) add_with_undouble(stem(2));
    if (ends_with("es")) out.push_back(stem(2));
    if (ends_with("s")) out.push_back(stem(1));
    return out;
}

ContentUnitLexicon ContentUnitLexicon::parse(std::string_view tsv) {
    ContentUnitLexicon lex;
    std::size_t line_no = 0;
    for (const auto& line : split(tsv, '\n')) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        const auto fields = split(trim(line), '\t');
        if (fields.size() != 3) throw ParseError("content-unit line needs unit, category and lemmas", line_no);
        ContentUnit unit;
        unit.name = trim(fields[0]);
        const auto cat = to_lower(trim(fields[1]));
        if (cat == "subject") unit.category = UnitCategory::Subject;
        else if (cat == "place") unit.category = UnitCategory::Place;
        else if (cat == "object") unit.category = UnitCategory::Object;
        else if (cat == "action") unit.category = UnitCategory::Action;
        else throw ParseError("unknown content-unit category '" + cat + "'", line_no);
        for (const auto& l : split(fields[2], ',')) {
            auto lemma = to_lower(trim(l));
            if (!lemma.empty()) unit.lemmas.insert(lemma);
        }
        if (unit.lemmas.empty()) throw ParseError("content unit '" + unit.name + "' has no lemmas", line_no);
        for (const auto& u : lex.units_)
            if (u.name == unit.name) throw ParseError("duplicate content unit '" + unit.name + "'", line_no);
        for (const auto& l : unit.lemmas) lex.lemma_index_.emplace(l, lex.units_.size());
        lex.units_.push_back(std::move(unit));
    }
    if (lex.units_.empty()) throw ConfigError("content-unit lexicon is empty");
    return lex;
}

ContentUnitLexicon ContentUnitLexicon::load(const std::string& path) { return parse(read_file(path)); }

const ContentUnitLexicon& ContentUnitLexicon::builtin() {
    static const ContentUnitLexicon lex = parse(detail::kContentUnitsText);
    return lex;
}

std::optional<std::size_t> ContentUnitLexicon::match(std::string_view token) const {
    for (const auto& cand : lemma_candidates(token)) {
        auto it = lemma_index_.find(cand);
        if (it != lemma_index_.end()) return it->second;
    }
    return std::nullopt;
}

std::size_t ContentUnitLexicon::count(UnitCategory c) const {
    return static_cast<std::size_t>(std::count_if(units_.begin(), units_.end(), [c](const ContentUnit& u) { return u.category == c; }));
}

double cosine_similarity(const Vector& a, const Vector& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    const double s = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(s, -1.0, 1.0);
}

std::optional<Vector> utterance_vector(const std::vector<std::string>& words, const EmbeddingSpace& space) {
    Vector sum(space.dim(), 0.0);
    std::size_t hits = 0;
    for (const auto& w : words) {
        if (const Vector* v = space.find(w)) {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
            ++hits;
        }
    }
    if (hits == 0) return std::nullopt;
    for (double& x : sum) x /= static_cast<double>(hits);
    return sum;
}

std::vector<std::string> coherence_names(std::size_t n_spaces) {
    std::vector<std::string> names;
    for (std::size_t s = 1; s <= n_spaces; ++s)
        for (const char* stat : {"avg", "max", "min"})
            names.push_back("coh_space" + std::to_string(s) + "_" + stat + "_consecutive_dist");
    for (const char* n : {"utt_frac_sim_below_0.5", "utt_frac_sim_below_0.3", "utt_frac_sim_below_0", "utt_avg_pair_dist",
                          "utt_min_pair_dist"})
        names.emplace_back(n);
    return names;
}

std::vector<std::string> content_unit_names(std::size_t n_spaces) {
    std::vector<std::string> names{"cu_distinct_to_total"};
    for (const char* c : kCategoryNames) names.push_back(std::string("cu_distinct_") + c + "_to_total");
    for (const char* c : kCategoryNames) names.push_back(std::string("cu_mentions_") + c + "_per_token");
    names.emplace_back("cu_distinct_to_mentions");
    for (std::size_t s = 1; s <= n_spaces; ++s)
        for (const char* stat : {"avg", "min", "max"})
            names.push_back("cu_space" + std::to_string(s) + "_" + stat + "_dist_to_units");
    return names;
}

FeatureBlock coherence_features(const std::vector<std::vector<std::string>>& utterances,
                                const std::vector<EmbeddingSpace>& spaces, std::size_t primary) {
    if (spaces.size() != kSpaceCount) throw ConfigError("coherence features need exactly 5 embedding spaces");
    if (primary >= spaces.size()) throw ConfigError("primary embedding index out of range");
    const auto names = coherence_names();
    FeatureBlock out;
    std::size_t k = 0;
    for (const auto& space : spaces) {
        const auto vecs = utterance_vectors(utterances, space);
        if (vecs.size() < 2) {
            for (int i = 0; i < 3; ++i) out.push_back({names[k++], std::nullopt});
            continue;
        }
        double sum = 0.0, mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < vecs.size(); ++i) {
            const double d = cosine_distance(vecs[i - 1], vecs[i]);
            sum += d;
            mx = std::max(mx, d);
            mn = std::min(mn, d);
        }
        out.push_back({names[k++], sum / static_cast<double>(vecs.size() - 1)});
        out.push_back({names[k++], mx});
        out.push_back({names[k++], mn});
    }
    const auto vecs = utterance_vectors(utterances, spaces[primary]);
    if (vecs.size() < 2) {
        for (int i = 0; i < 5; ++i) out.push_back({names[k++], std::nullopt});
        return out;
    }
    double pairs = 0, below05 = 0, below03 = 0, below0 = 0, dist_sum = 0, dist_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        for (std::size_t j = i + 1; j < vecs.size(); ++j) {
            const double s = cosine_similarity(vecs[i], vecs[j]);
            pairs += 1;
            below05 += s < 0.5;
            below03 += s < 0.3;
            below0 += s < 0.0;
            dist_sum += 1.0 - s;
            dist_min = std::min(dist_min, 1.0 - s);
        }
    }
    out.push_back({names[k++], below05 / pairs});
    out.push_back({names[k++], below03 / pairs});
    out.push_back({names[k++], below0 / pairs});
    out.push_back({names[k++], dist_sum / pairs});
    out.push_back({names[k++], dist_min});
    return out;
}

FeatureBlock content_unit_features(const std::vector<std::string>& tokens,
                                   const std::vector<std::vector<std::string>>& utterances,
                                   const ContentUnitLexicon& lexicon, const std::vector<EmbeddingSpace>& spaces) {
    if (lexicon.units().empty()) throw ConfigError("content-unit lexicon is empty");
    const auto names = content_unit_names(spaces.size());
    const auto& units = lexicon.units();
    std::vector<int> mentions(units.size(), 0);
    for (const auto& t : tokens)
        if (auto idx = lexicon.match(t)) ++mentions[*idx];

    const double total_units = static_cast<double>(units.size());
    double distinct = 0, total_mentions = 0;
    double cat_distinct[4] = {0, 0, 0, 0}, cat_mentions[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto c = static_cast<std::size_t>(units[i].category);
        if (mentions[i] > 0) {
            distinct += 1;
            cat_distinct[c] += 1;
        }
        total_mentions += mentions[i];
        cat_mentions[c] += mentions[i];
    }
    const double n_tokens = static_cast<double>(tokens.size());

    FeatureBlock out;
    std::size_t k = 0;
    out.push_back({names[k++], distinct / total_units});
    for (double d : cat_distinct) out.push_back({names[k++], d / total_units});
    for (double m : cat_mentions) out.push_back({names[k++], safe_ratio(m, n_tokens)});
    out.push_back({names[k++], safe_ratio(distinct, total_mentions)});

    for (const auto& space : spaces) {
        Vector centroid(space.dim(), 0.0);
        std::size_t hits = 0;
        for (const auto& u : units)
            for (const auto& l : u.lemmas)
                if (const Vector* v = space.find(l)) {
                    for (std::size_t i = 0; i < centroid.size(); ++i) centroid[i] += (*v)[i];
                    ++hits;
                }
        const auto vecs = utterance_vectors(utterances, space);
        if (hits == 0 || vecs.empty() || norm2(centroid) == 0.0) {
            for (int i = 0; i < 3; ++i) out.push_back({names[k++], std::nullopt});
            continue;
        }
        for (double& x : centroid) x /= static_cast<double>(hits);
        double sum = 0.0, mn = std::numeric_limits<double>::infinity(), mx = -std::numeric_limits<double>::infinity();
        for (const auto& v : vecs) {
            const double d = cosine_distance(v, centroid);
            sum += d;
            mn = std::min(mn, d);
            mx = std::max(mx, d);
        }
        out.push_back({names[k++], sum / static_cast<double>(vecs.size())});
        out.push_back({names[k++], mn});
        out.push_back({names[k++], mx});
    }
    return out;
}

}  // namespace cogspeech::semantics
