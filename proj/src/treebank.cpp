#include "cogspeech/treebank.hpp"

#include "builtin_data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace cogspeech::treebank {
namespace {

class BracketParser {
public:
    explicit BracketParser(std::string_view text) : text_(text) {}

    ParseTree parse_root() {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != '(') throw ParseError("expected '('", pos_);
        ParseTree t = parse_node();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("trailing characters after tree", pos_);
        return t;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string symbol() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    ParseTree parse_node() {
        const std::size_t open = pos_;
        ++pos_;  // '('
        skip_ws();
        ParseTree node;
        if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') node.label = symbol();
        std::vector<std::string> words;
        for (;;) {
            skip_ws();
            if (pos_ >= text_.size()) throw ParseError("unbalanced brackets: missing ')'", pos_);
            const char c = text_[pos_];
            if (c == ')') {
                ++pos_;
                break;
            }
            if (c == '(') {
                node.children.push_back(parse_node());
            } else {
                words.push_back(symbol());
            }
        }
        if (node.children.empty() && words.empty()) throw ParseError("empty node", open);
        if (!words.empty()) {
            if (!node.children.empty() || words.size() != 1 || node.label.empty())
                throw ParseError("preterminal must hold exactly one token", open);
            ParseTree leaf;
            leaf.leaf = words.front();
            node.children.push_back(std::move(leaf));
        }
        if (node.label.empty()) node.label = "ROOT";
        return node;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

const ParseTree& unwrap(const ParseTree& t) {
    const ParseTree* cur = &t;
    while (cur->label == "ROOT" && cur->children.size() == 1 && !cur->is_preterminal()) cur = &cur->children[0];
    return *cur;
}

const std::set<std::string>& punct_tags() {
    static const std::set<std::string> tags = {".", ",", ":", "``", "''", "-LRB-", "-RRB-", "HYPH", "NFP"};
    return tags;
}

bool is_word_tag(const std::string& tag) { return !punct_tags().contains(tag); }

bool is_finite_verb_tag(const std::string& tag) {
    return tag == "MD" || tag == "VBZ" || tag == "VBP" || tag == "VBD";
}

bool is_verb_tag(const std::string& tag) { return tag.size() >= 2 && tag[0] == 'V' && tag[1] == 'B'; }

void collect_productions(const ParseTree& t, std::vector<std::string>& out) {
    if (t.is_leaf() || t.is_preterminal()) return;
    if (t.label != "ROOT") {
        std::string sig = t.label + " ->";
        for (const auto& c : t.children) sig += " " + c.label;
        out.push_back(std::move(sig));
    }
    for (const auto& c : t.children) collect_productions(c, out);
}

void collect_preterminals(const ParseTree& t, std::vector<TaggedWord>& out) {
    if (t.is_leaf()) return;
    if (t.is_preterminal()) {
        out.push_back({t.label, *t.children[0].leaf});
        return;
    }
    for (const auto& c : t.children) collect_preterminals(c, out);
}

int word_span(const ParseTree& t) {
    if (t.is_leaf()) return 0;
    if (t.is_preterminal()) return is_word_tag(t.label) ? 1 : 0;
    int n = 0;
    for (const auto& c : t.children) n += word_span(c);
    return n;
}

bool is_finite_vp(const ParseTree& t) {
    if (t.label != "VP") return false;
    return std::any_of(t.children.begin(), t.children.end(),
                       [](const ParseTree& c) { return c.is_preterminal() && is_finite_verb_tag(c.label); });
}

bool is_clause(const ParseTree& t) {
    if (t.label != "S" && t.label != "SINV" && t.label != "SQ") return false;
    return std::any_of(t.children.begin(), t.children.end(), [](const ParseTree& c) {
        return is_finite_vp(c) || (c.is_preterminal() && is_finite_verb_tag(c.label));
    });
}

bool is_dependent_clause(const ParseTree& t) {
    if (t.label != "SBAR") return false;
    return std::any_of(t.children.begin(), t.children.end(), [](const ParseTree& c) { return is_clause(c); });
}

bool contains(const ParseTree& t, const std::function<bool(const ParseTree&)>& pred) {
    if (pred(t)) return true;
    return std::any_of(t.children.begin(), t.children.end(), [&](const ParseTree& c) { return contains(c, pred); });
}

int count_nodes(const ParseTree& t, const std::function<bool(const ParseTree&)>& pred) {
    int n = pred(t) ? 1 : 0;
    for (const auto& c : t.children) n += count_nodes(c, pred);
    return n;
}

// Independent clauses at the top of an utterance; coordination "S -> S CC S"
// splits into its conjunct T-units.
void collect_tunits(const ParseTree& t, std::vector<const ParseTree*>& out, bool top) {
    if (t.label == "S") {
        const bool has_cc = std::any_of(t.children.begin(), t.children.end(), [](const ParseTree& c) { return c.label == "CC"; });
        const auto n_s = std::count_if(t.children.begin(), t.children.end(), [](const ParseTree& c) { return c.label == "S"; });
        if (has_cc && n_s >= 2) {
            for (const auto& c : t.children)
                if (c.label == "S") collect_tunits(c, out, false);
            return;
        }
    }
    static const std::set<std::string> clause_labels = {"S", "SINV", "SQ", "SBARQ", "FRAG"};
    if (clause_labels.contains(t.label) || top) out.push_back(&t);
}

void universal_walk(const ParseTree& t, const ProductionRegistry& reg, std::vector<std::string>& out) {
    if (t.is_leaf()) return;
    if (t.is_preterminal()) return;
    for (std::size_t i = 0; i < t.children.size(); ++i) {
        const auto& c = t.children[i];
        if (c.is_preterminal()) {
            std::string u = reg.universal_of(c.label).value_or("X");
            if (c.label == "IN" && t.label == "SBAR" && i == 0) u = "SCONJ";
            if ((is_verb_tag(c.label) || c.label == "MD") && i + 1 < t.children.size() && t.children[i + 1].label == "VP")
                u = "AUX";
            out.push_back(std::move(u));
        } else {
            universal_walk(c, reg, out);
        }
    }
}

}  // namespace

ParseTree parse_bracketed(std::string_view text) { return BracketParser(text).parse_root(); }

std::string to_bracketed(const ParseTree& t) {
    if (t.is_leaf()) return *t.leaf;
    std::string out = "(" + t.label;
    for (const auto& c : t.children) out += " " + to_bracketed(c);
    out += ")";
    return out;
}

int tree_depth(const ParseTree& t) {
    if (t.is_leaf()) return 0;
    int d = 0;
    for (const auto& c : t.children) d = std::max(d, tree_depth(c));
    return d + 1;
}

std::vector<TaggedWord> preterminals(const ParseTree& tree) {
    std::vector<TaggedWord> out;
    collect_preterminals(tree, out);
    return out;
}

std::vector<std::string> productions(const ParseTree& tree) {
    std::vector<std::string> out;
    collect_productions(tree, out);
    return out;
}

ProductionRegistry ProductionRegistry::parse(std::string_view text) {
    ProductionRegistry reg;
    std::string section;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        if (section == "rules") {
            const auto arrow = line.find("->");
            if (arrow == std::string::npos) throw ParseError("registry rule without '->'", line_no);
            std::string sig = trim(line.substr(0, arrow)) + " ->";
            std::istringstream rhs(line.substr(arrow + 2));
            std::string sym;
            while (rhs >> sym) sig += " " + sym;
            reg.rules_.push_back(std::move(sig));
        } else if (section == "pos") {
            reg.pos_.push_back(line);
        } else if (section == "universal") {
            reg.universal_.push_back(line);
        } else if (section == "map") {
            std::istringstream is(line);
            std::string from, to;
            if (!(is >> from >> to)) throw ParseError("registry map line needs two fields", line_no);
            reg.map_[from] = to;
        } else {
            throw ParseError("registry line outside a known section", line_no);
        }
    }
    if (reg.rules_.size() != kRuleCount || reg.pos_.size() != kPosCount || reg.universal_.size() != kUniversalCount)
        throw ConfigError("syntax registry must list 104 rules, 53 POS tags and 18 universal tags; got " +
                          std::to_string(reg.rules_.size()) + "/" + std::to_string(reg.pos_.size()) + "/" +
                          std::to_string(reg.universal_.size()));
    std::set<std::string> uniq(reg.rules_.begin(), reg.rules_.end());
    if (uniq.size() != reg.rules_.size()) throw ConfigError("syntax registry lists a rule twice");
    for (const auto& [from, to] : reg.map_)
        if (std::find(reg.universal_.begin(), reg.universal_.end(), to) == reg.universal_.end())
            throw ConfigError("map target '" + to + "' is not a universal tag");
    return reg;
}

ProductionRegistry ProductionRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open syntax registry: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const ProductionRegistry& ProductionRegistry::builtin() {
    static const ProductionRegistry reg = parse(detail::kSyntaxRegistryText);
    return reg;
}

std::optional<std::string> ProductionRegistry::universal_of(const std::string& tag) const {
    auto it = map_.find(tag);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> universal_tags(const ParseTree& tree, const ProductionRegistry& registry) {
    std::vector<std::string> out;
    const ParseTree& t = unwrap(tree);
    if (t.is_preterminal()) {
        out.push_back(registry.universal_of(t.label).value_or("X"));
        return out;
    }
    universal_walk(t, registry, out);
    return out;
}

Tense utterance_tense(const ParseTree& tree) {
    for (const auto& tw : preterminals(tree)) {
        if (tw.tag == "VBD" || tw.tag == "VBN") return Tense::Past;
        if (tw.tag == "VBP" || tw.tag == "VBZ" || tw.tag == "VBG") return Tense::Present;
    }
    return Tense::None;
}

std::vector<std::string> syntax_feature_names(const ProductionRegistry& registry) {
    std::vector<std::string> names;
    for (const char* n : {"W", "S", "VP", "C", "T", "DC", "CT", "CP", "CN"}) names.push_back(std::string("syn_count_") + n);
    for (const char* n : {"MLS", "MLT", "MLC", "C_S", "VP_T", "C_T", "DC_C", "DC_T", "T_S", "CT_T", "CP_T", "CP_C", "CN_T", "CN_C"})
        names.push_back(std::string("syn_index_") + n);
    for (const char* n : {"max_utt_len", "min_utt_len", "mean_utt_len", "max_tree_depth", "mean_tree_depth"})
        names.push_back(std::string("syn_") + n);
    for (const char* n : {"NP", "VP", "PP", "SBAR", "ADVP", "ADJP", "WH", "CC"}) names.push_back(std::string("syn_per_utt_") + n);
    for (const auto& rule : registry.rules()) {
        std::string n = "prod";
        std::istringstream is(rule);
        std::string sym;
        while (is >> sym) {
            if (sym == "->") sym = "to";
            else if (sym == ",") sym = "COMMA";
            else if (sym == ".") sym = "PERIOD";
            std::replace(sym.begin(), sym.end(), '$', 'S');
            n += "_" + sym;
        }
        names.push_back(std::move(n));
    }
    for (const char* x : {"NP", "VP", "PP"}) {
        names.push_back(std::string("phr_") + x + "_proportion");
        names.push_back(std::string("phr_") + x + "_avg_length");
        names.push_back(std::string("phr_") + x + "_rate");
    }
    for (const char* n : {"phr_core_proportion", "phr_core_avg_length", "phr_NP_VP_ratio", "phr_PP_NP_ratio"}) names.emplace_back(n);
    for (const auto& tag : registry.pos_tags()) names.push_back("pos_" + tag);
    for (const auto& tag : registry.universal_tags()) names.push_back("upos_" + tag);
    names.emplace_back("cohesion_tense_switch_rate");
    return names;
}

FeatureBlock syntax_features(const std::vector<ParseTree>& trees, const ProductionRegistry& registry) {
    std::vector<const ParseTree*> tops;
    for (const auto& t : trees) tops.push_back(&unwrap(t));
    std::size_t n_pre = 0;
    for (const auto* t : tops) n_pre += preterminals(*t).size();
    if (tops.empty() || n_pre == 0) throw DataError("syntax features need at least one tree with preterminals");

    // Complexity counts.
    double W = 0, S = 0, VPc = 0, C = 0, T = 0, DC = 0, CT = 0, CP = 0, CN = 0;
    std::vector<double> utt_len, depth;
    double np = 0, vp = 0, pp = 0, sbar = 0, advp = 0, adjp = 0, wh = 0, cc = 0;
    for (const auto* t : tops) {
        const int len = word_span(*t);
        W += len;
        S += 1;
        utt_len.push_back(len);
        depth.push_back(tree_depth(*t));
        VPc += count_nodes(*t, is_finite_vp);
        C += count_nodes(*t, is_clause);
        DC += count_nodes(*t, is_dependent_clause);
        std::vector<const ParseTree*> tunits;
        collect_tunits(*t, tunits, true);
        T += static_cast<double>(tunits.size());
        for (const auto* tu : tunits) CT += contains(*tu, is_dependent_clause) ? 1 : 0;
        CP += count_nodes(*t, [](const ParseTree& n) {
            if (n.label != "ADJP" && n.label != "ADVP" && n.label != "NP" && n.label != "VP") return false;
            return std::any_of(n.children.begin(), n.children.end(), [](const ParseTree& c) { return c.label == "CC"; });
        });
        CN += count_nodes(*t, [](const ParseTree& n) {
            if (n.label != "NP") return false;
            static const std::set<std::string> mods = {"JJ", "JJR", "JJS", "ADJP", "PP", "SBAR", "POS", "VP"};
            return std::any_of(n.children.begin(), n.children.end(), [](const ParseTree& c) { return mods.contains(c.label); });
        });
        auto label_count = [&](const char* l) {
            return count_nodes(*t, [l](const ParseTree& n) { return !n.is_leaf() && !n.is_preterminal() && n.label == l; });
        };
        np += label_count("NP");
        vp += label_count("VP");
        pp += label_count("PP");
        sbar += label_count("SBAR");
        advp += label_count("ADVP");
        adjp += label_count("ADJP");
        wh += count_nodes(*t, [](const ParseTree& n) { return !n.is_preterminal() && n.label.rfind("WH", 0) == 0; });
        cc += count_nodes(*t, [](const ParseTree& n) { return n.is_preterminal() && n.label == "CC"; });
    }

    FeatureBlock out;
    const auto names = syntax_feature_names(registry);
    std::size_t k = 0;
    auto emit = [&](MaybeValue v) { out.push_back({names[k++], v}); };
    for (double v : {W, S, VPc, C, T, DC, CT, CP, CN}) emit(v);
    emit(safe_ratio(W, S));
    emit(safe_ratio(W, T));
    emit(safe_ratio(W, C));
    emit(safe_ratio(C, S));
    emit(safe_ratio(VPc, T));
    emit(safe_ratio(C, T));
    emit(safe_ratio(DC, C));
    emit(safe_ratio(DC, T));
    emit(safe_ratio(T, S));
    emit(safe_ratio(CT, T));
    emit(safe_ratio(CP, T));
    emit(safe_ratio(CP, C));
    emit(safe_ratio(CN, T));
    emit(safe_ratio(CN, C));
    emit(*std::max_element(utt_len.begin(), utt_len.end()));
    emit(*std::min_element(utt_len.begin(), utt_len.end()));
    emit(mean_of(utt_len));
    emit(*std::max_element(depth.begin(), depth.end()));
    emit(mean_of(depth));
    for (double v : {np, vp, pp, sbar, advp, adjp, wh, cc}) emit(v / S);

    // Production-rule proportions.
    std::unordered_map<std::string, double> rule_counts;
    double total_prods = 0;
    for (const auto* t : tops)
        for (auto& p : productions(*t)) {
            rule_counts[p] += 1;
            total_prods += 1;
        }
    for (const auto& rule : registry.rules()) {
        auto it = rule_counts.find(rule);
        const double c = it == rule_counts.end() ? 0.0 : it->second;
        emit(total_prods > 0 ? MaybeValue(c / total_prods) : MaybeValue(0.0));
    }

    // Phrasal type ratios.
    std::map<std::string, std::vector<double>> phrase_len;
    for (const auto* t : tops) {
        std::function<void(const ParseTree&)> walk = [&](const ParseTree& n) {
            if (n.is_leaf() || n.is_preterminal()) return;
            if (n.label == "NP" || n.label == "VP" || n.label == "PP") phrase_len[n.label].push_back(word_span(n));
            for (const auto& c : n.children) walk(c);
        };
        walk(*t);
    }
    std::vector<double> core_lengths;
    for (const char* x : {"NP", "VP", "PP"}) {
        const auto& lens = phrase_len[x];
        const double cnt = static_cast<double>(lens.size());
        emit(safe_ratio(cnt, total_prods));
        emit(lens.empty() ? MaybeValue() : MaybeValue(mean_of(lens)));
        emit(safe_ratio(cnt, W));
        core_lengths.insert(core_lengths.end(), lens.begin(), lens.end());
    }
    emit(safe_ratio(static_cast<double>(core_lengths.size()), total_prods));
    emit(core_lengths.empty() ? MaybeValue() : MaybeValue(mean_of(core_lengths)));
    emit(safe_ratio(static_cast<double>(phrase_len["NP"].size()), static_cast<double>(phrase_len["VP"].size())));
    emit(safe_ratio(static_cast<double>(phrase_len["PP"].size()), static_cast<double>(phrase_len["NP"].size())));

    // POS and universal POS proportions over all preterminals.
    std::unordered_map<std::string, double> pos_counts, upos_counts;
    for (const auto* t : tops) {
        for (const auto& tw : preterminals(*t)) pos_counts[tw.tag] += 1;
        for (const auto& u : universal_tags(*t, registry)) upos_counts[u] += 1;
    }
    const double npre = static_cast<double>(n_pre);
    for (const auto& tag : registry.pos_tags()) emit(pos_counts.contains(tag) ? pos_counts[tag] / npre : 0.0);
    for (const auto& tag : registry.universal_tags()) emit(upos_counts.contains(tag) ? upos_counts[tag] / npre : 0.0);

    // Tense switches between consecutive verb-bearing utterances.
    double switches = 0;
    Tense prev = Tense::None;
    for (const auto* t : tops) {
        const Tense cur = utterance_tense(*t);
        if (cur == Tense::None) continue;
        if (prev != Tense::None && cur != prev) switches += 1;
        prev = cur;
    }
    emit(switches / S);
    return out;
}

std::vector<std::optional<ParseTree>> parse_trees_file(std::string_view text) {
    std::vector<std::optional<ParseTree>> out;
    auto lines = split(text, '\n');
    if (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    for (const auto& line : lines) {
        if (trim(line).empty()) out.emplace_back(std::nullopt);
        else out.emplace_back(parse_bracketed(line));
    }
    return out;
}

}  // namespace cogspeech::treebank
