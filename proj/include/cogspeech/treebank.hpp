#pragma once

#include "cogspeech/common.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cogspeech::treebank {

/// Constituency tree node. Leaves carry the token text and have no label;
/// a preterminal is a labeled node with exactly one leaf child.
struct ParseTree {
    std::string label;
    std::vector<ParseTree> children;
    std::optional<std::string> leaf;

    bool is_leaf() const noexcept { return leaf.has_value(); }
    bool is_preterminal() const noexcept { return children.size() == 1 && children[0].is_leaf(); }
    bool operator==(const ParseTree&) const = default;
};

ParseTree parse_bracketed(std::string_view text);
std::string to_bracketed(const ParseTree& tree);

/// Nonterminal depth: a preterminal has depth 1.
int tree_depth(const ParseTree& tree);

struct TaggedWord {
    std::string tag;
    std::string word;
};
std::vector<TaggedWord> preterminals(const ParseTree& tree);

/// "LHS -> C1 C2 ..." for every phrasal node (not preterminals, not ROOT).
std::vector<std::string> productions(const ParseTree& tree);

class ProductionRegistry {
public:
    static constexpr std::size_t kRuleCount = 104;
    static constexpr std::size_t kPosCount = 53;
    static constexpr std::size_t kUniversalCount = 18;

    /// Parses the sectioned registry text; validates the section sizes.
    static ProductionRegistry parse(std::string_view text);
    static ProductionRegistry load(const std::string& path);
    /// The registry compiled into the library.
    static const ProductionRegistry& builtin();

    const std::vector<std::string>& rules() const noexcept { return rules_; }
    const std::vector<std::string>& pos_tags() const noexcept { return pos_; }
    const std::vector<std::string>& universal_tags() const noexcept { return universal_; }
    std::optional<std::string> universal_of(const std::string& ptb_tag) const;

private:
    std::vector<std::string> rules_;
    std::vector<std::string> pos_;
    std::vector<std::string> universal_;
    std::map<std::string, std::string> map_;
};

inline constexpr std::size_t kComplexityCount = 36;
inline constexpr std::size_t kPhrasalCount = 13;
inline constexpr std::size_t kSyntaxFeatureCount = 36 + 104 + 13 + 53 + 18 + 1;

/// Names of the syntax block in output order.
std::vector<std::string> syntax_feature_names(const ProductionRegistry& registry);

/// All 225 syntax-derived features for one transcript. `trees` holds one
/// entry per parsed participant utterance. Throws DataError when no tree
/// contains a preterminal.
FeatureBlock syntax_features(const std::vector<ParseTree>& trees, const ProductionRegistry& registry);

/// Universal tags for the preterminals of `tree`, applying the context rules.
std::vector<std::string> universal_tags(const ParseTree& tree, const ProductionRegistry& registry);

enum class Tense { None, Past, Present };
Tense utterance_tense(const ParseTree& tree);

/// Reads a .trees file: one bracketed tree per line, blank line = no parse.
std::vector<std::optional<ParseTree>> parse_trees_file(std::string_view text);

}  // namespace cogspeech::treebank
