#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hgcode/incidence.hpp"
#include "hgcode/parsing.hpp"
#include "hgcode/tokenizer.hpp"

namespace hgcode {

enum class AstScope {
    // Every internal node whose subtree holds enough tokens gets a hyperedge.
    AllInternalNodes,
    // Only the tokens of a node's direct leaf children are grouped.
    DirectParentsOnly,
};

struct GeneratorConfig {
    // Lexical and AST family hyperedges need at least this many tokens.
    std::size_t min_tokens_for_hyperedge = 3;
    AstScope ast_scope = AstScope::AllInternalNodes;
    bool include_comments = true;
    std::optional<std::size_t> max_ast_hyperedge_size;

    // Throws std::invalid_argument when min_tokens_for_hyperedge < 2.
    void check() const;
};

// Postorder extraction of tokens with AST family, lexical and line hyperedges.
// Hyperedge ids are assigned in creation order; incidence is canonical.
TokenizedHypergraph generate(const SyntaxTree& tree, const Tokenizer& tokenizer,
                             const GeneratorConfig& config = {});
TokenizedHypergraph generate(std::string source, Language lang, const Tokenizer& tokenizer,
                             const GeneratorConfig& config = {});

struct Snippet {
    std::string name;
    std::string source;
    Language language;
};

struct CorpusStats {
    std::size_t snippet_count = 0;  // snippets that extracted successfully
    std::size_t failed_count = 0;
    std::vector<std::string> failed;  // names of failed snippets
    std::size_t total_tokens = 0;
    std::size_t total_hyperedges = 0;
    std::size_t total_by_type[kHyperedgeTypeCount] = {};

    double avg_tokens() const;
    double avg_hyperedges() const;
    double avg_of_type(HyperedgeType type) const;
};

// Exact mean total/count rounded half-up to two decimals, e.g. "126.27".
std::string format_mean(std::size_t total, std::size_t count);

// Throws std::invalid_argument on an empty corpus. Snippets that fail to
// extract are excluded from the means and listed in `failed`.
CorpusStats compute_stats(std::span<const Snippet> corpus, const Tokenizer& tokenizer,
                          const GeneratorConfig& config = {}, unsigned threads = 0);

}  // namespace hgcode
