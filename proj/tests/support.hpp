#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hgcode/generator.hpp"
#include "hgcode/incidence.hpp"
#include "hgcode/parsing.hpp"
#include "hgcode/tokenizer.hpp"

namespace hgtest {

using hgcode::HyperedgeType;

// One hyperedge as (type, sorted members); graphs are compared as multisets.
using EdgeKey = std::pair<HyperedgeType, std::vector<std::uint32_t>>;

struct OracleGraph {
    std::vector<std::string> tokens;
    std::vector<std::uint32_t> lines;
    std::vector<EdgeKey> edges;  // sorted
};

// Second, independent extraction: recursive walk over the raw tree, lines
// counted from newlines in the source, family groups from subtree ranges.
// Default generator settings only (min size 3, all internal nodes, comments in).
OracleGraph reextract(const hgcode::SyntaxTree& tree, const hgcode::Tokenizer& tok);

std::vector<EdgeKey> edge_multiset(const hgcode::TokenizedHypergraph& g);

hgcode::Tokenizer demo_tokenizer();
std::filesystem::path corpus_dir();

// Random text mixing ASCII, Latin-1, CJK, emoji and control characters,
// UTF-8 encoded.
std::string random_text(std::uint64_t& state, std::size_t max_chars);

}  // namespace hgtest
