#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hgcode {

// The three kinds of token correlation. Values index per-type parameter
// arrays in the adapter, so the order is fixed.
enum class HyperedgeType : std::uint8_t { AstFamily = 0, Lexical = 1, Line = 2 };

inline constexpr std::size_t kHyperedgeTypeCount = 3;
inline constexpr HyperedgeType kAllHyperedgeTypes[kHyperedgeTypeCount] = {
    HyperedgeType::AstFamily, HyperedgeType::Lexical, HyperedgeType::Line};

std::string_view to_string(HyperedgeType type);
// Throws std::invalid_argument for anything but the three serialized names.
HyperedgeType hyperedge_type_from_string(std::string_view name);

using TypeSet = std::set<HyperedgeType>;
TypeSet all_types();
// Parses a comma separated list such as "lexical,line"; empty string is the empty set.
TypeSet parse_type_list(std::string_view list);

struct IncidencePair {
    std::uint32_t token = 0;
    std::uint32_t edge = 0;

    friend bool operator==(const IncidencePair&, const IncidencePair&) = default;
};

// Canonical order is by (edge, token).
inline bool canonical_less(const IncidencePair& a, const IncidencePair& b) {
    return a.edge != b.edge ? a.edge < b.edge : a.token < b.token;
}

struct TokenizedHypergraph {
    std::vector<std::string> tokens;
    std::size_t token_count = 0;
    std::vector<IncidencePair> incidence;
    std::vector<HyperedgeType> hyperedge_types;
    // 1-based source line per token; 0 marks a token with no source line
    // (special tokens inserted by offset_tokens).
    std::optional<std::vector<std::uint32_t>> line_of_token;
    std::string source_language;
    // Set once truncate_remap has dropped tokens; relaxes the minimum size of
    // AstFamily/Lexical hyperedges from 3 to 2.
    bool truncated = false;

    std::size_t edge_count() const { return hyperedge_types.size(); }

    // Member token ids of each hyperedge, ascending.
    std::vector<std::vector<std::uint32_t>> members() const;
    // Hyperedge ids of each token, ascending.
    std::vector<std::vector<std::uint32_t>> memberships() const;

    friend bool operator==(const TokenizedHypergraph&, const TokenizedHypergraph&) = default;
};

struct Violation {
    std::string rule;
    std::string detail;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;

    bool has(std::string_view rule) const;
};

ValidationReport validate(const TokenizedHypergraph& g);

// Sorts incidence into canonical (edge, token) order.
void canonicalize(TokenizedHypergraph& g);

TokenizedHypergraph truncate_remap(const TokenizedHypergraph& g, std::size_t max_tokens);

// Shifts every token id by `offset` and widens the sequence to `new_total`
// positions. Inserted positions carry empty token text and line 0.
// Throws std::invalid_argument("offset overflow") if offset + N > new_total.
TokenizedHypergraph offset_tokens(const TokenizedHypergraph& g, std::size_t offset,
                                  std::size_t new_total);

TokenizedHypergraph filter_types(const TokenizedHypergraph& g, const TypeSet& enabled);

nlohmann::ordered_json to_json(const TokenizedHypergraph& g);
TokenizedHypergraph hypergraph_from_json(const nlohmann::json& j);

// Compact canonical text (no trailing newline).
std::string serialize(const TokenizedHypergraph& g);
TokenizedHypergraph deserialize(std::string_view text);

}  // namespace hgcode
