#include "hgcode/incidence.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace hgcode {

std::string_view to_string(HyperedgeType type) {
    switch (type) {
        case HyperedgeType::AstFamily: return "ast_family";
        case HyperedgeType::Lexical: return "lexical";
        case HyperedgeType::Line: return "line";
    }
    return "?";
}

HyperedgeType hyperedge_type_from_string(std::string_view name) {
    for (HyperedgeType t : kAllHyperedgeTypes) {
        if (to_string(t) == name) return t;
    }
    throw std::invalid_argument(fmt::format("unknown hyperedge type '{}'", name));
}

TypeSet all_types() { return TypeSet(std::begin(kAllHyperedgeTypes), std::end(kAllHyperedgeTypes)); }

TypeSet parse_type_list(std::string_view list) {
    TypeSet out;
    while (!list.empty()) {
        auto comma = list.find(',');
        auto item = list.substr(0, comma);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.insert(hyperedge_type_from_string(item));
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<std::vector<std::uint32_t>> TokenizedHypergraph::members() const {
    std::vector<std::vector<std::uint32_t>> out(edge_count());
    for (const auto& p : incidence) {
        if (p.edge < out.size()) out[p.edge].push_back(p.token);
    }
    for (auto& m : out) std::sort(m.begin(), m.end());
    return out;
}

std::vector<std::vector<std::uint32_t>> TokenizedHypergraph::memberships() const {
    std::vector<std::vector<std::uint32_t>> out(token_count);
    for (const auto& p : incidence) {
        if (p.token < out.size()) out[p.token].push_back(p.edge);
    }
    for (auto& m : out) std::sort(m.begin(), m.end());
    return out;
}

bool ValidationReport::has(std::string_view rule) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.rule == rule; });
}

ValidationReport validate(const TokenizedHypergraph& g) {
    ValidationReport report;
    auto fail = [&](std::string rule, std::string detail) {
        report.violations.push_back({std::move(rule), std::move(detail)});
    };

    const std::size_t n = g.token_count;
    const std::size_t e = g.edge_count();

    if (g.tokens.size() != n) {
        fail("token_count mismatch", fmt::format("{} token strings, token_count {}", g.tokens.size(), n));
    }
    if (g.line_of_token && g.line_of_token->size() != n) {
        fail("line_of_token length", fmt::format("{} entries, token_count {}", g.line_of_token->size(), n));
    }

    std::vector<std::size_t> edge_size(e, 0);
    for (std::size_t i = 0; i < g.incidence.size(); ++i) {
        const auto& p = g.incidence[i];
        if (p.token >= n) {
            fail("token_id out of range", fmt::format("pair {} has token_id {} but N={}", i, p.token, n));
        }
        if (p.edge >= e) {
            fail("hyperedge_id out of range", fmt::format("pair {} has hyperedge_id {} but E={}", i, p.edge, e));
        } else {
            ++edge_size[p.edge];
        }
        if (i > 0) {
            const auto& prev = g.incidence[i - 1];
            if (prev == p) {
                fail("duplicate pair", fmt::format("({}, {})", p.token, p.edge));
            } else if (!canonical_less(prev, p)) {
                fail("incidence not sorted", fmt::format("pair {} precedes pair {}", i - 1, i));
            }
        }
    }

    const std::size_t min_group = g.truncated ? 2 : 3;
    for (std::size_t id = 0; id < e; ++id) {
        const auto size = edge_size[id];
        if (size == 0) {
            fail("hyperedge ids not contiguous", fmt::format("hyperedge {} has no members", id));
            continue;
        }
        const auto type = g.hyperedge_types[id];
        if (type != HyperedgeType::Line && size < min_group) {
            fail(fmt::format("{} size < {}", to_string(type), min_group),
                 fmt::format("hyperedge {} has {} members", id, size));
        }
    }

    report.ok = report.violations.empty();
    return report;
}

void canonicalize(TokenizedHypergraph& g) {
    std::sort(g.incidence.begin(), g.incidence.end(), canonical_less);
}

namespace {

// Keeps the hyperedges flagged in `keep`, renumbering them in original order.
void retain_edges(TokenizedHypergraph& g, const std::vector<bool>& keep) {
    std::vector<std::uint32_t> remap(keep.size(), 0);
    std::vector<HyperedgeType> types;
    for (std::size_t id = 0; id < keep.size(); ++id) {
        if (keep[id]) {
            remap[id] = static_cast<std::uint32_t>(types.size());
            types.push_back(g.hyperedge_types[id]);
        }
    }
    std::vector<IncidencePair> pairs;
    pairs.reserve(g.incidence.size());
    for (const auto& p : g.incidence) {
        if (keep[p.edge]) pairs.push_back({p.token, remap[p.edge]});
    }
    g.incidence = std::move(pairs);
    g.hyperedge_types = std::move(types);
    canonicalize(g);
}

}  // namespace

TokenizedHypergraph truncate_remap(const TokenizedHypergraph& g, std::size_t max_tokens) {
    if (max_tokens >= g.token_count) return g;

    TokenizedHypergraph out = g;
    out.token_count = max_tokens;
    if (out.tokens.size() > max_tokens) out.tokens.resize(max_tokens);
    if (out.line_of_token && out.line_of_token->size() > max_tokens) out.line_of_token->resize(max_tokens);
    std::erase_if(out.incidence, [&](const IncidencePair& p) { return p.token >= max_tokens; });

    std::vector<std::size_t> size(out.edge_count(), 0);
    for (const auto& p : out.incidence) ++size[p.edge];
    std::vector<bool> keep(out.edge_count());
    for (std::size_t id = 0; id < keep.size(); ++id) keep[id] = size[id] >= 2;
    retain_edges(out, keep);
    out.truncated = true;
    return out;
}

TokenizedHypergraph offset_tokens(const TokenizedHypergraph& g, std::size_t offset, std::size_t new_total) {
    if (offset + g.token_count > new_total) throw std::invalid_argument("offset overflow");

    TokenizedHypergraph out = g;
    const std::size_t tail = new_total - offset - g.token_count;
    out.tokens.insert(out.tokens.begin(), offset, std::string{});
    out.tokens.insert(out.tokens.end(), tail, std::string{});
    if (out.line_of_token) {
        auto& lines = *out.line_of_token;
        lines.insert(lines.begin(), offset, 0u);
        lines.insert(lines.end(), tail, 0u);
    }
    for (auto& p : out.incidence) p.token += static_cast<std::uint32_t>(offset);
    out.token_count = new_total;
    return out;
}

TokenizedHypergraph filter_types(const TokenizedHypergraph& g, const TypeSet& enabled) {
    TokenizedHypergraph out = g;
    std::vector<bool> keep(g.edge_count());
    for (std::size_t id = 0; id < keep.size(); ++id) keep[id] = enabled.contains(g.hyperedge_types[id]);
    retain_edges(out, keep);
    return out;
}

nlohmann::ordered_json to_json(const TokenizedHypergraph& g) {
    TokenizedHypergraph sorted = g;
    canonicalize(sorted);

    nlohmann::ordered_json j;
    j["tokens"] = sorted.tokens;
    j["token_count"] = sorted.token_count;
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& p : sorted.incidence) pairs.push_back({p.token, p.edge});
    j["incidence"] = std::move(pairs);
    auto types = nlohmann::ordered_json::array();
    for (auto t : sorted.hyperedge_types) types.push_back(to_string(t));
    j["hyperedge_types"] = std::move(types);
    if (sorted.line_of_token) {
        j["line_of_token"] = *sorted.line_of_token;
    } else {
        j["line_of_token"] = nullptr;
    }
    j["source_language"] = sorted.source_language;
    if (sorted.truncated) j["truncated"] = true;
    return j;
}

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw std::invalid_argument(fmt::format("missing field '{}'", name));
    return *it;
}

std::uint32_t as_index(const nlohmann::json& v, const char* what) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw std::invalid_argument(fmt::format("field '{}' must hold non-negative integers", what));
    }
    return v.get<std::uint32_t>();
}

}  // namespace

TokenizedHypergraph hypergraph_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("hypergraph JSON must be an object");
    static const std::set<std::string> known = {"tokens", "token_count", "incidence", "hyperedge_types",
                                                "line_of_token", "source_language", "truncated"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw std::invalid_argument(fmt::format("unknown field '{}'", key));
    }

    TokenizedHypergraph g;
    const auto& tokens = field(j, "tokens");
    if (!tokens.is_array()) throw std::invalid_argument("field 'tokens' must be an array");
    for (const auto& t : tokens) {
        if (!t.is_string()) throw std::invalid_argument("field 'tokens' must hold strings");
        g.tokens.push_back(t.get<std::string>());
    }
    g.token_count = as_index(field(j, "token_count"), "token_count");

    const auto& pairs = field(j, "incidence");
    if (!pairs.is_array()) throw std::invalid_argument("field 'incidence' must be an array");
    for (const auto& p : pairs) {
        if (!p.is_array() || p.size() != 2) {
            throw std::invalid_argument("field 'incidence' must hold [token_id, hyperedge_id] pairs");
        }
        g.incidence.push_back({as_index(p[0], "incidence"), as_index(p[1], "incidence")});
    }

    const auto& types = field(j, "hyperedge_types");
    if (!types.is_array()) throw std::invalid_argument("field 'hyperedge_types' must be an array");
    for (const auto& t : types) {
        if (!t.is_string()) throw std::invalid_argument("field 'hyperedge_types' must hold strings");
        g.hyperedge_types.push_back(hyperedge_type_from_string(t.get<std::string>()));
    }

    const auto& lines = field(j, "line_of_token");
    if (!lines.is_null()) {
        if (!lines.is_array()) throw std::invalid_argument("field 'line_of_token' must be an array or null");
        std::vector<std::uint32_t> values;
        for (const auto& l : lines) values.push_back(as_index(l, "line_of_token"));
        g.line_of_token = std::move(values);
    }

    const auto& lang = field(j, "source_language");
    if (!lang.is_string()) throw std::invalid_argument("field 'source_language' must be a string");
    g.source_language = lang.get<std::string>();

    if (auto it = j.find("truncated"); it != j.end()) {
        if (!it->is_boolean()) throw std::invalid_argument("field 'truncated' must be a boolean");
        g.truncated = it->get<bool>();
    }
    return g;
}

std::string serialize(const TokenizedHypergraph& g) { return to_json(g).dump(); }

TokenizedHypergraph deserialize(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(fmt::format("malformed hypergraph JSON: {}", e.what()));
    }
    return hypergraph_from_json(j);
}

}  // namespace hgcode
