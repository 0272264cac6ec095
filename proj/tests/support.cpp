#include "support.hpp"

#include <algorithm>
#include <map>

#include "hgcode/checks.hpp"

namespace hgtest {

namespace {

struct Walk {
    const std::string& src;
    const hgcode::Tokenizer& tok;
    TSNode root;
    OracleGraph out;
    std::map<std::uint32_t, std::vector<std::uint32_t>> by_line;

    std::uint32_t line_at(std::uint32_t byte) const {
        return 1 + static_cast<std::uint32_t>(std::count(src.begin(), src.begin() + byte, '\n'));
    }

    void add_leaf(std::uint32_t a, std::uint32_t b) {
        const auto first = static_cast<std::uint32_t>(out.tokens.size());
        const auto line = line_at(a);
        for (auto& t : tok.tokenize(std::string_view(src).substr(a, b - a))) {
            by_line[line].push_back(static_cast<std::uint32_t>(out.tokens.size()));
            out.tokens.push_back(std::move(t));
            out.lines.push_back(line);
        }
        const auto last = static_cast<std::uint32_t>(out.tokens.size());
        if (last - first >= 3) out.edges.push_back({HyperedgeType::Lexical, range(first, last)});
    }

    // text inside a node that no child covers
    void add_gap(std::uint32_t a, std::uint32_t b) {
        if (b <= a) return;
        const std::string_view gap = std::string_view(src).substr(a, b - a);
        const auto lo = gap.find_first_not_of(" \t\n\r\f\v");
        if (lo == std::string_view::npos) return;
        const auto hi = gap.find_last_not_of(" \t\n\r\f\v");
        add_leaf(a + static_cast<std::uint32_t>(lo), a + static_cast<std::uint32_t>(hi) + 1);
    }

    void visit(TSNode n) {
        const auto first = static_cast<std::uint32_t>(out.tokens.size());
        const std::uint32_t kids = ts_node_child_count(n);
        if (kids == 0 && !ts_node_eq(n, root)) {
            add_leaf(ts_node_start_byte(n), ts_node_end_byte(n));
            return;
        }
        std::uint32_t cursor = ts_node_start_byte(n);
        for (std::uint32_t i = 0; i < kids; ++i) {
            const TSNode c = ts_node_child(n, i);
            add_gap(cursor, ts_node_start_byte(c));
            visit(c);
            cursor = std::max(cursor, ts_node_end_byte(c));
        }
        add_gap(cursor, ts_node_end_byte(n));
        const auto last = static_cast<std::uint32_t>(out.tokens.size());
        if (last - first >= 3) out.edges.push_back({HyperedgeType::AstFamily, range(first, last)});
    }

    static std::vector<std::uint32_t> range(std::uint32_t a, std::uint32_t b) {
        std::vector<std::uint32_t> v;
        for (auto i = a; i < b; ++i) v.push_back(i);
        return v;
    }
};

}  // namespace

OracleGraph reextract(const hgcode::SyntaxTree& tree, const hgcode::Tokenizer& tok) {
    Walk w{tree.source(), tok, tree.root(), {}, {}};
    w.visit(w.root);
    for (auto& [line, members] : w.by_line) w.out.edges.push_back({HyperedgeType::Line, members});
    std::sort(w.out.edges.begin(), w.out.edges.end());
    return std::move(w.out);
}

std::vector<EdgeKey> edge_multiset(const hgcode::TokenizedHypergraph& g) {
    std::vector<EdgeKey> out;
    const auto members = g.members();
    for (std::size_t e = 0; e < g.edge_count(); ++e) out.push_back({g.hyperedge_types[e], members[e]});
    std::sort(out.begin(), out.end());
    return out;
}

hgcode::Tokenizer demo_tokenizer() { return hgcode::load_vocabulary(hgcode::data_dir() / "demo_vocab.json"); }

std::filesystem::path corpus_dir() { return hgcode::data_dir() / "corpus"; }

std::string random_text(std::uint64_t& state, std::size_t max_chars) {
    auto next = [&] {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    };
    auto put = [](std::string& s, std::uint32_t cp) {
        if (cp < 0x80) {
            s += static_cast<char>(cp);
        } else if (cp < 0x800) {
            s += static_cast<char>(0xC0 | (cp >> 6));
            s += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            s += static_cast<char>(0xE0 | (cp >> 12));
            s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            s += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            s += static_cast<char>(0xF0 | (cp >> 18));
            s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            s += static_cast<char>(0x80 | (cp & 0x3F));
        }
    };
    std::string s;
    const std::size_t n = next() % (max_chars + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = next();
        std::uint32_t cp;
        switch (r % 8) {
            case 0: cp = r >> 8 & 0x1F; break;                      // control
            case 1: cp = 0xA0 + (r >> 8) % 0x60; break;             // latin-1
            case 2: cp = 0x4E00 + (r >> 8) % 0x5000; break;         // cjk
            case 3: cp = 0x1F300 + (r >> 8) % 0x300; break;         // emoji
            case 4: cp = " \t\n"[(r >> 8) % 3]; break;
            default: cp = 0x21 + (r >> 8) % 0x5E; break;            // printable ascii
        }
        put(s, cp);
    }
    return s;
}

}  // namespace hgtest
