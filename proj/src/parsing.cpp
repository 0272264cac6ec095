#include "hgcode/parsing.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fmt/format.h>

extern "C" {
const TSLanguage* tree_sitter_ruby(void);
const TSLanguage* tree_sitter_javascript(void);
const TSLanguage* tree_sitter_java(void);
const TSLanguage* tree_sitter_go(void);
const TSLanguage* tree_sitter_php_only(void);
const TSLanguage* tree_sitter_python(void);
}

namespace hgcode {

namespace {

constexpr std::array kLanguages = {Language::Ruby, Language::JavaScript, Language::Java,
                                   Language::Go,   Language::Php,        Language::Python};

struct LanguageEntry {
    Language lang;
    std::string_view name;
    std::array<std::string_view, 3> extensions;
    std::string_view package_version;
};

constexpr std::array kEntries = {
    LanguageEntry{Language::Ruby, "ruby", {"rb", "", ""}, "0.23.1"},
    LanguageEntry{Language::JavaScript, "javascript", {"js", "mjs", "cjs"}, "0.25.0"},
    LanguageEntry{Language::Java, "java", {"java", "", ""}, "0.23.5"},
    LanguageEntry{Language::Go, "go", {"go", "", ""}, "0.25.0"},
    LanguageEntry{Language::Php, "php", {"php", "", ""}, "0.24.2"},
    LanguageEntry{Language::Python, "python", {"py", "", ""}, "0.25.0"},
};

const LanguageEntry& entry(Language lang) {
    return *std::find_if(kEntries.begin(), kEntries.end(), [&](const auto& e) { return e.lang == lang; });
}

std::string lowered(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

struct ParserDeleter {
    void operator()(TSParser* p) const { ts_parser_delete(p); }
};

}  // namespace

UnsupportedLanguage::UnsupportedLanguage(std::string_view name)
    : std::invalid_argument(fmt::format("unsupported language '{}'", name)) {}

std::span<const Language> supported_languages() { return kLanguages; }

std::string_view to_string(Language lang) { return entry(lang).name; }

Language language_from_string(std::string_view name) {
    const std::string key = lowered(name);
    for (const auto& e : kEntries) {
        if (e.name == key) return e.lang;
    }
    throw UnsupportedLanguage(name);
}

Language language_from_extension(std::string_view ext) {
    if (!ext.empty() && ext.front() == '.') ext.remove_prefix(1);
    const std::string key = lowered(ext);
    for (const auto& e : kEntries) {
        for (auto x : e.extensions) {
            if (!x.empty() && x == key) return e.lang;
        }
    }
    throw UnsupportedLanguage(fmt::format("extension .{}", ext));
}

bool is_valid_utf8(std::string_view text) {
    const auto* s = reinterpret_cast<const unsigned char*>(text.data());
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        const unsigned char c = s[i];
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len;
        std::uint32_t cp;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > n) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((s[i + k] & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (s[i + k] & 0x3F);
        }
        static constexpr std::uint32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

const TSLanguage* grammar(Language lang) {
    switch (lang) {
        case Language::Ruby: return tree_sitter_ruby();
        case Language::JavaScript: return tree_sitter_javascript();
        case Language::Java: return tree_sitter_java();
        case Language::Go: return tree_sitter_go();
        case Language::Php: return tree_sitter_php_only();
        case Language::Python: return tree_sitter_python();
    }
    throw UnsupportedLanguage("?");
}

std::span<const GrammarInfo> grammar_versions() {
    static const std::vector<GrammarInfo> infos = [] {
        std::vector<GrammarInfo> out;
        for (const auto& e : kEntries) {
            out.push_back({e.lang, e.package_version, ts_language_abi_version(grammar(e.lang))});
        }
        return out;
    }();
    return infos;
}

std::string_view runtime_version() { return "0.25.1"; }

SyntaxTree::SyntaxTree(TSTree* tree, std::string source, Language lang)
    : tree_(tree), source_(std::move(source)), language_(lang) {}

TSNode SyntaxTree::root() const { return ts_tree_root_node(tree_.get()); }

bool SyntaxTree::has_error() const { return ts_node_has_error(root()); }

SyntaxTree parse(std::string source, Language lang) {
    if (!is_valid_utf8(source)) throw InvalidEncoding();
    std::unique_ptr<TSParser, ParserDeleter> parser(ts_parser_new());
    if (!ts_parser_set_language(parser.get(), grammar(lang))) {
        throw std::runtime_error(fmt::format("grammar for {} has an incompatible ABI", to_string(lang)));
    }
    TSTree* tree = ts_parser_parse_string(parser.get(), nullptr, source.data(),
                                          static_cast<std::uint32_t>(source.size()));
    if (tree == nullptr) throw std::runtime_error("parser returned no tree");
    return SyntaxTree(tree, std::move(source), lang);
}

SyntaxTree parse(std::string source, std::string_view language) {
    return parse(std::move(source), language_from_string(language));
}

LeafInfo make_leaf_info(const SyntaxTree& tree, TSNode node) {
    LeafInfo leaf;
    const std::uint32_t start = ts_node_start_byte(node);
    const std::uint32_t end = std::max(start, ts_node_end_byte(node));
    const auto& src = tree.source();
    leaf.byte_span = {start, end};
    if (start < src.size()) {
        leaf.text = src.substr(start, std::min<std::size_t>(end, src.size()) - start);
    }
    leaf.start_line = ts_node_start_point(node).row + 1;
    leaf.kind = ts_node_type(node);
    leaf.is_comment = leaf.kind.find("comment") != std::string_view::npos;
    leaf.is_error = ts_node_is_error(node) || ts_node_is_missing(node);
    if (!is_valid_utf8(leaf.text)) {
        // Spans from a validated buffer end on code point boundaries; this is
        // only reachable through a grammar reporting a split span.
        std::string repaired;
        for (unsigned char c : leaf.text) repaired.push_back(c < 0x80 ? static_cast<char>(c) : '?');
        leaf.text = std::move(repaired);
        leaf.lossy = true;
    }
    return leaf;
}

std::optional<LeafInfo> make_text_leaf(const SyntaxTree& tree, TSNode parent, std::uint32_t from, std::uint32_t to,
                                       std::uint32_t from_line) {
    const auto& src = tree.source();
    to = std::min<std::uint32_t>(to, static_cast<std::uint32_t>(src.size()));
    auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    std::uint32_t a = from, b = to;
    while (a < b && space(src[a])) ++a;
    while (b > a && space(src[b - 1])) --b;
    if (a == b) return std::nullopt;

    LeafInfo leaf;
    leaf.byte_span = {a, b};
    leaf.text = src.substr(a, b - a);
    leaf.start_line = from_line + 1 + static_cast<std::uint32_t>(std::count(src.begin() + from, src.begin() + a, '\n'));
    leaf.kind = ts_node_type(parent);
    leaf.is_comment = leaf.kind.find("comment") != std::string_view::npos;
    leaf.is_error = ts_node_is_error(parent);
    if (!is_valid_utf8(leaf.text)) {
        std::string repaired;
        for (unsigned char c : leaf.text) repaired.push_back(c < 0x80 ? static_cast<char>(c) : '?');
        leaf.text = std::move(repaired);
        leaf.lossy = true;
    }
    return leaf;
}

NodeInfo make_node_info(const SyntaxTree& tree, TSNode node) {
    NodeInfo info;
    info.kind = ts_node_type(node);
    info.start_line = ts_node_start_point(node).row + 1;
    info.byte_span = {ts_node_start_byte(node), ts_node_end_byte(node)};
    info.is_root = ts_node_eq(node, tree.root());
    info.is_error = ts_node_is_error(node);
    return info;
}

namespace {

struct LeafCollector {
    std::vector<LeafInfo>* out;
    int on_leaf(const LeafInfo& leaf) {
        out->push_back(leaf);
        return 0;
    }
    int on_internal(const NodeInfo&, std::vector<int>&&) { return 0; }
};

struct KindCollector {
    std::vector<std::string>* out;
    int on_leaf(const LeafInfo& leaf) {
        out->emplace_back(leaf.kind);
        return 0;
    }
    int on_internal(const NodeInfo& node, std::vector<int>&&) {
        out->emplace_back(node.kind);
        return 0;
    }
};

}  // namespace

std::vector<LeafInfo> collect_leaves(const SyntaxTree& tree) {
    std::vector<LeafInfo> out;
    postorder(tree, LeafCollector{&out});
    return out;
}

std::vector<std::string> postorder_kinds(const SyntaxTree& tree) {
    std::vector<std::string> out;
    postorder(tree, KindCollector{&out});
    return out;
}

}  // namespace hgcode
