#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

extern "C" {
#include <tree_sitter/api.h>
}

namespace hgcode {

// The six CodeSearchNet languages.
enum class Language { Ruby, JavaScript, Java, Go, Php, Python };

std::span<const Language> supported_languages();
std::string_view to_string(Language lang);
// Throws UnsupportedLanguage.
Language language_from_string(std::string_view name);
// Maps a file extension (".py", "rb", ...) to a language; throws UnsupportedLanguage.
Language language_from_extension(std::string_view ext);

struct UnsupportedLanguage : std::invalid_argument {
    explicit UnsupportedLanguage(std::string_view name);
};

struct InvalidEncoding : std::invalid_argument {
    InvalidEncoding() : std::invalid_argument("invalid encoding") {}
};

bool is_valid_utf8(std::string_view text);

// Grammar registry.
const TSLanguage* grammar(Language lang);
struct GrammarInfo {
    Language language;
    std::string_view package_version;
    std::uint32_t abi_version;
};
std::span<const GrammarInfo> grammar_versions();
std::string_view runtime_version();

struct ByteSpan {
    std::uint32_t start = 0;
    std::uint32_t end = 0;

    friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

struct LeafInfo {
    std::string text;
    std::uint32_t start_line = 1;  // 1-based
    ByteSpan byte_span;
    std::string_view kind;
    bool is_comment = false;
    bool is_error = false;  // error-recovery or missing node
    bool lossy = false;     // text needed lossy UTF-8 decoding
};

struct NodeInfo {
    std::string_view kind;
    std::uint32_t start_line = 1;
    ByteSpan byte_span;
    bool is_root = false;
    bool is_error = false;
};

class SyntaxTree {
public:
    SyntaxTree(TSTree* tree, std::string source, Language lang);

    TSNode root() const;
    const std::string& source() const { return source_; }
    Language language() const { return language_; }
    bool has_error() const;

private:
    struct TreeDeleter {
        void operator()(TSTree* t) const { ts_tree_delete(t); }
    };
    std::unique_ptr<TSTree, TreeDeleter> tree_;
    std::string source_;
    Language language_;
};

SyntaxTree parse(std::string source, Language lang);
SyntaxTree parse(std::string source, std::string_view language);

LeafInfo make_leaf_info(const SyntaxTree& tree, TSNode node);
NodeInfo make_node_info(const SyntaxTree& tree, TSNode node);

// Source text that belongs to `parent` but to none of its children (the
// ".3f" of a Python format specifier, say), trimmed of surrounding
// whitespace. `from_line` is the 0-based row at byte `from`. Empty when the
// range holds only whitespace. Such text is reported as a leaf of its own,
// with the parent's kind.
std::optional<LeafInfo> make_text_leaf(const SyntaxTree& tree, TSNode parent, std::uint32_t from, std::uint32_t to,
                                       std::uint32_t from_line);

// A leaf is a childless node other than the root. The root is always reported
// through on_internal, even when it has no children.
inline bool is_leaf(TSNode node, TSNode root) {
    return ts_node_child_count(node) == 0 && !ts_node_eq(node, root);
}

// Postorder traversal. The visitor provides
//   R on_leaf(const LeafInfo&)
//   R on_internal(const NodeInfo&, std::vector<R>&& child_results)
// Leaves are visited left to right; a node's on_internal fires after all of
// its children; the root's on_internal fires last and its result is returned.
// Text a node owns outside its children arrives through on_leaf in source
// order. Iterative, so deep trees do not exhaust the call stack.
template <class Visitor>
auto postorder(const SyntaxTree& tree, Visitor&& visitor) {
    using Result = decltype(visitor.on_leaf(std::declval<const LeafInfo&>()));
    struct Frame {
        TSNode node;
        std::uint32_t next_child;
        std::uint32_t cursor;       // end of the text covered so far
        std::uint32_t cursor_line;  // 0-based row at cursor
        std::vector<Result> results;
    };
    auto frame = [](TSNode n) {
        return Frame{n, 0, ts_node_start_byte(n), ts_node_start_point(n).row, {}};
    };
    auto text_before = [&](Frame& f, std::uint32_t until) {
        if (until <= f.cursor) return;
        if (auto leaf = make_text_leaf(tree, f.node, f.cursor, until, f.cursor_line)) {
            f.results.push_back(visitor.on_leaf(*leaf));
        }
    };
    const TSNode root = tree.root();
    std::vector<Frame> stack;
    stack.push_back(frame(root));
    Result finished{};
    while (!stack.empty()) {
        Frame& top = stack.back();
        const std::uint32_t child_count = ts_node_child_count(top.node);
        if (top.next_child < child_count) {
            TSNode child = ts_node_child(top.node, top.next_child++);
            text_before(top, ts_node_start_byte(child));
            if (ts_node_end_byte(child) > top.cursor) {
                top.cursor = ts_node_end_byte(child);
                top.cursor_line = ts_node_end_point(child).row;
            }
            if (is_leaf(child, root)) {
                top.results.push_back(visitor.on_leaf(make_leaf_info(tree, child)));
            } else {
                stack.push_back(frame(child));
            }
            continue;
        }
        text_before(top, ts_node_end_byte(top.node));
        Result r = visitor.on_internal(make_node_info(tree, top.node), std::move(top.results));
        stack.pop_back();
        if (stack.empty()) {
            finished = std::move(r);
        } else {
            stack.back().results.push_back(std::move(r));
        }
    }
    return finished;
}

// Leaves in traversal order.
std::vector<LeafInfo> collect_leaves(const SyntaxTree& tree);

// Node kinds in postorder (leaves and internal nodes), the "AST shape".
std::vector<std::string> postorder_kinds(const SyntaxTree& tree);

}  // namespace hgcode
