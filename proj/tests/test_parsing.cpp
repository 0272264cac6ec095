#include <doctest.h>

#include <algorithm>
#include <cctype>

#include "hgcode/checks.hpp"
#include "hgcode/parsing.hpp"
#include "support.hpp"

using namespace hgcode;

namespace {

struct Recorder {
    std::vector<std::string> events;
    int on_leaf(const LeafInfo& l) {
        events.push_back("leaf:" + l.text);
        return 1;
    }
    int on_internal(const NodeInfo& n, std::vector<int>&& kids) {
        int total = 0;
        for (int k : kids) total += k;
        events.push_back("node:" + std::string(n.kind) + (n.is_root ? ":root" : ""));
        return total;
    }
};

bool has_text(const std::string& src, std::uint32_t a, std::uint32_t b) {
    for (auto i = a; i < b; ++i)
        if (!std::isspace(static_cast<unsigned char>(src[i]))) return true;
    return false;
}

// childless nodes plus non-blank text between children
std::size_t count_leaves(const std::string& src, TSNode n, TSNode root) {
    const std::uint32_t kids = ts_node_child_count(n);
    if (kids == 0 && !ts_node_eq(n, root)) return 1;
    std::size_t c = 0;
    std::uint32_t cursor = ts_node_start_byte(n);
    for (std::uint32_t i = 0; i < kids; ++i) {
        const TSNode child = ts_node_child(n, i);
        c += has_text(src, cursor, ts_node_start_byte(child));
        c += count_leaves(src, child, root);
        cursor = std::max(cursor, ts_node_end_byte(child));
    }
    return c + has_text(src, cursor, ts_node_end_byte(n));
}

std::string strip_ws(const std::string& s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

}  // namespace

TEST_SUITE("parsing") {

TEST_CASE("language registry") {
    CHECK(supported_languages().size() == 6);
    for (auto l : supported_languages()) {
        CHECK(language_from_string(to_string(l)) == l);
        CHECK(grammar(l) != nullptr);
    }
    CHECK(language_from_extension(".py") == Language::Python);
    CHECK(language_from_extension("rb") == Language::Ruby);
    CHECK(language_from_extension(".php") == Language::Php);
    CHECK_THROWS_WITH_AS(language_from_string("cobol"), doctest::Contains("unsupported language"),
                         UnsupportedLanguage);
    CHECK_THROWS_AS(parse("x", "rust"), UnsupportedLanguage);
    CHECK_THROWS_WITH_AS(parse(std::string("a\xff"), Language::Python), "invalid encoding", InvalidEncoding);
}

TEST_CASE("empty source") {
    auto t = parse("", Language::Java);
    CHECK(collect_leaves(t).empty());
    Recorder r;
    postorder(t, r);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].ends_with(":root"));
}

TEST_CASE("addition shares one parent") {
    auto t = parse("class A { int f() { return a + b; } }", Language::Java);
    Recorder r;
    postorder(t, r);
    auto a = std::find(r.events.begin(), r.events.end(), "leaf:a");
    REQUIRE(a != r.events.end());
    CHECK(*(a + 1) == "leaf:+");
    CHECK(*(a + 2) == "leaf:b");
    CHECK(*(a + 3) == "node:binary_expression");
    CHECK(r.events.back() == "node:program:root");
}

TEST_CASE("python start lines") {
    auto t = parse("x = 1\ny = 2", Language::Python);
    std::vector<std::uint32_t> lines;
    std::vector<std::string> texts;
    for (auto& l : collect_leaves(t)) {
        lines.push_back(l.start_line);
        texts.push_back(l.text);
    }
    CHECK(texts == std::vector<std::string>{"x", "=", "1", "y", "=", "2"});
    CHECK(lines == std::vector<std::uint32_t>{1, 1, 1, 2, 2, 2});
}

TEST_CASE("single leaf tree") {
    auto t = parse("x", Language::Python);
    Recorder r;
    postorder(t, r);
    CHECK(std::count_if(r.events.begin(), r.events.end(), [](auto& e) { return e.starts_with("leaf:"); }) == 1);
    CHECK(r.events.front() == "leaf:x");
    CHECK(r.events.back().ends_with(":root"));
}

TEST_CASE("multi-line leaf takes its start line") {
    auto t = parse("x = 1\ns = \"\"\"a\nb\nc\"\"\"\ny = 2\n", Language::Python);
    for (auto& l : collect_leaves(t)) {
        if (l.text == "y") CHECK(l.start_line == 5);
        if (l.text.find('\n') != std::string::npos) CHECK(l.start_line == 2);
    }
}

TEST_CASE("text owned by an inner node becomes a leaf") {
    auto t = parse("print(f\"{x:.3f}\")", Language::Python);
    auto leaves = collect_leaves(t);
    auto fmt_leaf = std::find_if(leaves.begin(), leaves.end(), [](auto& l) { return l.text == ".3f"; });
    REQUIRE(fmt_leaf != leaves.end());
    CHECK(fmt_leaf->kind == "format_specifier");
    CHECK(fmt_leaf->start_line == 1);
}

TEST_CASE("comments and errors are leaves") {
    auto t = parse("// note\nclass A { int x = ; }", Language::Java);
    auto leaves = collect_leaves(t);
    CHECK(std::any_of(leaves.begin(), leaves.end(), [](auto& l) { return l.is_comment && l.text == "// note"; }));
    CHECK(t.has_error());
}

TEST_CASE("corpus traversal matches recursive count and reconstructs text") {
    const auto snippets = hgcode::load_snippets(hgtest::corpus_dir());
    REQUIRE(snippets.size() >= 120);
    for (const auto& s : snippets) {
        CAPTURE(s.name);
        auto t = parse(s.source, s.language);
        auto leaves = collect_leaves(t);
        CHECK(leaves.size() == count_leaves(t.source(), t.root(), t.root()));

        std::string joined;
        std::uint32_t prev_end = 0;
        bool ordered = true;
        for (auto& l : leaves) {
            joined += l.text;
            ordered = ordered && l.byte_span.start >= prev_end && l.byte_span.end <= t.source().size();
            prev_end = l.byte_span.end;
            CHECK(l.text == t.source().substr(l.byte_span.start, l.byte_span.end - l.byte_span.start));
        }
        CHECK(ordered);
        CHECK(strip_ws(joined) == strip_ws(s.source));

        Recorder r1, r2;
        postorder(t, r1);
        postorder(t, r2);
        CHECK(r1.events == r2.events);
    }
}

}  // TEST_SUITE
