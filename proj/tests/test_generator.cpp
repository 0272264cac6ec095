#include <doctest.h>

#include <algorithm>

#include "hgcode/checks.hpp"
#include "hgcode/generator.hpp"
#include "support.hpp"

using namespace hgcode;
using Members = std::vector<std::uint32_t>;

namespace {

std::size_t count_type(const TokenizedHypergraph& g, HyperedgeType t) {
    return std::count(g.hyperedge_types.begin(), g.hyperedge_types.end(), t);
}

}  // namespace

TEST_SUITE("generator") {

TEST_CASE("empty source") {
    auto g = generate("", Language::Java, Tokenizer::fallback());
    CHECK(g.token_count == 0);
    CHECK(g.edge_count() == 0);
    CHECK(validate(g).ok);
}

TEST_CASE("a + b") {
    auto g = generate("a + b", Language::Python, Tokenizer::fallback());
    CHECK(g.tokens == std::vector<std::string>{"a", "+", "b"});
    const auto edges = hgtest::edge_multiset(g);
    // binary_operator, expression_statement, module, and line 1
    const std::vector<hgtest::EdgeKey> expect{{HyperedgeType::AstFamily, {0, 1, 2}},
                                              {HyperedgeType::AstFamily, {0, 1, 2}},
                                              {HyperedgeType::AstFamily, {0, 1, 2}},
                                              {HyperedgeType::Line, {0, 1, 2}}};
    CHECK(edges == expect);

    GeneratorConfig direct;
    direct.ast_scope = AstScope::DirectParentsOnly;
    auto d = generate("a + b", Language::Python, Tokenizer::fallback(), direct);
    CHECK(count_type(d, HyperedgeType::AstFamily) == 1);
}

TEST_CASE("lexical hyperedge over a split identifier") {
    auto g = generate("class SimpleCalculator {}", Language::Java, hgtest::demo_tokenizer());
    auto simple = std::find(g.tokens.begin(), g.tokens.end(), "Simple");
    REQUIRE(simple != g.tokens.end());
    const auto first = static_cast<std::uint32_t>(simple - g.tokens.begin());
    CHECK(g.tokens[first + 1] == "Calcul");
    CHECK(g.tokens[first + 2] == "ator");
    const auto members = g.members();
    std::size_t lexical = 0;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        if (g.hyperedge_types[e] != HyperedgeType::Lexical) continue;
        ++lexical;
        CHECK(members[e] == Members{first, first + 1, first + 2});
    }
    CHECK(lexical == 1);
}

TEST_CASE("size-one line hyperedge") {
    auto g = generate("x = [1,\n2\n]", Language::Python, Tokenizer::fallback());
    CHECK(validate(g).ok);
    CHECK(count_type(g, HyperedgeType::Line) == 3);
    const auto members = g.members();
    std::size_t singles = 0;
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        if (g.hyperedge_types[e] == HyperedgeType::Line && members[e].size() == 1) ++singles;
    CHECK(singles == 2);
}

TEST_CASE("config variants") {
    const std::string src = "// hello there world\nclass A { int f() { return a + b * c; } }";
    auto tok = Tokenizer::fallback();
    auto base = generate(src, Language::Java, tok);

    GeneratorConfig no_comments;
    no_comments.include_comments = false;
    auto nc = generate(src, Language::Java, tok, no_comments);
    CHECK(nc.token_count + tok.tokenize("// hello there world").size() == base.token_count);
    CHECK(count_type(nc, HyperedgeType::Line) + 1 == count_type(base, HyperedgeType::Line));

    GeneratorConfig capped;
    capped.max_ast_hyperedge_size = 5;
    auto cap = generate(src, Language::Java, tok, capped);
    for (auto& m : cap.members()) CHECK(m.size() >= 1);
    const auto members = cap.members();
    for (std::size_t e = 0; e < cap.edge_count(); ++e)
        if (cap.hyperedge_types[e] == HyperedgeType::AstFamily) CHECK(members[e].size() <= 5);

    GeneratorConfig bad;
    bad.min_tokens_for_hyperedge = 1;
    CHECK_THROWS_AS(generate(src, Language::Java, tok, bad), std::invalid_argument);
}

TEST_CASE("corpus properties") {
    const auto snippets = load_snippets(hgtest::corpus_dir());
    for (auto tok : {Tokenizer::fallback(), hgtest::demo_tokenizer()}) {
        for (const auto& s : snippets) {
            CAPTURE(s.name);
            auto g = generate(s.source, s.language, tok);
            CHECK(validate(g).ok);
            CHECK(generate(s.source, s.language, tok) == g);
            CHECK(is_laminar(g, HyperedgeType::AstFamily));

            std::vector<int> lines(g.token_count), lexical(g.token_count);
            const auto members = g.members();
            bool root_seen = g.token_count <= 2;
            for (std::size_t e = 0; e < g.edge_count(); ++e) {
                for (auto t : members[e]) {
                    if (g.hyperedge_types[e] == HyperedgeType::Line) ++lines[t];
                    if (g.hyperedge_types[e] == HyperedgeType::Lexical) ++lexical[t];
                }
                if (g.hyperedge_types[e] == HyperedgeType::AstFamily && members[e].size() == g.token_count)
                    root_seen = true;
            }
            CHECK(std::all_of(lines.begin(), lines.end(), [](int c) { return c == 1; }));
            CHECK(std::all_of(lexical.begin(), lexical.end(), [](int c) { return c <= 1; }));
            CHECK(root_seen);

            GeneratorConfig loose;
            loose.min_tokens_for_hyperedge = 2;
            auto l = hgtest::edge_multiset(generate(s.source, s.language, tok, loose));
            auto strict = hgtest::edge_multiset(g);
            CHECK(std::includes(l.begin(), l.end(), strict.begin(), strict.end()));

            GeneratorConfig direct;
            direct.ast_scope = AstScope::DirectParentsOnly;
            auto d = generate(s.source, s.language, tok, direct);
            CHECK(validate(d).ok);
            CHECK(is_laminar(d, HyperedgeType::AstFamily));
        }
    }
}

TEST_CASE("matches the independent re-extraction") {
    auto tok = hgtest::demo_tokenizer();
    for (const auto& s : load_snippets(hgtest::corpus_dir())) {
        CAPTURE(s.name);
        auto tree = parse(s.source, s.language);
        auto g = generate(tree, tok);
        auto o = hgtest::reextract(tree, tok);
        CHECK(g.tokens == o.tokens);
        CHECK(g.line_of_token == std::optional(o.lines));
        CHECK(hgtest::edge_multiset(g) == o.edges);
    }
}

TEST_CASE("stats") {
    CHECK(format_mean(10, 1) == "10.00");
    CHECK(format_mean(30, 2) == "15.00");
    CHECK(format_mean(1, 3) == "0.33");
    CHECK(format_mean(2, 3) == "0.67");
    CHECK(format_mean(1, 8) == "0.13");
    CHECK_THROWS_AS(compute_stats({}, Tokenizer::fallback()), std::invalid_argument);

    // singleton corpus: the means are the one graph's counts
    std::vector<Snippet> one{{"one", "a b c d e f g h i j", Language::Ruby}};
    auto g = generate(one[0].source, one[0].language, Tokenizer::fallback());
    auto st = compute_stats(one, Tokenizer::fallback());
    CHECK(st.snippet_count == 1);
    CHECK(st.total_tokens == g.token_count);
    CHECK(st.total_hyperedges == g.edge_count());

    std::vector<Snippet> with_bad{{"ok", "x = 1", Language::Python}, {"bad", "a\xff", Language::Python}};
    auto sb = compute_stats(with_bad, Tokenizer::fallback());
    CHECK(sb.snippet_count == 1);
    CHECK(sb.failed == std::vector<std::string>{"bad"});
    CHECK(sb.total_tokens == 3);

    // corpus means against the re-extraction
    auto tok = hgtest::demo_tokenizer();
    const auto snippets = load_snippets(hgtest::corpus_dir());
    std::size_t tokens = 0, edges = 0;
    for (const auto& s : snippets) {
        auto o = hgtest::reextract(parse(s.source, s.language), tok);
        tokens += o.tokens.size();
        edges += o.edges.size();
    }
    auto cs = compute_stats(snippets, tok, {}, 3);
    CHECK(cs.snippet_count == snippets.size());
    CHECK(cs.total_tokens == tokens);
    CHECK(cs.total_hyperedges == edges);
    CHECK(format_mean(cs.total_tokens, cs.snippet_count) == format_mean(tokens, snippets.size()));
}

}  // TEST_SUITE
