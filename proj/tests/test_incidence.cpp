#include <doctest.h>

#include "hgcode/checks.hpp"
#include "hgcode/incidence.hpp"

using namespace hgcode;

namespace {

TokenizedHypergraph make(std::size_t n, std::vector<IncidencePair> pairs, std::vector<HyperedgeType> types) {
    TokenizedHypergraph g;
    for (std::size_t i = 0; i < n; ++i) g.tokens.push_back("t" + std::to_string(i));
    g.token_count = n;
    g.incidence = std::move(pairs);
    g.hyperedge_types = std::move(types);
    g.source_language = "java";
    canonicalize(g);
    return g;
}

}  // namespace

TEST_SUITE("incidence") {

TEST_CASE("type names") {
    CHECK(to_string(HyperedgeType::AstFamily) == "ast_family");
    CHECK(to_string(HyperedgeType::Lexical) == "lexical");
    CHECK(to_string(HyperedgeType::Line) == "line");
    for (auto t : kAllHyperedgeTypes) CHECK(hyperedge_type_from_string(to_string(t)) == t);
    CHECK_THROWS_AS(hyperedge_type_from_string("Line"), std::invalid_argument);
    CHECK(parse_type_list("").empty());
    CHECK(parse_type_list("lexical,line") == TypeSet{HyperedgeType::Lexical, HyperedgeType::Line});
}

TEST_CASE("validate") {
    CHECK(validate(TokenizedHypergraph{}).ok);

    auto bad = make(3, {{5, 0}}, {HyperedgeType::Line});
    auto r = validate(bad);
    CHECK_FALSE(r.ok);
    CHECK(r.has("token_id out of range"));

    auto small = make(3, {{0, 0}, {1, 0}}, {HyperedgeType::AstFamily});
    CHECK(validate(small).has("ast_family size < 3"));
    auto small_lex = make(3, {{0, 0}, {1, 0}}, {HyperedgeType::Lexical});
    CHECK(validate(small_lex).has("lexical size < 3"));

    auto single_line = make(1, {{0, 0}}, {HyperedgeType::Line});
    CHECK(validate(single_line).ok);

    auto gap = make(3, {{0, 1}}, {HyperedgeType::Line, HyperedgeType::Line});
    CHECK_FALSE(validate(gap).ok);

    auto dup = make(3, {{0, 0}, {0, 0}}, {HyperedgeType::Line});
    CHECK_FALSE(validate(dup).ok);

    auto unsorted = make(3, {{0, 0}, {1, 1}}, {HyperedgeType::Line, HyperedgeType::Line});
    std::swap(unsorted.incidence[0], unsorted.incidence[1]);
    CHECK_FALSE(validate(unsorted).ok);
}

TEST_CASE("truncate_remap") {
    auto g = make(5, {{0, 0}, {1, 0}, {2, 0}, {2, 1}, {3, 1}, {4, 1}},
                  {HyperedgeType::AstFamily, HyperedgeType::Line});
    CHECK(truncate_remap(g, 5) == g);
    CHECK(truncate_remap(g, 9) == g);

    auto line = make(5, {{2, 0}, {3, 0}, {4, 0}}, {HyperedgeType::Line});
    auto t = truncate_remap(line, 3);
    CHECK(t.token_count == 3);
    CHECK(t.edge_count() == 0);
    CHECK(t.incidence.empty());

    auto g2 = make(4, {{0, 0}, {1, 0}, {2, 0}, {3, 1}}, {HyperedgeType::AstFamily, HyperedgeType::Line});
    auto t2 = truncate_remap(g2, 3);
    CHECK(t2.hyperedge_types == std::vector{HyperedgeType::AstFamily});
    CHECK(t2.incidence == std::vector<IncidencePair>{{0, 0}, {1, 0}, {2, 0}});
    CHECK(t2.tokens.size() == 3);

    // a size-2 family after truncation survives and validates
    auto t3 = truncate_remap(g, 2);
    CHECK(t3.truncated);
    CHECK(t3.edge_count() == 1);
    CHECK(validate(t3).ok);

    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        auto r = random_hypergraph(rng, 1 + rng.below(12), rng.below(8));
        const auto k = rng.below(14);
        auto once = truncate_remap(r, k);
        CHECK(truncate_remap(once, k) == once);
    }
}

TEST_CASE("offset_tokens") {
    auto g = make(3, {{0, 0}, {1, 0}, {2, 0}}, {HyperedgeType::AstFamily});
    g.line_of_token = std::vector<std::uint32_t>{1, 1, 2};
    CHECK(offset_tokens(g, 0, 3) == g);

    auto single = make(3, {{0, 0}}, {HyperedgeType::Line});
    auto s = offset_tokens(single, 1, 5);
    CHECK(s.incidence == std::vector<IncidencePair>{{1, 0}});
    CHECK(s.token_count == 5);
    CHECK(s.tokens.size() == 5);

    CHECK_THROWS_WITH_AS(offset_tokens(g, 3, 4), "offset overflow", std::invalid_argument);

    auto shifted = offset_tokens(g, 1, 6);
    REQUIRE(shifted.line_of_token);
    CHECK(*shifted.line_of_token == std::vector<std::uint32_t>{0, 1, 1, 2, 0, 0});
    CHECK(offset_tokens(offset_tokens(g, 1, 5), 2, 8) == offset_tokens(g, 3, 8));
}

TEST_CASE("filter_types") {
    auto g = make(3, {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}}, {HyperedgeType::Lexical, HyperedgeType::Line});
    CHECK(filter_types(g, all_types()) == g);

    auto only_line = filter_types(g, {HyperedgeType::Line});
    CHECK(only_line.hyperedge_types == std::vector{HyperedgeType::Line});
    CHECK(only_line.incidence == std::vector<IncidencePair>{{0, 0}, {1, 0}});
    CHECK(only_line.tokens == g.tokens);

    auto none = filter_types(g, {});
    CHECK(none.edge_count() == 0);
    CHECK(none.incidence.empty());
    CHECK(none.token_count == 3);
}

TEST_CASE("serialization round trip") {
    auto g = make(4, {{0, 0}, {1, 0}, {2, 0}, {3, 1}}, {HyperedgeType::AstFamily, HyperedgeType::Line});
    g.tokens[1] = "\"quoted\" ü \n";
    g.line_of_token = std::vector<std::uint32_t>{1, 1, 1, 2};
    CHECK(deserialize(serialize(g)) == g);

    auto j = to_json(g);
    CHECK(j["token_count"] == 4);
    CHECK(j["incidence"][3] == nlohmann::json::array({3, 1}));
    CHECK(j["hyperedge_types"][0] == "ast_family");
    CHECK(j["source_language"] == "java");

    g.line_of_token.reset();
    CHECK(to_json(g)["line_of_token"].is_null());
    CHECK(deserialize(serialize(g)) == g);

    auto truncated = truncate_remap(make(4, {{0, 0}, {1, 0}, {2, 0}}, {HyperedgeType::AstFamily}), 2);
    CHECK(deserialize(serialize(truncated)) == truncated);

    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
        auto r = random_hypergraph(rng, rng.below(10), rng.below(6));
        CHECK(deserialize(serialize(r)) == r);
    }
}

TEST_CASE("filter keeps validity") {
    auto g = make(5, {{0, 0}, {1, 0}, {2, 0}, {2, 1}, {3, 1}, {4, 1}, {0, 2}, {1, 2}, {2, 2}, {3, 2}, {4, 2}},
                  {HyperedgeType::Lexical, HyperedgeType::AstFamily, HyperedgeType::Line});
    REQUIRE(validate(g).ok);
    for (unsigned mask = 0; mask < 8; ++mask) {
        TypeSet s;
        for (unsigned b = 0; b < 3; ++b)
            if (mask >> b & 1) s.insert(kAllHyperedgeTypes[b]);
        CHECK(validate(filter_types(g, s)).ok);
    }
}

}  // TEST_SUITE
