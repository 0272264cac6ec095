#include "hgcode/generator.hpp"

#include <algorithm>
#include <atomic>
#include <fmt/format.h>
#include <map>
#include <thread>

namespace hgcode {

void GeneratorConfig::check() const {
    if (min_tokens_for_hyperedge < 2) {
        throw std::invalid_argument("min_tokens_for_hyperedge must be at least 2");
    }
}

namespace {

// Token range [begin, end) produced by a subtree.
struct SubtreeTokens {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    bool leaf = false;
};

class Extractor {
public:
    Extractor(const Tokenizer& tokenizer, const GeneratorConfig& config)
        : tokenizer_(tokenizer), config_(config) {}

    SubtreeTokens on_leaf(const LeafInfo& leaf) {
        const auto begin = static_cast<std::uint32_t>(graph_.tokens.size());
        if (leaf.is_comment && !config_.include_comments) return {begin, begin, true};

        auto pieces = tokenizer_.tokenize(leaf.text);
        const auto end = static_cast<std::uint32_t>(begin + pieces.size());
        for (auto& piece : pieces) {
            graph_.tokens.push_back(std::move(piece));
            lines_.push_back(leaf.start_line);
        }
        if (pieces.size() >= config_.min_tokens_for_hyperedge) {
            add_edge(HyperedgeType::Lexical, begin, end);
        }
        if (!pieces.empty()) {
            auto [it, created] = line_edge_.try_emplace(leaf.start_line, 0u);
            if (created) it->second = new_edge(HyperedgeType::Line);
            for (auto t = begin; t < end; ++t) graph_.incidence.push_back({t, it->second});
        }
        return {begin, end, true};
    }

    SubtreeTokens on_internal(const NodeInfo&, std::vector<SubtreeTokens>&& children) {
        const auto here = static_cast<std::uint32_t>(graph_.tokens.size());
        if (config_.ast_scope == AstScope::AllInternalNodes) {
            const auto begin = children.empty() ? here : children.front().begin;
            const auto end = children.empty() ? here : children.back().end;
            maybe_add_family(begin, end, {});
            return {begin, end, false};
        }

        std::vector<std::uint32_t> direct;
        for (const auto& c : children) {
            if (!c.leaf) continue;
            for (auto t = c.begin; t < c.end; ++t) direct.push_back(t);
        }
        maybe_add_family(0, 0, direct);
        const auto begin = children.empty() ? here : children.front().begin;
        const auto end = children.empty() ? here : children.back().end;
        return {begin, end, false};
    }

    TokenizedHypergraph finish(Language lang) && {
        graph_.token_count = graph_.tokens.size();
        graph_.line_of_token = std::move(lines_);
        graph_.source_language = std::string(to_string(lang));
        canonicalize(graph_);
        return std::move(graph_);
    }

private:
    std::uint32_t new_edge(HyperedgeType type) {
        graph_.hyperedge_types.push_back(type);
        return static_cast<std::uint32_t>(graph_.hyperedge_types.size() - 1);
    }

    void add_edge(HyperedgeType type, std::uint32_t begin, std::uint32_t end) {
        const auto id = new_edge(type);
        for (auto t = begin; t < end; ++t) graph_.incidence.push_back({t, id});
    }

    // Either the contiguous range [begin, end) or an explicit member list.
    void maybe_add_family(std::uint32_t begin, std::uint32_t end, const std::vector<std::uint32_t>& explicit_members) {
        const std::size_t size = explicit_members.empty() ? end - begin : explicit_members.size();
        if (size < config_.min_tokens_for_hyperedge) return;
        if (config_.max_ast_hyperedge_size && size > *config_.max_ast_hyperedge_size) return;
        if (explicit_members.empty()) {
            add_edge(HyperedgeType::AstFamily, begin, end);
        } else {
            const auto id = new_edge(HyperedgeType::AstFamily);
            for (auto t : explicit_members) graph_.incidence.push_back({t, id});
        }
    }

    const Tokenizer& tokenizer_;
    const GeneratorConfig& config_;
    TokenizedHypergraph graph_;
    std::vector<std::uint32_t> lines_;
    std::map<std::uint32_t, std::uint32_t> line_edge_;
};

}  // namespace

TokenizedHypergraph generate(const SyntaxTree& tree, const Tokenizer& tokenizer, const GeneratorConfig& config) {
    config.check();
    Extractor extractor(tokenizer, config);
    postorder(tree, extractor);
    return std::move(extractor).finish(tree.language());
}

TokenizedHypergraph generate(std::string source, Language lang, const Tokenizer& tokenizer,
                             const GeneratorConfig& config) {
    const SyntaxTree tree = parse(std::move(source), lang);
    return generate(tree, tokenizer, config);
}

double CorpusStats::avg_tokens() const {
    return snippet_count ? static_cast<double>(total_tokens) / snippet_count : 0.0;
}

double CorpusStats::avg_hyperedges() const {
    return snippet_count ? static_cast<double>(total_hyperedges) / snippet_count : 0.0;
}

double CorpusStats::avg_of_type(HyperedgeType type) const {
    return snippet_count ? static_cast<double>(total_by_type[static_cast<std::size_t>(type)]) / snippet_count
                         : 0.0;
}

std::string format_mean(std::size_t total, std::size_t count) {
    if (count == 0) return "0.00";
    const std::uint64_t hundredths = (static_cast<std::uint64_t>(total) * 200 + count) / (2 * count);
    return fmt::format("{}.{:02}", hundredths / 100, hundredths % 100);
}

CorpusStats compute_stats(std::span<const Snippet> corpus, const Tokenizer& tokenizer,
                          const GeneratorConfig& config, unsigned threads) {
    if (corpus.empty()) throw std::invalid_argument("empty corpus");
    config.check();

    struct Outcome {
        bool ok = false;
        std::size_t tokens = 0;
        std::size_t by_type[kHyperedgeTypeCount] = {};
    };
    std::vector<Outcome> outcomes(corpus.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < corpus.size(); i = next++) {
            try {
                const auto g = generate(corpus[i].source, corpus[i].language, tokenizer, config);
                outcomes[i].ok = true;
                outcomes[i].tokens = g.token_count;
                for (auto t : g.hyperedge_types) ++outcomes[i].by_type[static_cast<std::size_t>(t)];
            } catch (const std::exception&) {
                outcomes[i].ok = false;
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(corpus.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    CorpusStats stats;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& o = outcomes[i];
        if (!o.ok) {
            ++stats.failed_count;
            stats.failed.push_back(corpus[i].name);
            continue;
        }
        ++stats.snippet_count;
        stats.total_tokens += o.tokens;
        for (std::size_t k = 0; k < kHyperedgeTypeCount; ++k) {
            stats.total_by_type[k] += o.by_type[k];
            stats.total_hyperedges += o.by_type[k];
        }
    }
    return stats;
}

}  // namespace hgcode
