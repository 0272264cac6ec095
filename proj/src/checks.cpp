#include "hgcode/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hgcode/clone.hpp"
#include "hgcode/encoder.hpp"
#include "hgcode/tokenizer.hpp"

#ifndef HGCODE_DATA_DIR
#define HGCODE_DATA_DIR "data"
#endif

namespace hgcode {

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("HGCODE_DATA_DIR"); env && *env) return env;
    return HGCODE_DATA_DIR;
}

std::vector<Snippet> load_snippets(const std::filesystem::path& dir, std::optional<Language> lang) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::invalid_argument(fmt::format("not a directory: {}", dir.string()));
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::optional<Language> found;
        try {
            found = language_from_extension(entry.path().extension().string());
        } catch (const UnsupportedLanguage&) {
            continue;
        }
        if (lang && *found != *lang) continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<Snippet> out;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        out.push_back(Snippet{std::filesystem::relative(f, dir).generic_string(), buf.str(),
                              language_from_extension(f.extension().string())});
    }
    return out;
}

// ---- random instances -------------------------------------------------------

TokenizedHypergraph random_hypergraph(Rng& rng, std::size_t tokens, std::size_t edges) {
    TokenizedHypergraph g;
    g.token_count = tokens;
    for (std::size_t i = 0; i < tokens; ++i) g.tokens.push_back(fmt::format("t{}", i));
    if (tokens == 0) return g;
    for (std::size_t e = 0; e < edges; ++e) {
        g.hyperedge_types.push_back(kAllHyperedgeTypes[rng.below(kHyperedgeTypeCount)]);
        std::vector<std::uint32_t> ids(tokens);
        std::iota(ids.begin(), ids.end(), 0u);
        const std::size_t size = 1 + rng.below(tokens);
        for (std::size_t i = 0; i < size; ++i) {
            std::swap(ids[i], ids[i + rng.below(tokens - i)]);
            g.incidence.push_back({ids[i], static_cast<std::uint32_t>(e)});
        }
    }
    canonicalize(g);
    return g;
}

AdapterParameters random_parameters(Rng& rng, std::size_t hidden, std::size_t bottleneck, double scale) {
    AdapterParameters p = AdapterParameters::zeros(hidden, bottleneck);
    p.for_each([&](const std::string&, Matrix& m) { m = rng.normal_matrix(m.rows(), m.cols(), scale); });
    return p;
}

TokenizedHypergraph permute_tokens(const TokenizedHypergraph& g, const std::vector<std::size_t>& perm) {
    TokenizedHypergraph out = g;
    for (std::size_t i = 0; i < g.token_count; ++i) out.tokens[perm[i]] = g.tokens[i];
    if (g.line_of_token) {
        for (std::size_t i = 0; i < g.token_count; ++i) (*out.line_of_token)[perm[i]] = (*g.line_of_token)[i];
    }
    for (auto& p : out.incidence) p.token = static_cast<std::uint32_t>(perm[p.token]);
    canonicalize(out);
    return out;
}

Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& perm) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::copy(m.row(i).begin(), m.row(i).end(), out.row(perm[i]).begin());
    }
    return out;
}

bool is_laminar(const TokenizedHypergraph& g, HyperedgeType type) {
    const auto members = g.members();
    std::vector<std::size_t> picked;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        if (g.hyperedge_types[e] == type) picked.push_back(e);
    }
    for (std::size_t x = 0; x < picked.size(); ++x) {
        const auto& a = members[picked[x]];
        for (std::size_t y = x + 1; y < picked.size(); ++y) {
            const auto& b = members[picked[y]];
            std::vector<std::uint32_t> common;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
            if (!common.empty() && common.size() != a.size() && common.size() != b.size()) return false;
        }
    }
    return true;
}

// ---- gradient checks ---------------------------------------------------------

namespace {

double weighted_sum(const Matrix& m, const Matrix& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.values()[i] * w.values()[i];
    return s;
}

void collect(AdapterParameters& p, std::vector<Matrix*>& out) {
    p.for_each([&](const std::string&, Matrix& m) { out.push_back(&m); });
}

void collect(const AdapterParameters& p, std::vector<Matrix>& out) {
    p.for_each([&](const std::string&, const Matrix& m) { out.push_back(m); });
}

GradCheckReport check_single(Rng& rng, const TokenizedHypergraph& g, std::size_t c, std::size_t cd, bool carry,
                             double tol) {
    const std::size_t n = g.token_count;
    auto index = std::make_shared<const HypergraphIndex>(HypergraphIndex::build(g));
    AdapterParameters params = random_parameters(rng, c, cd);
    Matrix h = rng.normal_matrix(n, c, 1.0);
    Matrix o_prev = rng.normal_matrix(n, cd, 1.0);
    const Matrix r1 = rng.normal_matrix(n, c, 1.0);
    const Matrix r2 = rng.normal_matrix(n, cd, 1.0);

    const AdapterOutput out = adapter_forward(h, carry ? &o_prev : nullptr, index, params, true);
    const AdapterGrads grads = adapter_backward(out.tape, params, r1, r2);

    std::vector<Matrix*> ptrs;
    std::vector<Matrix> analytic;
    collect(params, ptrs);
    collect(grads.params, analytic);
    ptrs.push_back(&h);
    analytic.push_back(grads.h);
    if (carry) {
        ptrs.push_back(&o_prev);
        analytic.push_back(grads.o_prev);
    }
    auto loss = [&] {
        const AdapterOutput o = adapter_forward(h, carry ? &o_prev : nullptr, index, params, false);
        return weighted_sum(o.h_out, r1) + weighted_sum(o.o, r2);
    };
    GradCheckOptions opts;
    opts.tol = tol;
    return grad_check(loss, ptrs, analytic, opts);
}

GradCheckReport check_stacked(Rng& rng, const TokenizedHypergraph& g, std::size_t c, std::size_t cd, double tol) {
    const std::size_t n = g.token_count;
    auto index = std::make_shared<const HypergraphIndex>(HypergraphIndex::build(g));
    AdapterParameters p1 = random_parameters(rng, c, cd);
    AdapterParameters p2 = random_parameters(rng, c, cd);
    Matrix h = rng.normal_matrix(n, c, 1.0);
    const Matrix r1 = rng.normal_matrix(n, c, 1.0);
    const Matrix r2 = rng.normal_matrix(n, cd, 1.0);

    const AdapterOutput o1 = adapter_forward(h, nullptr, index, p1, true);
    const AdapterOutput o2 = adapter_forward(o1.h_out, &o1.o, index, p2, true);
    const AdapterGrads g2 = adapter_backward(o2.tape, p2, r1, r2);
    const AdapterGrads g1 = adapter_backward(o1.tape, p1, g2.h, g2.o_prev);

    std::vector<Matrix*> ptrs;
    std::vector<Matrix> analytic;
    collect(p1, ptrs);
    collect(g1.params, analytic);
    collect(p2, ptrs);
    collect(g2.params, analytic);
    ptrs.push_back(&h);
    analytic.push_back(g1.h);
    auto loss = [&] {
        const AdapterOutput a = adapter_forward(h, nullptr, index, p1, false);
        const AdapterOutput b = adapter_forward(a.h_out, &a.o, index, p2, false);
        return weighted_sum(b.h_out, r1) + weighted_sum(b.o, r2);
    };
    GradCheckOptions opts;
    opts.tol = tol;
    return grad_check(loss, ptrs, analytic, opts);
}

}  // namespace

GradSuiteResult run_gradcheck_suite(std::uint64_t seed, std::size_t trials, double tol) {
    GradSuiteResult result;
    Rng rng(seed);
    auto record = [&](GradTrial t) {
        result.checked += t.report.checked;
        result.skipped += t.report.skipped.size();
        result.max_rel_error = std::max(result.max_rel_error, t.report.max_rel_error);
        result.passed = result.passed && t.report.passed;
        result.trials.push_back(std::move(t));
    };
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t n = 1 + rng.below(12);
        const std::size_t e = rng.below(9);
        const std::size_t c = rng.below(2) ? 8 : 2;
        const std::size_t cd = rng.below(2) ? 4 : 1;
        const TokenizedHypergraph g = random_hypergraph(rng, n, e);
        const bool carry = t % 2 == 1;

        GradTrial single{t, carry ? "single+carry" : "single", n, e, c, cd, {}};
        single.report = check_single(rng, g, c, cd, carry, tol);
        record(std::move(single));

        GradTrial stacked{t, "stacked", n, e, c, cd, {}};
        stacked.report = check_stacked(rng, g, c, cd, tol);
        record(std::move(stacked));
    }
    return result;
}

// ---- self test ---------------------------------------------------------------

namespace {

CheckResult identity_check(std::uint64_t seed) {
    FrozenEncoderConfig cfg{.layers = 2, .hidden = 16, .heads = 2, .ffn = 32, .vocab = 64, .max_length = 32,
                            .seed = seed};
    const FrozenEncoder enc(cfg);
    const auto adapters = init_parameters({cfg.layers, cfg.hidden, 4}, seed + 1);
    Rng rng(seed);
    for (int i = 0; i < 10; ++i) {
        const std::size_t n = 1 + rng.below(cfg.max_length);
        std::vector<std::uint32_t> ids(n);
        for (auto& id : ids) id = static_cast<std::uint32_t>(rng.below(cfg.vocab));
        auto index = std::make_shared<const HypergraphIndex>(HypergraphIndex::build(random_hypergraph(rng, n, rng.below(8))));
        if (!(enc.forward(ids, &adapters, index, nullptr) == enc.forward(ids, nullptr, nullptr, nullptr))) {
            return {"identity at init", false, fmt::format("instance {} differs", i)};
        }
    }
    return {"identity at init", true, "10 encoder instances"};
}

CheckResult normalization_check(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = 1 + rng.below(12);
        const TokenizedHypergraph g = random_hypergraph(rng, n, rng.below(9));
        auto index = std::make_shared<const HypergraphIndex>(HypergraphIndex::build(g));
        const auto params = random_parameters(rng, 6, 3);
        const AdapterOutput out = adapter_forward(rng.normal_matrix(n, 6, 1.0), nullptr, index, params, true);
        std::vector<double> by_edge(g.edge_count(), 0.0), by_token(n, 0.0);
        std::vector<bool> has(n, false);
        for (std::size_t k = 0; k < index->pair_count(); ++k) {
            by_edge[index->pair_edge[k]] += out.tape->alpha_ne[k];
            by_token[index->pair_token[k]] += out.tape->alpha_en[k];
            has[index->pair_token[k]] = true;
        }
        for (double s : by_edge) worst = std::max(worst, std::abs(s - 1.0));
        for (std::size_t t = 0; t < n; ++t) {
            if (has[t]) worst = std::max(worst, std::abs(by_token[t] - 1.0));
        }
    }
    return {"attention normalization", worst <= 1e-12, fmt::format("max |sum - 1| = {:.3g}", worst)};
}

CheckResult equivariance_check(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = 1 + rng.below(12);
        const TokenizedHypergraph g = random_hypergraph(rng, n, rng.below(9));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t k = n; k > 1; --k) std::swap(perm[k - 1], perm[rng.below(k)]);
        const auto params = random_parameters(rng, 6, 3);
        const Matrix h = rng.normal_matrix(n, 6, 1.0);
        const Matrix o_prev = rng.normal_matrix(n, 3, 1.0);
        const AdapterOutput a = adapter_forward(h, &o_prev, g, params, false);
        const Matrix o_perm = permute_rows(o_prev, perm);
        const AdapterOutput b = adapter_forward(permute_rows(h, perm), &o_perm, permute_tokens(g, perm), params, false);
        worst = std::max({worst, max_abs_diff(permute_rows(a.h_out, perm), b.h_out), max_abs_diff(permute_rows(a.o, perm), b.o)});
    }
    return {"permutation equivariance", worst <= 1e-12, fmt::format("max deviation {:.3g}", worst)};
}

CheckResult gradient_check(std::uint64_t seed) {
    const GradSuiteResult r = run_gradcheck_suite(seed, 5);
    return {"gradient check", r.passed,
            fmt::format("{} coordinates, max rel err {:.3g}", r.checked, r.max_rel_error)};
}

CheckResult tokenizer_check(std::uint64_t seed) {
    const auto path = data_dir() / "demo_vocab.json";
    Tokenizer tok = load_vocabulary(path);
    const auto split = tok.tokenize("SimpleCalculator");
    if (split.size() != 3) return {"byte-level round trip", false, fmt::format("SimpleCalculator -> {} tokens", split.size())};
    Rng rng(seed);
    for (int i = 0; i < 200; ++i) {
        std::string s(rng.below(40), '\0');
        for (auto& ch : s) ch = static_cast<char>(rng.below(256));
        if (tok.detokenize(tok.tokenize(s)) != s) return {"byte-level round trip", false, fmt::format("string {} differs", i)};
    }
    return {"byte-level round trip", true, "200 random byte strings; SimpleCalculator -> 3 tokens"};
}

CheckResult corpus_check() {
    const auto snippets = load_snippets(data_dir() / "corpus");
    const Tokenizer tok = Tokenizer::fallback();
    for (const auto& s : snippets) {
        const TokenizedHypergraph g = generate(s.source, s.language, tok);
        const ValidationReport v = validate(g);
        if (!v.ok) return {"bundled corpus extraction", false, fmt::format("{}: {}", s.name, v.violations.front().rule)};
        if (!is_laminar(g, HyperedgeType::AstFamily)) return {"bundled corpus extraction", false, s.name + ": not laminar"};
    }
    return {"bundled corpus extraction", !snippets.empty(), fmt::format("{} snippets valid and laminar", snippets.size())};
}

CheckResult accounting_check() {
    const PlmShapeConfig cfg{12, 768, 64};
    const auto plain = count_parameters(cfg, AdapterVariant::PlainAdapter);
    const auto hg = count_parameters(cfg, AdapterVariant::HgAdapter);
    return {"parameter accounting", plain == 1189632 && hg == 1341696, fmt::format("(12, 768): {} / {}", plain, hg)};
}

CheckResult freeze_check(std::uint64_t seed) {
    PipelineConfig pc;
    pc.encoder = FrozenEncoderConfig{.layers = 2, .hidden = 16, .heads = 2, .ffn = 32, .vocab = 128, .max_length = 128,
                                     .seed = seed};
    pc.bottleneck = 4;
    ClonePipeline pl(pc, Tokenizer::fallback());
    TrainConfig tc = train_preset("desk");
    tc.epochs = 1;
    tc.batch = 4;
    const auto before = pl.trainable_tensors();
    const TrainReport r = train_adapters(pl, make_synthetic_clone_set(seed, 8), {}, tc);
    const bool changed = !(pl.trainable_tensors() == before);
    return {"freeze contract", r.frozen_digest_before == r.frozen_digest_after && changed,
            fmt::format("frozen digest {} unchanged, trainables updated", r.frozen_digest_after)};
}

}  // namespace

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
    const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks = {
        {"identity at init", [&] { return identity_check(seed); }},
        {"attention normalization", [&] { return normalization_check(seed); }},
        {"permutation equivariance", [&] { return equivariance_check(seed); }},
        {"gradient check", [&] { return gradient_check(seed); }},
        {"byte-level round trip", [&] { return tokenizer_check(seed); }},
        {"bundled corpus extraction", [] { return corpus_check(); }},
        {"parameter accounting", [] { return accounting_check(); }},
        {"freeze contract", [&] { return freeze_check(seed); }},
    };
    std::vector<CheckResult> out;
    for (const auto& [name, check] : checks) {
        try {
            out.push_back(check());
        } catch (const std::exception& e) {
            out.push_back({name, false, e.what()});
        }
    }
    return out;
}

}  // namespace hgcode
