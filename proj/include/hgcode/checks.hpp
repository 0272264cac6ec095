#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hgcode/adapter.hpp"
#include "hgcode/generator.hpp"
#include "hgcode/incidence.hpp"
#include "hgcode/numerics.hpp"

namespace hgcode {

// Directory holding demo_vocab.json and corpus/. HGCODE_DATA_DIR in the
// environment wins over the build-time default.
std::filesystem::path data_dir();

// Every file under `dir` (recursively) whose extension names a supported
// language, or only those of `lang` when given; sorted by path. Names are
// paths relative to `dir`.
std::vector<Snippet> load_snippets(const std::filesystem::path& dir, std::optional<Language> lang = std::nullopt);

// ---- random instances ------------------------------------------------------

// N tokens and E hyperedges of random type; every hyperedge has at least one
// member, members are distinct, incidence is canonical. Size rules of
// validate() are not enforced.
TokenizedHypergraph random_hypergraph(Rng& rng, std::size_t tokens, std::size_t edges);

// Every tensor drawn from N(0, scale²), so all paths of the layer are live.
AdapterParameters random_parameters(Rng& rng, std::size_t hidden, std::size_t bottleneck, double scale = 0.5);

// Relabels token i as perm[i] in the hypergraph (incidence re-canonicalized).
TokenizedHypergraph permute_tokens(const TokenizedHypergraph& g, const std::vector<std::size_t>& perm);
// Row i of m moves to row perm[i].
Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& perm);

// Any two hyperedges of the given type are disjoint or nested.
bool is_laminar(const TokenizedHypergraph& g, HyperedgeType type);

// ---- gradient checks --------------------------------------------------------

struct GradTrial {
    std::size_t trial = 0;
    std::string kind;  // "single", "single+carry" or "stacked"
    std::size_t tokens = 0, edges = 0, hidden = 0, bottleneck = 0;
    GradCheckReport report;
};

struct GradSuiteResult {
    std::vector<GradTrial> trials;
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    bool passed = true;
};

// Per trial: N in [1,12], E in [0,8], C in {2,8}, C_down in {1,4}; one
// full-layer check (with a carried o on odd trials) and one two-layer stacked
// check through the carry. Loss is Σ h'⊙R1 + Σ o⊙R2 for random R.
GradSuiteResult run_gradcheck_suite(std::uint64_t seed, std::size_t trials, double tol = 1e-5);

// ---- self test ---------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Quick invariant suite over random instances and the bundled data.
std::vector<CheckResult> run_selftest(std::uint64_t seed = 1);

}  // namespace hgcode
