#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hgcode/incidence.hpp"
#include "hgcode/numerics.hpp"

namespace hgcode {

// Shape of the host model the adapters are inserted into.
struct PlmShapeConfig {
    std::size_t layers = 1;       // L
    std::size_t hidden = 1;       // C
    std::size_t bottleneck = 64;  // C_down
    static constexpr std::size_t type_count = kHyperedgeTypeCount;

    // Throws std::invalid_argument unless L >= 1 and C >= C_down >= 1.
    void check() const;
};

// Trainable tensors of one adapter layer. Per-type tensors are indexed by
// HyperedgeType.
struct AdapterParameters {
    Matrix w_down;  // C_down × C
    Matrix b_down;  // 1 × C_down
    Matrix w_up;    // C × C_down
    Matrix b_up;    // 1 × C
    std::array<Matrix, kHyperedgeTypeCount> query;   // 1 × C_down
    std::array<Matrix, kHyperedgeTypeCount> w_type;  // C_down × C_down
    std::array<Matrix, kHyperedgeTypeCount> b_type;  // 1 × C_down

    static AdapterParameters zeros(std::size_t hidden, std::size_t bottleneck);

    std::size_t hidden() const { return w_down.cols(); }
    std::size_t bottleneck() const { return w_down.rows(); }
    std::size_t parameter_count() const;

    // Visits every tensor with its checkpoint name suffix ("W_down",
    // "q.lexical", "W_type.line", ...), in a fixed order.
    template <class F>
    void for_each(F&& f) {
        f(std::string("W_down"), w_down);
        f(std::string("b_down"), b_down);
        f(std::string("W_up"), w_up);
        f(std::string("b_up"), b_up);
        for (HyperedgeType t : kAllHyperedgeTypes) f("q." + std::string(to_string(t)), query[index(t)]);
        for (HyperedgeType t : kAllHyperedgeTypes) f("W_type." + std::string(to_string(t)), w_type[index(t)]);
        for (HyperedgeType t : kAllHyperedgeTypes) f("b_type." + std::string(to_string(t)), b_type[index(t)]);
    }
    template <class F>
    void for_each(F&& f) const {
        const_cast<AdapterParameters*>(this)->for_each(
            [&](const std::string& name, const Matrix& m) { f(name, m); });
    }

    friend bool operator==(const AdapterParameters&, const AdapterParameters&) = default;

    static constexpr std::size_t index(HyperedgeType t) { return static_cast<std::size_t>(t); }
};

// One parameter set per layer. W_down and W_type are fan-in uniform, queries
// are N(0, 0.02²), every bias and W_up are zero, so each fresh adapter maps h
// to h exactly.
std::vector<AdapterParameters> init_parameters(const PlmShapeConfig& cfg, std::uint64_t seed);

enum class AdapterVariant { PlainAdapter, HgAdapter };

// plain = L·(2·C·C_down + C_down + C); hg adds L·(3·(C_down² + C_down) + 3·C_down).
std::uint64_t count_parameters(const PlmShapeConfig& cfg, AdapterVariant variant);

// Count in tenths of a million, rounded half up (1,341,696 -> 13).
std::uint64_t tenths_of_million(std::uint64_t count);
// "1.3M"
std::string format_millions(std::uint64_t count);

// Incidence prepared for the two attention stages.
struct HypergraphIndex {
    std::size_t token_count = 0;
    std::vector<std::uint32_t> pair_token;
    std::vector<std::uint32_t> pair_edge;
    std::vector<HyperedgeType> edge_type;
    SegmentIndex by_edge;   // T(e)
    SegmentIndex by_token;  // S(n); tokens outside every hyperedge are empty groups

    std::size_t edge_count() const { return edge_type.size(); }
    std::size_t pair_count() const { return pair_token.size(); }

    // Throws ShapeError on token or hyperedge ids out of range.
    static HypergraphIndex build(const TokenizedHypergraph& g);
};

// Intermediates of one forward pass, kept for the backward pass.
struct ActivationTape {
    std::shared_ptr<const HypergraphIndex> index;
    Matrix h;           // input hidden states, N × C
    Matrix pre;         // d + o_prev, N × C_down
    bool has_prev = false;
    Matrix x;           // relu(pre)
    Matrix x_pairs;     // x gathered per incidence pair
    std::vector<double> alpha_ne;
    Matrix p;           // E × C_down
    Matrix p_prime;     // E × C_down
    Matrix p_prime_pairs;
    std::vector<double> alpha_en;
};

struct AdapterOutput {
    Matrix h_out;  // N × C
    Matrix o;      // N × C_down
    std::optional<ActivationTape> tape;
};

// o_prev is null for the first layer. Throws ShapeError on shape mismatch.
AdapterOutput adapter_forward(const Matrix& h, const Matrix* o_prev, std::shared_ptr<const HypergraphIndex> index,
                              const AdapterParameters& params, bool training);
AdapterOutput adapter_forward(const Matrix& h, const Matrix* o_prev, const TokenizedHypergraph& g,
                              const AdapterParameters& params, bool training);

struct AdapterGrads {
    Matrix h;
    Matrix o_prev;  // empty for the first layer
    AdapterParameters params;
};

// Reverse mode through the residual, both attention stages, the per-type
// transform and the cross-layer carry. Throws std::logic_error without a tape.
AdapterGrads adapter_backward(const std::optional<ActivationTape>& tape, const AdapterParameters& params,
                              const Matrix& grad_h_out, const Matrix& grad_o);

}  // namespace hgcode
