#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hgcode/adapter.hpp"
#include "hgcode/numerics.hpp"

namespace hgcode {

struct FrozenEncoderConfig {
    std::size_t layers = 2;
    std::size_t hidden = 32;
    std::size_t heads = 2;
    std::size_t ffn = 64;
    std::size_t vocab = 512;
    std::size_t max_length = 128;
    std::uint64_t seed = 1;

    // Throws std::invalid_argument unless hidden is divisible by heads.
    void check() const;
};

struct EncoderLayerWeights {
    Matrix w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o;
    Matrix ln1_gamma, ln1_beta;
    Matrix w_ffn1, b_ffn1, w_ffn2, b_ffn2;
    Matrix ln2_gamma, ln2_beta;
};

// Randomly initialized post-LN transformer encoder. Its weights never change
// after construction; only the adapters inserted after each layer train.
class FrozenEncoder {
public:
    explicit FrozenEncoder(const FrozenEncoderConfig& config);

    const FrozenEncoderConfig& config() const { return config_; }
    const std::vector<EncoderLayerWeights>& layers() const { return layers_; }

    // Raw little-endian f64 dump of every weight in a fixed order.
    std::string serialize() const;
    // FNV-1a 64 of serialize(), as 16 hex digits.
    std::string digest() const;

    struct LayerCache;
    struct Tape {
        std::vector<std::shared_ptr<LayerCache>> layers;
        std::vector<AdapterOutput> adapters;
    };

    // Hidden states after the last layer (N × C). When `adapters` is given,
    // adapter l runs on the output of layer l and its o is carried into
    // adapter l+1; `index` must then describe the same N positions.
    // A non-null `tape` records everything backward() needs (training mode).
    // Throws std::length_error when N exceeds max_length.
    Matrix forward(std::span<const std::uint32_t> token_ids, const std::vector<AdapterParameters>* adapters,
                   std::shared_ptr<const HypergraphIndex> index, Tape* tape) const;

    // Gradients of the adapter parameters for a loss whose gradient w.r.t. the
    // final hidden states is `grad_out`. Frozen weights receive no gradient.
    std::vector<AdapterParameters> backward(const Tape& tape, const std::vector<AdapterParameters>& adapters,
                                            const Matrix& grad_out) const;

private:
    Matrix layer_forward(const EncoderLayerWeights& w, const Matrix& input, LayerCache* cache) const;
    Matrix layer_backward(const EncoderLayerWeights& w, const LayerCache& cache, const Matrix& grad_out) const;

    FrozenEncoderConfig config_;
    Matrix token_embedding_;     // vocab × C
    Matrix position_embedding_;  // max_length × C
    Matrix embed_gamma_, embed_beta_;
    std::vector<EncoderLayerWeights> layers_;
};

std::string fnv1a_hex(std::string_view bytes);

}  // namespace hgcode
