#include "hgcode/encoder.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include <fmt/format.h>

namespace hgcode {

namespace {

constexpr double kLayerNormEps = 1e-5;

Matrix slice_cols(const Matrix& m, std::size_t start, std::size_t width) {
    Matrix out(m.rows(), width);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < width; ++j) out(i, j) = m(i, start + j);
    }
    return out;
}

void add_cols(Matrix& dst, const Matrix& src, std::size_t start) {
    for (std::size_t i = 0; i < src.rows(); ++i) {
        for (std::size_t j = 0; j < src.cols(); ++j) dst(i, start + j) += src(i, j);
    }
}

void append_bytes(std::string& out, const Matrix& m) {
    for (double v : m.values()) {
        char buf[sizeof(double)];
        std::memcpy(buf, &v, sizeof(double));
        out.append(buf, sizeof(double));
    }
}

}  // namespace

struct FrozenEncoder::LayerCache {
    Matrix input;
    Matrix q, k, v;
    std::vector<Matrix> probs;  // per head, N × N
    Matrix context;
    LayerNormCache ln1;
    Matrix h1;
    Matrix ffn_pre;
    Matrix ffn_act;
    LayerNormCache ln2;
};

void FrozenEncoderConfig::check() const {
    if (layers == 0 || hidden == 0 || heads == 0 || hidden % heads != 0 || ffn == 0 || vocab < 2 ||
        max_length == 0) {
        throw std::invalid_argument(
            fmt::format("invalid encoder config: layers={} hidden={} heads={} ffn={} vocab={} max_length={}", layers,
                        hidden, heads, ffn, vocab, max_length));
    }
}

FrozenEncoder::FrozenEncoder(const FrozenEncoderConfig& config) : config_(config) {
    config_.check();
    Rng rng(config_.seed);
    const std::size_t c = config_.hidden;
    const std::size_t f = config_.ffn;
    token_embedding_ = rng.normal_matrix(config_.vocab, c, 1.0);
    position_embedding_ = rng.normal_matrix(config_.max_length, c, 0.5);
    embed_gamma_ = Matrix(1, c, 1.0);
    embed_beta_ = Matrix(1, c, 0.0);

    auto weight = [&](std::size_t out, std::size_t in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        return rng.uniform_matrix(out, in, -bound, bound);
    };
    auto bias = [&](std::size_t width) { return rng.normal_matrix(1, width, 0.02); };
    for (std::size_t l = 0; l < config_.layers; ++l) {
        EncoderLayerWeights w;
        w.w_q = weight(c, c);
        w.b_q = bias(c);
        w.w_k = weight(c, c);
        w.b_k = bias(c);
        w.w_v = weight(c, c);
        w.b_v = bias(c);
        w.w_o = weight(c, c);
        w.b_o = bias(c);
        w.ln1_gamma = Matrix(1, c, 1.0);
        w.ln1_beta = Matrix(1, c, 0.0);
        w.w_ffn1 = weight(f, c);
        w.b_ffn1 = bias(f);
        w.w_ffn2 = weight(c, f);
        w.b_ffn2 = bias(c);
        w.ln2_gamma = Matrix(1, c, 1.0);
        w.ln2_beta = Matrix(1, c, 0.0);
        layers_.push_back(std::move(w));
    }
}

std::string FrozenEncoder::serialize() const {
    std::string out;
    append_bytes(out, token_embedding_);
    append_bytes(out, position_embedding_);
    append_bytes(out, embed_gamma_);
    append_bytes(out, embed_beta_);
    for (const auto& w : layers_) {
        for (const Matrix* m : {&w.w_q, &w.b_q, &w.w_k, &w.b_k, &w.w_v, &w.b_v, &w.w_o, &w.b_o, &w.ln1_gamma,
                                &w.ln1_beta, &w.w_ffn1, &w.b_ffn1, &w.w_ffn2, &w.b_ffn2, &w.ln2_gamma,
                                &w.ln2_beta}) {
            append_bytes(out, *m);
        }
    }
    return out;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

std::string FrozenEncoder::digest() const { return fnv1a_hex(serialize()); }

Matrix FrozenEncoder::layer_forward(const EncoderLayerWeights& w, const Matrix& input, LayerCache* cache) const {
    const std::size_t n = input.rows();
    const std::size_t heads = config_.heads;
    const std::size_t dh = config_.hidden / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix q = linear(input, w.w_q, w.b_q);
    Matrix k = linear(input, w.w_k, w.b_k);
    Matrix v = linear(input, w.w_v, w.b_v);
    Matrix context(n, config_.hidden);
    std::vector<Matrix> probs;
    for (std::size_t hd = 0; hd < heads; ++hd) {
        const Matrix qh = slice_cols(q, hd * dh, dh);
        const Matrix kh = slice_cols(k, hd * dh, dh);
        const Matrix vh = slice_cols(v, hd * dh, dh);
        Matrix a = softmax_rows(scale(matmul_bt(qh, kh), inv_sqrt));
        add_cols(context, matmul(a, vh), hd * dh);
        probs.push_back(std::move(a));
    }
    const Matrix attended = linear(context, w.w_o, w.b_o);

    LayerNormCache ln1;
    Matrix h1 = layer_norm(add(input, attended), w.ln1_gamma, w.ln1_beta, kLayerNormEps, &ln1);
    Matrix ffn_pre = linear(h1, w.w_ffn1, w.b_ffn1);
    Matrix ffn_act = relu(ffn_pre);
    const Matrix ffn_out = linear(ffn_act, w.w_ffn2, w.b_ffn2);
    LayerNormCache ln2;
    Matrix out = layer_norm(add(h1, ffn_out), w.ln2_gamma, w.ln2_beta, kLayerNormEps, &ln2);

    if (cache) {
        *cache = LayerCache{input,           std::move(q),       std::move(k),       std::move(v),
                            std::move(probs), std::move(context), std::move(ln1),     std::move(h1),
                            std::move(ffn_pre), std::move(ffn_act), std::move(ln2)};
    }
    return out;
}

Matrix FrozenEncoder::layer_backward(const EncoderLayerWeights& w, const LayerCache& c,
                                     const Matrix& grad_out) const {
    const std::size_t heads = config_.heads;
    const std::size_t dh = config_.hidden / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

    // out = LN2(h1 + ffn(h1))
    Matrix grad_r2 = layer_norm_backward(c.ln2, w.ln2_gamma, grad_out).input;
    Matrix grad_act = matmul(grad_r2, w.w_ffn2);
    Matrix grad_pre = relu_backward(c.ffn_pre, grad_act);
    Matrix grad_h1 = add(grad_r2, matmul(grad_pre, w.w_ffn1));

    // h1 = LN1(input + attn(input))
    Matrix grad_r1 = layer_norm_backward(c.ln1, w.ln1_gamma, grad_h1).input;
    Matrix grad_context = matmul(grad_r1, w.w_o);
    Matrix grad_q(c.q.rows(), c.q.cols());
    Matrix grad_k(c.k.rows(), c.k.cols());
    Matrix grad_v(c.v.rows(), c.v.cols());
    for (std::size_t hd = 0; hd < heads; ++hd) {
        const Matrix qh = slice_cols(c.q, hd * dh, dh);
        const Matrix kh = slice_cols(c.k, hd * dh, dh);
        const Matrix vh = slice_cols(c.v, hd * dh, dh);
        const Matrix gch = slice_cols(grad_context, hd * dh, dh);
        const Matrix& a = c.probs[hd];
        add_cols(grad_v, matmul_at(a, gch), hd * dh);
        Matrix grad_scores = scale(softmax_rows_backward(a, matmul_bt(gch, vh)), inv_sqrt);
        add_cols(grad_q, matmul(grad_scores, kh), hd * dh);
        add_cols(grad_k, matmul_at(grad_scores, qh), hd * dh);
    }
    Matrix grad_in = grad_r1;
    grad_in += matmul(grad_q, w.w_q);
    grad_in += matmul(grad_k, w.w_k);
    grad_in += matmul(grad_v, w.w_v);
    return grad_in;
}

Matrix FrozenEncoder::forward(std::span<const std::uint32_t> token_ids, const std::vector<AdapterParameters>* adapters,
                              std::shared_ptr<const HypergraphIndex> index, Tape* tape) const {
    const std::size_t n = token_ids.size();
    if (n > config_.max_length) {
        throw std::length_error(fmt::format("sequence of {} tokens exceeds max length {}", n, config_.max_length));
    }
    if (adapters) {
        if (adapters->size() != config_.layers) {
            throw ShapeError(fmt::format("{} adapters for {} layers", adapters->size(), config_.layers));
        }
        if (!index || index->token_count != n) throw ShapeError("hypergraph is not aligned with the token sequence");
    }

    Matrix h(n, config_.hidden);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t id = token_ids[i];
        if (id >= config_.vocab) throw ShapeError(fmt::format("token id {} outside vocabulary", id));
        for (std::size_t j = 0; j < config_.hidden; ++j) {
            h(i, j) = token_embedding_(id, j) + position_embedding_(i, j);
        }
    }
    h = layer_norm(h, embed_gamma_, embed_beta_, kLayerNormEps);

    if (tape) *tape = Tape{};
    Matrix carry;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        std::shared_ptr<LayerCache> cache;
        if (tape) cache = std::make_shared<LayerCache>();
        h = layer_forward(layers_[l], h, cache.get());
        if (tape) tape->layers.push_back(std::move(cache));
        if (!adapters) continue;
        AdapterOutput out = adapter_forward(h, l == 0 ? nullptr : &carry, index, (*adapters)[l], tape != nullptr);
        h = std::move(out.h_out);
        carry = out.o;
        if (tape) tape->adapters.push_back(std::move(out));
    }
    return h;
}

std::vector<AdapterParameters> FrozenEncoder::backward(const Tape& tape, const std::vector<AdapterParameters>& adapters,
                                                       const Matrix& grad_out) const {
    if (tape.adapters.size() != adapters.size() || tape.layers.size() != layers_.size()) {
        throw std::logic_error("encoder backward: tape does not match the forward configuration");
    }
    std::vector<AdapterParameters> grads;
    grads.reserve(adapters.size());
    for (const auto& p : adapters) grads.push_back(AdapterParameters::zeros(p.hidden(), p.bottleneck()));

    Matrix grad_h = grad_out;
    Matrix grad_carry;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        {
            const auto& out = tape.adapters[l];
            if (grad_carry.empty()) grad_carry = Matrix(out.o.rows(), out.o.cols());
            AdapterGrads g = adapter_backward(out.tape, adapters[l], grad_h, grad_carry);
            grad_h = std::move(g.h);
            grad_carry = std::move(g.o_prev);
            grads[l] = std::move(g.params);
        }
        // Nothing upstream of the first layer is trainable.
        if (l > 0) grad_h = layer_backward(layers_[l], *tape.layers[l], grad_h);
    }
    return grads;
}

}  // namespace hgcode
