#include "hgcode/adapter.hpp"

#include <cmath>
#include <fmt/format.h>

namespace hgcode {

void PlmShapeConfig::check() const {
    if (layers < 1 || bottleneck < 1 || hidden < bottleneck) {
        throw std::invalid_argument(
            fmt::format("invalid shape: layers={} hidden={} bottleneck={}", layers, hidden, bottleneck));
    }
}

AdapterParameters AdapterParameters::zeros(std::size_t hidden, std::size_t bottleneck) {
    AdapterParameters p;
    p.w_down = Matrix(bottleneck, hidden);
    p.b_down = Matrix(1, bottleneck);
    p.w_up = Matrix(hidden, bottleneck);
    p.b_up = Matrix(1, hidden);
    for (std::size_t t = 0; t < kHyperedgeTypeCount; ++t) {
        p.query[t] = Matrix(1, bottleneck);
        p.w_type[t] = Matrix(bottleneck, bottleneck);
        p.b_type[t] = Matrix(1, bottleneck);
    }
    return p;
}

std::size_t AdapterParameters::parameter_count() const {
    std::size_t n = 0;
    for_each([&](const std::string&, const Matrix& m) { n += m.size(); });
    return n;
}

std::vector<AdapterParameters> init_parameters(const PlmShapeConfig& cfg, std::uint64_t seed) {
    cfg.check();
    Rng rng(seed);
    const double down_bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
    const double type_bound = 1.0 / std::sqrt(static_cast<double>(cfg.bottleneck));
    std::vector<AdapterParameters> layers;
    layers.reserve(cfg.layers);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        auto p = AdapterParameters::zeros(cfg.hidden, cfg.bottleneck);
        p.w_down = rng.uniform_matrix(cfg.bottleneck, cfg.hidden, -down_bound, down_bound);
        for (std::size_t t = 0; t < kHyperedgeTypeCount; ++t) {
            p.query[t] = rng.normal_matrix(1, cfg.bottleneck, 0.02);
            p.w_type[t] = rng.uniform_matrix(cfg.bottleneck, cfg.bottleneck, -type_bound, type_bound);
        }
        layers.push_back(std::move(p));
    }
    return layers;
}

std::uint64_t count_parameters(const PlmShapeConfig& cfg, AdapterVariant variant) {
    const std::uint64_t L = cfg.layers;
    const std::uint64_t C = cfg.hidden;
    const std::uint64_t D = cfg.bottleneck;
    const std::uint64_t plain = L * (C * D + D + D * C + C);
    if (variant == AdapterVariant::PlainAdapter) return plain;
    const std::uint64_t types = PlmShapeConfig::type_count;
    return plain + L * (types * (D * D + D) + types * D);
}

std::uint64_t tenths_of_million(std::uint64_t count) { return (count + 50000) / 100000; }

std::string format_millions(std::uint64_t count) {
    const std::uint64_t t = tenths_of_million(count);
    return fmt::format("{}.{}M", t / 10, t % 10);
}

HypergraphIndex HypergraphIndex::build(const TokenizedHypergraph& g) {
    HypergraphIndex idx;
    idx.token_count = g.token_count;
    idx.edge_type = g.hyperedge_types;
    idx.pair_token.reserve(g.incidence.size());
    idx.pair_edge.reserve(g.incidence.size());
    for (const auto& p : g.incidence) {
        if (p.token >= g.token_count) {
            throw ShapeError(fmt::format("token id {} out of range for {} tokens", p.token, g.token_count));
        }
        if (p.edge >= g.edge_count()) {
            throw ShapeError(fmt::format("hyperedge id {} out of range for {} hyperedges", p.edge, g.edge_count()));
        }
        idx.pair_token.push_back(p.token);
        idx.pair_edge.push_back(p.edge);
    }
    idx.by_edge = SegmentIndex(idx.pair_edge, idx.edge_count());
    idx.by_token = SegmentIndex(idx.pair_token, idx.token_count);
    return idx;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void check_params(const AdapterParameters& params, std::size_t hidden) {
    const std::size_t d = params.bottleneck();
    bool ok = params.w_down.rows() == d && params.w_down.cols() == hidden && params.b_down.rows() == 1 &&
              params.b_down.cols() == d && params.w_up.rows() == hidden && params.w_up.cols() == d &&
              params.b_up.rows() == 1 && params.b_up.cols() == hidden;
    for (std::size_t t = 0; t < kHyperedgeTypeCount; ++t) {
        ok = ok && params.query[t].rows() == 1 && params.query[t].cols() == d && params.w_type[t].rows() == d &&
             params.w_type[t].cols() == d && params.b_type[t].rows() == 1 && params.b_type[t].cols() == d;
    }
    if (!ok) throw ShapeError(fmt::format("adapter parameters do not match hidden width {}", hidden));
}

}  // namespace

AdapterOutput adapter_forward(const Matrix& h, const Matrix* o_prev, std::shared_ptr<const HypergraphIndex> index,
                              const AdapterParameters& params, bool training) {
    const std::size_t n = h.rows();
    const std::size_t d = params.bottleneck();
    check_params(params, h.cols());
    if (index->token_count != n) {
        throw ShapeError(fmt::format("hypergraph has {} tokens but hidden states have {} rows", index->token_count, n));
    }
    if (o_prev && (o_prev->rows() != n || o_prev->cols() != d)) {
        throw ShapeError(fmt::format("carried o is {}x{}, expected {}x{}", o_prev->rows(), o_prev->cols(), n, d));
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    const HypergraphIndex& idx = *index;

    Matrix pre = linear(h, params.w_down, params.b_down);
    if (o_prev) pre += *o_prev;
    Matrix x = relu(pre);

    // Tokens to hyperedges, attention with the type query.
    Matrix x_pairs = gather_rows(x, idx.pair_token);
    std::vector<double> scores(idx.pair_count());
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const auto t = AdapterParameters::index(idx.edge_type[idx.pair_edge[k]]);
        scores[k] = scale * dot(params.query[t].row(0), x_pairs.row(k));
    }
    std::vector<double> alpha_ne = segment_softmax(scores, idx.by_edge);
    Matrix p = segment_weighted_sum(x_pairs, alpha_ne, idx.by_edge);

    // Type-specific transform.
    Matrix p_prime(idx.edge_count(), d);
    for (std::size_t e = 0; e < idx.edge_count(); ++e) {
        const auto t = AdapterParameters::index(idx.edge_type[e]);
        const Matrix& w = params.w_type[t];
        auto out = p_prime.row(e);
        auto in = p.row(e);
        for (std::size_t i = 0; i < d; ++i) out[i] = dot(w.row(i), in) + params.b_type[t](0, i);
    }

    // Hyperedges back to tokens; tokens in no hyperedge keep o = 0.
    Matrix p_prime_pairs = gather_rows(p_prime, idx.pair_edge);
    for (std::size_t k = 0; k < scores.size(); ++k) scores[k] = scale * dot(x_pairs.row(k), p_prime_pairs.row(k));
    std::vector<double> alpha_en = segment_softmax(scores, idx.by_token);
    Matrix o = segment_weighted_sum(p_prime_pairs, alpha_en, idx.by_token);

    Matrix h_out = h;
    h_out += linear(x, params.w_up, params.b_up);

    AdapterOutput out{std::move(h_out), std::move(o), std::nullopt};
    if (training) {
        out.tape = ActivationTape{std::move(index),   h,
                                  std::move(pre),     o_prev != nullptr,
                                  std::move(x),       std::move(x_pairs),
                                  std::move(alpha_ne), std::move(p),
                                  std::move(p_prime), std::move(p_prime_pairs),
                                  std::move(alpha_en)};
    }
    return out;
}

AdapterOutput adapter_forward(const Matrix& h, const Matrix* o_prev, const TokenizedHypergraph& g,
                              const AdapterParameters& params, bool training) {
    return adapter_forward(h, o_prev, std::make_shared<const HypergraphIndex>(HypergraphIndex::build(g)), params,
                           training);
}

AdapterGrads adapter_backward(const std::optional<ActivationTape>& tape, const AdapterParameters& params,
                              const Matrix& grad_h_out, const Matrix& grad_o) {
    if (!tape) throw std::logic_error("adapter_backward: missing tape (forward ran outside training mode)");
    const ActivationTape& t = *tape;
    const HypergraphIndex& idx = *t.index;
    const std::size_t n = t.h.rows();
    const std::size_t d = params.bottleneck();
    if (!grad_h_out.same_shape(t.h)) throw ShapeError("adapter_backward: grad_h_out shape mismatch");
    if (grad_o.rows() != n || grad_o.cols() != d) throw ShapeError("adapter_backward: grad_o shape mismatch");
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    AdapterGrads g{grad_h_out, Matrix(), AdapterParameters::zeros(t.h.cols(), d)};

    // Up-projection and residual.
    LinearGrads up = linear_backward(t.x, params.w_up, grad_h_out);
    Matrix grad_x = std::move(up.input);
    g.params.w_up = std::move(up.weight);
    g.params.b_up = std::move(up.bias);

    // o = Σ_e α_en p'_e
    SegmentSumGrads sum_en = segment_weighted_sum_backward(t.p_prime_pairs, t.alpha_en, idx.by_token, grad_o);
    Matrix grad_pp_pairs = std::move(sum_en.values);
    std::vector<double> grad_s2 = segment_softmax_backward(t.alpha_en, sum_en.weights, idx.by_token);
    Matrix grad_x_pairs(idx.pair_count(), d);
    for (std::size_t k = 0; k < idx.pair_count(); ++k) {
        axpy(scale * grad_s2[k], t.p_prime_pairs.row(k), grad_x_pairs.row(k));
        axpy(scale * grad_s2[k], t.x_pairs.row(k), grad_pp_pairs.row(k));
    }
    Matrix grad_p_prime = scatter_add_rows(grad_pp_pairs, idx.pair_edge, idx.edge_count());

    // p' = W_ρ p + b_ρ
    Matrix grad_p(idx.edge_count(), d);
    for (std::size_t e = 0; e < idx.edge_count(); ++e) {
        const auto ti = AdapterParameters::index(idx.edge_type[e]);
        auto gp = grad_p_prime.row(e);
        auto pe = t.p.row(e);
        Matrix& gw = g.params.w_type[ti];
        for (std::size_t i = 0; i < d; ++i) {
            axpy(gp[i], pe, gw.row(i));
            g.params.b_type[ti](0, i) += gp[i];
            axpy(gp[i], params.w_type[ti].row(i), grad_p.row(e));
        }
    }

    // p = Σ_n α_ne x_n
    SegmentSumGrads sum_ne = segment_weighted_sum_backward(t.x_pairs, t.alpha_ne, idx.by_edge, grad_p);
    grad_x_pairs += sum_ne.values;
    std::vector<double> grad_s1 = segment_softmax_backward(t.alpha_ne, sum_ne.weights, idx.by_edge);
    for (std::size_t k = 0; k < idx.pair_count(); ++k) {
        const auto ti = AdapterParameters::index(idx.edge_type[idx.pair_edge[k]]);
        axpy(scale * grad_s1[k], t.x_pairs.row(k), g.params.query[ti].row(0));
        axpy(scale * grad_s1[k], params.query[ti].row(0), grad_x_pairs.row(k));
    }
    grad_x += scatter_add_rows(grad_x_pairs, idx.pair_token, n);

    // x = relu(W_down h + b_down + o_prev)
    Matrix grad_pre = relu_backward(t.pre, grad_x);
    if (t.has_prev) g.o_prev = grad_pre;
    LinearGrads down = linear_backward(t.h, params.w_down, grad_pre);
    g.h += down.input;
    g.params.w_down = std::move(down.weight);
    g.params.b_down = std::move(down.bias);
    return g;
}

}  // namespace hgcode
