#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hgcode/numerics.hpp"

using namespace hgcode;

namespace {

double dot(const Matrix& a, const Matrix& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
    return s;
}

// loss = Σ f(params)⊙R; analytic grads from `backward(R)`
template <class Fwd, class Bwd>
GradCheckReport check_op(std::vector<Matrix*> params, Fwd fwd, Bwd bwd, Rng& rng) {
    const Matrix out = fwd();
    const Matrix r = rng.normal_matrix(out.rows(), out.cols(), 1.0);
    const std::vector<Matrix> grads = bwd(r);
    return grad_check([&] { return dot(fwd(), r); }, params, grads);
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("segment_softmax examples") {
    SegmentIndex two({0, 0}, 1);
    auto w = segment_softmax(std::vector<double>{0, 0}, two);
    CHECK(w[0] == 0.5);
    CHECK(w[1] == 0.5);

    SegmentIndex one({0}, 1);
    CHECK(segment_softmax(std::vector<double>{7.3}, one)[0] == 1.0);

    auto w12 = segment_softmax(std::vector<double>{1, 2}, two);
    const double e = std::exp(1.0);
    CHECK(w12[0] == doctest::Approx(1 / (1 + e)).epsilon(1e-14));
    CHECK(w12[1] == doctest::Approx(e / (1 + e)).epsilon(1e-14));
    CHECK(w12[0] == doctest::Approx(0.26894).epsilon(1e-5));

    auto big = segment_softmax(std::vector<double>{1000, 1001}, two);
    CHECK(std::isfinite(big[0]));
    CHECK(std::abs(big[0] - w12[0]) < 1e-12);
}

TEST_CASE("segment_softmax normalization and shift invariance") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t groups = 1 + rng.below(6);
        const std::size_t n = groups + rng.below(20);
        std::vector<std::uint32_t> g(n);
        for (std::size_t k = 0; k < n; ++k) g[k] = static_cast<std::uint32_t>(k < groups ? k : rng.below(groups));
        SegmentIndex idx(g, groups);
        std::vector<double> s(n), shifted(n), shift(groups);
        for (auto& c : shift) c = rng.uniform(-50, 50);
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = rng.normal(0, 3);
            shifted[k] = s[k] + shift[g[k]];
        }
        auto w = segment_softmax(s, idx);
        auto ws = segment_softmax(shifted, idx);
        std::vector<double> sums(groups, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            sums[g[k]] += w[k];
            CHECK(std::abs(w[k] - ws[k]) <= 1e-12);
        }
        for (double t : sums) CHECK(std::abs(t - 1.0) <= 1e-12);
    }
}

TEST_CASE("segment_weighted_sum") {
    SegmentIndex one({0}, 1);
    Matrix v{{3, -1, 2}};
    CHECK(segment_weighted_sum(v, std::vector<double>{1.0}, one) == v);

    SegmentIndex two({0, 0}, 1);
    Matrix rows{{2, 0}, {0, 2}};
    CHECK(segment_weighted_sum(rows, std::vector<double>{0.5, 0.5}, two) == Matrix{{1, 1}});

    SegmentIndex with_empty({0, 2}, 3);
    auto out = segment_weighted_sum(rows, std::vector<double>{1, 1}, with_empty);
    CHECK(out.rows() == 3);
    CHECK(out(1, 0) == 0.0);
    CHECK(out(1, 1) == 0.0);

    CHECK_THROWS_AS(segment_weighted_sum(rows, std::vector<double>{1}, two), ShapeError);

    Rng rng(5);
    const Matrix five = rng.normal_matrix(5, 4, 1.0);
    std::vector<double> w(5);
    for (auto& x : w) x = rng.uniform();
    SegmentIndex g5({0, 0, 0, 0, 0}, 1);
    auto got = segment_weighted_sum(five, w, g5);
    for (std::size_t c = 0; c < 4; ++c) {
        double s = 0;
        for (std::size_t k = 0; k < 5; ++k) s += w[k] * five(k, c);
        CHECK(std::abs(got(0, c) - s) <= 1e-14);
    }
}

TEST_CASE("grad_check basics") {
    Matrix w{{3.0}};
    std::vector<Matrix*> p{&w};
    auto r = grad_check([&] { return w(0, 0) * w(0, 0); }, p, std::vector<Matrix>{Matrix{{6.0}}});
    CHECK(r.passed);
    CHECK(r.max_rel_error < 1e-10);
    CHECK(w(0, 0) == 3.0);

    auto wrong = grad_check([&] { return w(0, 0) * w(0, 0); }, p, std::vector<Matrix>{Matrix{{6.1}}});
    CHECK_FALSE(wrong.passed);

    // relu at exactly 0 is a kink and gets skipped
    Matrix z{{0.0, 1.5}};
    std::vector<Matrix*> pz{&z};
    auto rz = grad_check([&] { return relu(z)(0, 0) + relu(z)(0, 1); }, pz,
                         std::vector<Matrix>{relu_backward(z, Matrix{{1.0, 1.0}})});
    CHECK(rz.passed);
    REQUIRE(rz.skipped.size() == 1);
    CHECK(rz.skipped[0] == Coordinate{0, 0});
    CHECK(rz.checked == 1);

    CHECK_THROWS_AS(grad_check([&] { return std::log(w(0, 0) - 3.0); }, p, std::vector<Matrix>{Matrix{{0.0}}}),
                    NonFiniteLoss);
}

TEST_CASE("dense op backward passes") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const std::size_t n = 1 + rng.below(4), k = 1 + rng.below(4), m = 1 + rng.below(4);
        Matrix a = rng.normal_matrix(n, k, 1.0), b = rng.normal_matrix(k, m, 1.0);
        Matrix w = rng.normal_matrix(m, k, 1.0), bias = rng.normal_matrix(1, m, 1.0);

        auto mm = check_op({&a, &b}, [&] { return matmul(a, b); },
                           [&](const Matrix& r) { return std::vector{matmul_bt(r, b), matmul_at(a, r)}; }, rng);
        CHECK(mm.passed);

        auto lin = check_op({&a, &w, &bias}, [&] { return linear(a, w, bias); },
                            [&](const Matrix& r) {
                                auto g = linear_backward(a, w, r);
                                return std::vector{g.input, g.weight, g.bias};
                            },
                            rng);
        CHECK(lin.passed);

        Matrix x = rng.normal_matrix(n, m, 1.0);
        auto ba = check_op({&x, &bias}, [&] { return bias_add(x, bias); },
                           [&](const Matrix& r) { return std::vector{r, column_sums(r)}; }, rng);
        CHECK(ba.passed);

        Matrix y = rng.normal_matrix(n, m, 1.0);
        auto ad = check_op({&x, &y}, [&] { return add(x, y); },
                           [&](const Matrix& r) { return std::vector{r, r}; }, rng);
        CHECK(ad.passed);

        auto re = check_op({&x}, [&] { return relu(x); },
                           [&](const Matrix& r) { return std::vector{relu_backward(x, r)}; }, rng);
        CHECK(re.passed);

        auto sm = check_op({&x}, [&] { return softmax_rows(x); },
                           [&](const Matrix& r) { return std::vector{softmax_rows_backward(softmax_rows(x), r)}; },
                           rng);
        CHECK(sm.passed);

        Matrix gamma = rng.normal_matrix(1, m, 1.0), beta = rng.normal_matrix(1, m, 1.0);
        if (m > 1) {
            auto ln = check_op({&x, &gamma, &beta}, [&] { return layer_norm(x, gamma, beta, 1e-5); },
                               [&](const Matrix& r) {
                                   LayerNormCache c;
                                   layer_norm(x, gamma, beta, 1e-5, &c);
                                   auto g = layer_norm_backward(c, gamma, r);
                                   return std::vector{g.input, g.gamma, g.beta};
                               },
                               rng);
            CHECK(ln.passed);
        }

        auto cc = check_op({&a, &x}, [&] { return concat_cols(a, x); },
                           [&](const Matrix& r) {
                               auto [l, rr] = split_cols(r, a.cols());
                               return std::vector{l, rr};
                           },
                           rng);
        CHECK(cc.passed);

        std::vector<std::uint32_t> idx(1 + rng.below(6));
        for (auto& i : idx) i = static_cast<std::uint32_t>(rng.below(n));
        auto ga = check_op({&x}, [&] { return gather_rows(x, idx); },
                           [&](const Matrix& r) { return std::vector{scatter_add_rows(r, idx, n)}; }, rng);
        CHECK(ga.passed);

        std::vector<std::size_t> labels(n);
        for (auto& l : labels) l = rng.below(m);
        Matrix grad_logits;
        cross_entropy_with_logits(x, labels, &grad_logits);
        std::vector<Matrix*> px{&x};
        auto ce = grad_check([&] { return cross_entropy_with_logits(x, labels); }, px, std::vector{grad_logits});
        CHECK(ce.passed);
    }
}

TEST_CASE("segment op backward passes") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed * 31);
        const std::size_t groups = 1 + rng.below(4);
        const std::size_t n = groups + rng.below(6);
        std::vector<std::uint32_t> g(n);
        for (std::size_t k = 0; k < n; ++k) g[k] = static_cast<std::uint32_t>(k < groups ? k : rng.below(groups));
        SegmentIndex idx(g, groups);

        Matrix s = rng.normal_matrix(1, n, 1.0);
        const Matrix rs = rng.normal_matrix(1, n, 1.0);
        auto w = segment_softmax(s.values(), idx);
        auto gs = segment_softmax_backward(w, rs.values(), idx);
        std::vector<Matrix*> ps{&s};
        auto r1 = grad_check(
            [&] {
                auto ww = segment_softmax(s.values(), idx);
                return std::inner_product(ww.begin(), ww.end(), rs.values().begin(), 0.0);
            },
            ps, std::vector{Matrix(1, n, gs)});
        CHECK(r1.passed);

        Matrix vals = rng.normal_matrix(n, 3, 1.0);
        Matrix wt = rng.normal_matrix(1, n, 1.0);
        const Matrix ro = rng.normal_matrix(groups, 3, 1.0);
        auto back = segment_weighted_sum_backward(vals, wt.values(), idx, ro);
        std::vector<Matrix*> pv{&vals, &wt};
        auto r2 = grad_check([&] { return dot(segment_weighted_sum(vals, wt.values(), idx), ro); }, pv,
                             std::vector{back.values, Matrix(1, n, back.weights)});
        CHECK(r2.passed);
    }
}

TEST_CASE("rng determinism") {
    Rng a(42), b(42);
    CHECK(a.normal_matrix(3, 3, 1.0) == b.normal_matrix(3, 3, 1.0));
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(a.below(7) < 7);
    }
}

}  // TEST_SUITE
