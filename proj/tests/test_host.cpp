#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "hgcode/checks.hpp"
#include "hgcode/clone.hpp"
#include "hgcode/encoder.hpp"
#include "hgcode/optimizer.hpp"
#include "support.hpp"

using namespace hgcode;

namespace {

bool bit_equal(const Matrix& a, const Matrix& b) {
    return a.same_shape(b) && std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

std::vector<std::uint32_t> random_ids(Rng& rng, std::size_t n, std::size_t vocab) {
    std::vector<std::uint32_t> ids(n);
    for (auto& id : ids) id = static_cast<std::uint32_t>(rng.below(vocab));
    return ids;
}

std::shared_ptr<const HypergraphIndex> index_of(const TokenizedHypergraph& g) {
    return std::make_shared<HypergraphIndex>(HypergraphIndex::build(g));
}

PipelineConfig small_pipeline() {
    PipelineConfig c;
    c.encoder.max_length = 96;
    return c;
}

}  // namespace

TEST_SUITE("host") {

TEST_CASE("encoder shape, identity and sensitivity") {
    FrozenEncoderConfig cfg;
    FrozenEncoder enc(cfg);
    Rng rng(6);
    auto ids = random_ids(rng, 4, cfg.vocab);
    auto g = offset_tokens(random_hypergraph(rng, 3, 2), 1, 4);
    auto idx = index_of(g);

    const Matrix plain = enc.forward(ids, nullptr, nullptr, nullptr);
    CHECK(plain.rows() == 4);
    CHECK(plain.cols() == cfg.hidden);
    CHECK(all_finite(plain));

    auto adapters = init_parameters({cfg.layers, cfg.hidden, 8}, 3);
    CHECK(bit_equal(enc.forward(ids, &adapters, idx, nullptr), plain));

    adapters[0].w_up.fill(0.25);
    CHECK(max_abs_diff(enc.forward(ids, &adapters, idx, nullptr), plain) > 0.0);

    CHECK(FrozenEncoder(cfg).digest() == enc.digest());
    CHECK(enc.digest().size() == 16);

    std::vector<std::uint32_t> long_ids(cfg.max_length + 1, 1);
    CHECK_THROWS_AS(enc.forward(long_ids, nullptr, nullptr, nullptr), std::length_error);

    FrozenEncoderConfig bad = cfg;
    bad.heads = 3;
    CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}

TEST_CASE("encoder backward matches finite differences") {
    FrozenEncoderConfig cfg;
    cfg.hidden = 8;
    cfg.ffn = 16;
    cfg.vocab = 32;
    FrozenEncoder enc(cfg);
    Rng rng(14);
    auto ids = random_ids(rng, 6, cfg.vocab);
    auto idx = index_of(offset_tokens(random_hypergraph(rng, 5, 4), 1, 6));
    std::vector<AdapterParameters> adapters;
    for (std::size_t l = 0; l < cfg.layers; ++l) adapters.push_back(random_parameters(rng, 8, 2, 0.3));
    const Matrix r = rng.normal_matrix(6, 8, 1.0);

    FrozenEncoder::Tape tape;
    const Matrix out = enc.forward(ids, &adapters, idx, &tape);
    auto grads = enc.backward(tape, adapters, r);

    std::vector<Matrix*> params;
    std::vector<Matrix> analytic;
    for (std::size_t l = 0; l < adapters.size(); ++l) {
        adapters[l].for_each([&](const std::string&, Matrix& m) { params.push_back(&m); });
        grads[l].for_each([&](const std::string&, Matrix& m) { analytic.push_back(m); });
    }
    auto report = grad_check(
        [&] {
            const Matrix o = enc.forward(ids, &adapters, idx, nullptr);
            double s = 0;
            for (std::size_t k = 0; k < o.size(); ++k) s += o.values()[k] * r.values()[k];
            return s;
        },
        params, analytic);
    CHECK(report.passed);
    CHECK(report.max_rel_error <= 1e-5);
}

TEST_CASE("metrics") {
    auto m = metrics_from_counts(2, 1, 1, 5);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));

    auto perfect = metrics_from_predictions({true, false, true}, {true, false, true});
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    auto none = metrics_from_predictions({false, false}, {true, false});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);

    auto no_pos = metrics_from_counts(0, 2, 0, 1);
    CHECK(no_pos.recall == 0.0);
    CHECK(no_pos.f1 == 0.0);
}

TEST_CASE("optimizer steps") {
    Matrix p{{1.0, -2.0}};
    const Matrix g{{0.5, -4.0}};
    std::vector<Matrix*> ps{&p};
    AdamOptimizer adam({OptimizerKind::Adam, 0.1, 0.9, 0.999, 1e-8, 0.01});
    adam.step(ps, std::vector{g});
    // first bias-corrected step moves each coordinate by lr·sign(g)
    CHECK(p(0, 0) == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx(-2.0 + 0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-12));
    CHECK(adam.steps_taken() == 1);

    Matrix q{{1.0}};
    std::vector<Matrix*> qs{&q};
    AdamOptimizer adamw({OptimizerKind::AdamW, 0.1, 0.9, 0.999, 1e-8, 0.5});
    adamw.step(qs, std::vector{Matrix{{0.0}}});
    CHECK(q(0, 0) == doctest::Approx(1.0 - 0.1 * 0.5).epsilon(1e-12));

    Matrix r{{1.0}};
    std::vector<Matrix*> rs{&r};
    AdamOptimizer plain({OptimizerKind::Adam, 0.1, 0.9, 0.999, 1e-8, 0.5});
    plain.step(rs, std::vector{Matrix{{0.0}}});
    CHECK(r(0, 0) == 1.0);

    // second step from hand-evaluated moments
    Matrix s{{0.0}};
    std::vector<Matrix*> ss{&s};
    AdamOptimizer two({OptimizerKind::Adam, 0.01, 0.9, 0.999, 1e-8, 0.0});
    two.step(ss, std::vector{Matrix{{1.0}}});
    two.step(ss, std::vector{Matrix{{3.0}}});
    const double m2 = (0.9 * 0.1 + 0.1 * 3.0) / (1 - 0.81);
    const double v2 = (0.999 * 0.001 + 0.001 * 9.0) / (1 - 0.999 * 0.999);
    CHECK(s(0, 0) == doctest::Approx(-0.01 / (1.0 + 1e-8) - 0.01 * m2 / (std::sqrt(v2) + 1e-8)).epsilon(1e-12));

    CHECK(optimizer_from_string("adamw") == OptimizerKind::AdamW);
    CHECK(to_string(OptimizerKind::Adam) == "adam");
    CHECK_THROWS(optimizer_from_string("sgd"));
}

TEST_CASE("synthetic clone set") {
    auto a = make_synthetic_clone_set(3, 40);
    CHECK(a == make_synthetic_clone_set(3, 40));
    CHECK_FALSE(a == make_synthetic_clone_set(4, 40));
    CHECK(a.size() == 40);
    CHECK(std::count_if(a.begin(), a.end(), [](auto& e) { return e.clone; }) == 20);
    auto odd = make_synthetic_clone_set(3, 7);
    CHECK(std::count_if(odd.begin(), odd.end(), [](auto& e) { return e.clone; }) == 3);
    CHECK(synthetic_template_count() >= 2);

    for (const auto& ex : make_synthetic_clone_set(11, 80)) {
        auto ta = parse(ex.code_a, Language::Java), tb = parse(ex.code_b, Language::Java);
        CHECK_FALSE(ta.has_error());
        CHECK_FALSE(tb.has_error());
        CHECK((postorder_kinds(ta) == postorder_kinds(tb)) == ex.clone);
        if (ex.clone) CHECK(ex.code_a != ex.code_b);
    }
}

TEST_CASE("jsonl round trip") {
    auto data = make_synthetic_clone_set(5, 10);
    auto path = std::filesystem::temp_directory_path() / "hgcode_clone_test.jsonl";
    write_jsonl(path, data);
    CHECK(read_jsonl(path) == data);
    {
        std::ofstream out(path);
        out << R"({"code_a": "x", "code_b": "y", "label": "maybe"})" << "\n";
    }
    CHECK_THROWS_WITH(read_jsonl(path), doctest::Contains(":1:"));
    std::filesystem::remove(path);
}

TEST_CASE("pipeline basics") {
    ClonePipeline pl(small_pipeline(), hgtest::demo_tokenizer());
    const auto data = make_synthetic_clone_set(2, 6);
    CHECK(pl.classify(data[0].code_a, data[0].code_b) == 0.5);

    auto s = pl.prepare(data[0].code_a);
    CHECK(s.ids[0] == 0);
    CHECK(s.index->token_count == s.ids.size());
    CHECK(s.index->by_token.members(0).empty());
    CHECK(pl.represent(s).rows() == 1);

    auto g = pl.prepare_graph(data[0].code_a);
    CHECK(g.token_count <= 96);
    CHECK(validate(g).ok);

    Rng rng(2);
    pl.head.w2 = rng.normal_matrix(2, pl.head.w2.cols(), 1.0);
    const double p_ab = pl.classify(data[1].code_a, data[1].code_b);
    CHECK(p_ab > 0.0);
    CHECK(p_ab < 1.0);

    auto tensors = pl.trainable_tensors();
    CHECK(tensors.count("head.W1") == 1);
    CHECK(tensors.count("layer3.W_up") == 1);
    ClonePipeline other(small_pipeline(), hgtest::demo_tokenizer());
    other.load_trainable(tensors);
    CHECK(other.trainable_tensors() == tensors);
    CHECK(other.classify(data[1].code_a, data[1].code_b) == p_ab);

    CHECK_THROWS(pl.classify("class {{{{", "\xff"));
}

TEST_CASE("fresh adapters are transparent") {
    const auto val = make_synthetic_clone_set(9, 16);
    PipelineConfig with = small_pipeline(), without = small_pipeline();
    without.use_adapters = false;
    ClonePipeline a(with, hgtest::demo_tokenizer()), b(without, hgtest::demo_tokenizer());
    Rng rng(4);
    a.head.w2 = b.head.w2 = rng.normal_matrix(2, a.head.w2.cols(), 1.0);
    a.head.b2 = b.head.b2 = rng.normal_matrix(1, 2, 1.0);
    for (const auto& ex : val) CHECK(a.classify(ex.code_a, ex.code_b) == b.classify(ex.code_a, ex.code_b));
    auto ma = evaluate(a, val), mb = evaluate(b, val);
    CHECK(ma.tp == mb.tp);
    CHECK(ma.fp == mb.fp);
    CHECK(ma.fn == mb.fn);
    CHECK(ma.f1 == mb.f1);
}

TEST_CASE("ablation subsets run") {
    const auto data = make_synthetic_clone_set(1, 4);
    for (unsigned mask = 0; mask < 8; ++mask) {
        PipelineConfig c = small_pipeline();
        c.types.clear();
        for (unsigned b = 0; b < 3; ++b)
            if (mask >> b & 1) c.types.insert(kAllHyperedgeTypes[b]);
        ClonePipeline pl(c, hgtest::demo_tokenizer());
        auto g = pl.prepare_graph(data[0].code_a);
        for (auto t : g.hyperedge_types) CHECK(c.types.count(t) == 1);
        CHECK(evaluate(pl, data).tp + evaluate(pl, data).fn == 2);
    }
}

TEST_CASE("training") {
    const auto train = make_synthetic_clone_set(21, 32);
    const auto val = make_synthetic_clone_set(22, 8);

    SUBCASE("zero epochs is a no-op") {
        ClonePipeline pl(small_pipeline(), hgtest::demo_tokenizer());
        const auto before = pl.trainable_tensors();
        auto cfg = train_preset("desk");
        cfg.epochs = 0;
        auto rep = train_adapters(pl, train, val, cfg);
        CHECK(rep.epoch_loss.empty());
        CHECK(rep.best_epoch == 0);
        CHECK(pl.trainable_tensors() == before);
        CHECK(rep.frozen_digest_before == rep.frozen_digest_after);
    }

    SUBCASE("loss decreases, encoder frozen, runs reproduce") {
        auto cfg = train_preset("desk");
        cfg.epochs = 6;
        cfg.shuffle_seed = 3;
        ClonePipeline a(small_pipeline(), hgtest::demo_tokenizer());
        const std::string frozen = a.encoder().digest();
        auto rep = train_adapters(a, train, val, cfg);
        CHECK(rep.epoch_loss.size() == 6);
        CHECK(rep.epoch_val_f1.size() == 6);
        CHECK(rep.final_loss < rep.initial_loss);
        CHECK(rep.initial_loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(rep.frozen_digest_before == frozen);
        CHECK(rep.frozen_digest_after == frozen);
        CHECK(a.encoder().digest() == frozen);
        CHECK(rep.best_epoch >= 1);
        CHECK(rep.best_val_f1 == rep.epoch_val_f1[rep.best_epoch - 1]);
        CHECK(rep.trainable_digest == digest_tensors(a.trainable_tensors()));
        CHECK(rep.to_json()["preset"] == "desk");

        ClonePipeline b(small_pipeline(), hgtest::demo_tokenizer());
        cfg.threads = 1;
        auto rep_b = train_adapters(b, train, val, cfg);
        CHECK(rep_b.trainable_digest == rep.trainable_digest);
        CHECK(b.trainable_tensors() == a.trainable_tensors());
    }

    SUBCASE("presets") {
        auto pc = train_preset("paper-clone");
        CHECK(pc.optimizer.kind == OptimizerKind::AdamW);
        CHECK(pc.optimizer.learning_rate == 5e-5);
        CHECK(pc.batch == 4);
        CHECK(pc.epochs == 10);
        auto ps = train_preset("paper-summarization");
        CHECK(ps.optimizer.kind == OptimizerKind::Adam);
        CHECK(ps.optimizer.learning_rate == 1e-4);
        CHECK(ps.batch == 64);
        CHECK(ps.epochs == 20);
        CHECK_THROWS(train_preset("fast"));
    }

    SUBCASE("non-finite loss aborts") {
        ClonePipeline pl(small_pipeline(), hgtest::demo_tokenizer());
        pl.head.b2(0, 1) = std::nan("");
        auto cfg = train_preset("desk");
        cfg.epochs = 1;
        cfg.calibrate = false;
        CHECK_THROWS_AS(train_adapters(pl, train, val, cfg), NonFiniteTrainingLoss);
    }
}

}  // TEST_SUITE
