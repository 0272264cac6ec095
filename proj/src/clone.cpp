#include "hgcode/clone.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <fmt/format.h>

namespace hgcode {

namespace {

// Lexical tokens are separated by single spaces; @F names the method and
// @A..@D are its locals.
constexpr std::string_view kTemplates[] = {
    "int @F ( int [ ] @A ) { int @B = 0 ; for ( int @C = 0 ; @C < @A . length ; @C ++ ) { @B += @A [ @C ] ; } "
    "return @B ; }",
    "int @F ( int [ ] @A ) { int @B = @A [ 0 ] ; for ( int @C : @A ) { if ( @C > @B ) { @B = @C ; } } return @B ; }",
    "long @F ( int @A ) { if ( @A <= 1 ) { return 1 ; } return @A * @F ( @A - 1 ) ; }",
    "String @F ( String @A ) { StringBuilder @B = new StringBuilder ( @A ) ; return @B . reverse ( ) . toString ( ) ; }",
    "int @F ( int @A ) { int @B = 0 ; while ( @A > 0 ) { @A = @A / 10 ; @B ++ ; } return @B ; }",
    "void @F ( int [ ] @A , int @B , int @C ) { int @D = @A [ @B ] ; @A [ @B ] = @A [ @C ] ; @A [ @C ] = @D ; }",
    "boolean @F ( List < String > @A , String @B ) { for ( String @C : @A ) { if ( @C . equals ( @B ) ) { "
    "return true ; } } return false ; }",
    "int @F ( int @A ) { return @A < 0 ? - @A : @A ; }",
    "int @F ( String @A ) { try { return Integer . parseInt ( @A ) ; } catch ( NumberFormatException @B ) { "
    "return - 1 ; } }",
    "int @F ( int @A ) { int @B = 0 , @C = 1 ; for ( int @D = 0 ; @D < @A ; @D ++ ) { int t = @B + @C ; @B = @C ; "
    "@C = t ; } return @B ; }",
    "String @F ( int @A ) { switch ( @A ) { case 0 : return \"zero\" ; case 1 : return \"one\" ; default : "
    "return \"many\" ; } }",
    "int @F ( int @A ) { int @B = 0 ; do { @B += @A % 10 ; @A /= 10 ; } while ( @A != 0 ) ; return @B ; }",
};

constexpr std::string_view kMethodNames[] = {"compute", "process",  "handle",   "evaluate", "findMax",  "sumAll",
                                             "applyRule", "runTask", "doWork",  "calcValue", "getResult", "transform"};

constexpr std::string_view kLocalNames[] = {
    "value",    "count",    "total",     "index",        "item",      "buffer",   "result",   "limit",
    "current",  "offset",   "number",    "input",        "text",      "left",     "right",    "first",
    "second",   "acc",      "tmp",       "data",         "size",      "pos",      "itemCount", "maxValue",
    "inputText", "runningTotal", "nextIndex", "leftPart", "digitSum", "curValue", "xs",       "n"};

constexpr std::string_view kGaps[] = {" ", " ", " ", " ", "  ", "\n", "\n    ", "\n\t"};

std::string instantiate(std::string_view tmpl, Rng& rng) {
    std::string names[5];
    names[0] = kMethodNames[rng.below(std::size(kMethodNames))];
    std::vector<std::size_t> order(std::size(kLocalNames));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < 4; ++i) {
        std::swap(order[i], order[i + rng.below(order.size() - i)]);
        names[i + 1] = kLocalNames[order[i]];
    }

    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        const char c = tmpl[i];
        if (c == '@' && i + 1 < tmpl.size()) {
            const char p = tmpl[++i];
            out += p == 'F' ? names[0] : names[1 + (p - 'A')];
        } else if (c == ' ') {
            out += kGaps[rng.below(std::size(kGaps))];
        } else {
            out += c;
        }
    }
    return out;
}

std::uint32_t hashed_id(std::string_view token, std::size_t vocab) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : token) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::uint32_t>(h % (vocab - 1) + 1);
}

struct HeadForward {
    Matrix z;       // 1 × 2C
    Matrix hidden;  // pre-activation
    Matrix act;
    Matrix logits;  // 1 × 2
};

HeadForward head_forward(const CloneHead& head, const Matrix& a, const Matrix& b) {
    HeadForward f;
    f.z = concat_cols(a, b);
    for (std::size_t j = 0; j < f.z.cols(); ++j) f.z(0, j) = (f.z(0, j) - head.input_mean(0, j)) * head.input_inv_std(0, j);
    f.hidden = linear(f.z, head.w1, head.b1);
    f.act = relu(f.hidden);
    f.logits = linear(f.act, head.w2, head.b2);
    return f;
}

double probability_from_logits(const Matrix& logits) {
    const Matrix p = softmax_rows(logits);
    return p(0, 1);
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(jobs, 1)));
}

// Runs fn(i) for i in [0, n) across workers; results are written by index.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
    const unsigned workers = worker_count(threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += workers) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

struct ExampleGrads {
    double loss = 0.0;
    std::vector<AdapterParameters> adapters;
    CloneHead head;
};

ExampleGrads example_grads(const ClonePipeline& pl, const PreparedExample& ex) {
    const FrozenEncoder& enc = pl.encoder();
    const bool use = pl.config().use_adapters;
    const auto* adapters = use ? &pl.adapters : nullptr;

    FrozenEncoder::Tape tape_a, tape_b;
    const Matrix out_a = enc.forward(ex.a.ids, adapters, ex.a.index, &tape_a);
    const Matrix out_b = enc.forward(ex.b.ids, adapters, ex.b.index, &tape_b);
    const HeadForward f = head_forward(pl.head, Matrix::row_vector(out_a.row(0)), Matrix::row_vector(out_b.row(0)));

    ExampleGrads g;
    Matrix grad_logits;
    const std::size_t label = ex.clone ? 1 : 0;
    g.loss = cross_entropy_with_logits(f.logits, std::span<const std::size_t>(&label, 1), &grad_logits);

    LinearGrads l2 = linear_backward(f.act, pl.head.w2, grad_logits);
    Matrix grad_hidden = relu_backward(f.hidden, l2.input);
    LinearGrads l1 = linear_backward(f.z, pl.head.w1, grad_hidden);
    g.head.w1 = std::move(l1.weight);
    g.head.b1 = std::move(l1.bias);
    g.head.w2 = std::move(l2.weight);
    g.head.b2 = std::move(l2.bias);

    if (use) {
        const std::size_t c = enc.config().hidden;
        Matrix grad_z = l1.input;
        for (std::size_t j = 0; j < grad_z.cols(); ++j) grad_z(0, j) *= pl.head.input_inv_std(0, j);
        auto [ga, gb] = split_cols(grad_z, c);
        Matrix grad_out_a(out_a.rows(), c);
        Matrix grad_out_b(out_b.rows(), c);
        for (std::size_t j = 0; j < c; ++j) {
            grad_out_a(0, j) = ga(0, j);
            grad_out_b(0, j) = gb(0, j);
        }
        g.adapters = enc.backward(tape_a, pl.adapters, grad_out_a);
        const auto more = enc.backward(tape_b, pl.adapters, grad_out_b);
        for (std::size_t l = 0; l < g.adapters.size(); ++l) {
            auto& dst = g.adapters[l];
            const auto& src = more[l];
            std::vector<Matrix*> d;
            dst.for_each([&](const std::string&, Matrix& m) { d.push_back(&m); });
            std::size_t k = 0;
            src.for_each([&](const std::string&, const Matrix& m) { *d[k++] += m; });
        }
    }
    return g;
}

std::vector<Matrix*> trainable_pointers(ClonePipeline& pl) {
    std::vector<Matrix*> out;
    if (pl.config().use_adapters) {
        for (auto& a : pl.adapters) a.for_each([&](const std::string&, Matrix& m) { out.push_back(&m); });
    }
    pl.head.for_each_trainable([&](const std::string&, Matrix& m) { out.push_back(&m); });
    return out;
}

std::vector<Matrix> grads_in_order(ExampleGrads& g, bool with_adapters) {
    std::vector<Matrix> out;
    if (with_adapters) {
        for (auto& a : g.adapters) a.for_each([&](const std::string&, Matrix& m) { out.push_back(std::move(m)); });
    }
    g.head.for_each_trainable([&](const std::string&, Matrix& m) { out.push_back(std::move(m)); });
    return out;
}

}  // namespace

// ---- dataset --------------------------------------------------------------

std::size_t synthetic_template_count() { return std::size(kTemplates); }

std::vector<CloneExample> make_synthetic_clone_set(std::uint64_t seed, std::size_t size) {
    if (size < 2) throw std::invalid_argument("synthetic clone set needs at least 2 pairs");
    Rng rng(seed);
    std::vector<bool> labels(size, false);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(size / 2), true);
    for (std::size_t i = size; i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);

    const std::size_t t = std::size(kTemplates);
    std::vector<CloneExample> out;
    out.reserve(size);
    for (bool clone : labels) {
        const std::size_t i = rng.below(t);
        const std::size_t j = clone ? i : (i + 1 + rng.below(t - 1)) % t;
        CloneExample ex;
        ex.code_a = instantiate(kTemplates[i], rng);
        ex.code_b = instantiate(kTemplates[j], rng);
        ex.clone = clone;
        out.push_back(std::move(ex));
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<CloneExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    for (const auto& ex : examples) {
        nlohmann::ordered_json j;
        j["code_a"] = ex.code_a;
        j["code_b"] = ex.code_b;
        j["label"] = ex.clone ? "clone" : "not_clone";
        out << j.dump() << '\n';
    }
}

std::vector<CloneExample> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    std::vector<CloneExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            CloneExample ex;
            ex.code_a = j.at("code_a").get<std::string>();
            ex.code_b = j.at("code_b").get<std::string>();
            const auto label = j.at("label").get<std::string>();
            if (label != "clone" && label != "not_clone") throw std::invalid_argument("bad label '" + label + "'");
            ex.clone = label == "clone";
            out.push_back(std::move(ex));
        } catch (const std::exception& e) {
            throw std::invalid_argument(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        }
    }
    return out;
}

// ---- head and pipeline ----------------------------------------------------

CloneHead CloneHead::init(std::size_t hidden, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t in = 2 * hidden;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    CloneHead h;
    h.input_mean = Matrix(1, in);
    h.input_inv_std = Matrix(1, in, 1.0);
    h.w1 = rng.uniform_matrix(in, in, -bound, bound);
    h.b1 = Matrix(1, in);
    h.w2 = Matrix(2, in);
    h.b2 = Matrix(1, 2);
    return h;
}

ClonePipeline::ClonePipeline(PipelineConfig config, Tokenizer tokenizer)
    : config_(std::move(config)), tokenizer_(std::move(tokenizer)), encoder_(config_.encoder) {
    config_.generator.check();
    PlmShapeConfig shape{config_.encoder.layers, config_.encoder.hidden, config_.bottleneck};
    shape.check();
    adapters = init_parameters(shape, config_.adapter_seed);
    head = CloneHead::init(config_.encoder.hidden, config_.head_seed);
}

TokenizedHypergraph ClonePipeline::prepare_graph(const std::string& code) const {
    TokenizedHypergraph g = generate(code, config_.language, tokenizer_, config_.generator);
    g = filter_types(g, config_.types);
    g = truncate_remap(g, config_.encoder.max_length - 1);
    return offset_tokens(g, 1, g.token_count + 1);
}

PreparedSnippet ClonePipeline::prepare(const std::string& code) const {
    const TokenizedHypergraph g = prepare_graph(code);
    PreparedSnippet s;
    s.ids.reserve(g.token_count);
    s.ids.push_back(0);
    for (std::size_t i = 1; i < g.token_count; ++i) s.ids.push_back(hashed_id(g.tokens[i], config_.encoder.vocab));
    s.index = std::make_shared<const HypergraphIndex>(HypergraphIndex::build(g));
    return s;
}

Matrix ClonePipeline::represent(const PreparedSnippet& s) const {
    const auto* a = config_.use_adapters ? &adapters : nullptr;
    const Matrix out = encoder_.forward(s.ids, a, s.index, nullptr);
    return Matrix::row_vector(out.row(0));
}

double ClonePipeline::clone_probability(const PreparedSnippet& a, const PreparedSnippet& b) const {
    return probability_from_logits(head_forward(head, represent(a), represent(b)).logits);
}

double ClonePipeline::classify(const std::string& code_a, const std::string& code_b) const {
    return clone_probability(prepare(code_a), prepare(code_b));
}

TensorMap ClonePipeline::trainable_tensors() const {
    TensorMap out;
    add_adapters(out, adapters);
    head.for_each([&](const std::string& name, const Matrix& m) { out["head." + name] = m; });
    return out;
}

void ClonePipeline::load_trainable(const TensorMap& tensors) {
    load_adapters(tensors, adapters);
    head.for_each([&](const std::string& name, Matrix& m) {
        auto it = tensors.find("head." + name);
        if (it == tensors.end()) throw std::invalid_argument(fmt::format("checkpoint lacks tensor 'head.{}'", name));
        if (!it->second.same_shape(m)) throw std::invalid_argument(fmt::format("checkpoint tensor 'head.{}' has the wrong shape", name));
        m = it->second;
    });
}

// ---- metrics --------------------------------------------------------------

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    Metrics m{tp, fp, fn, tn};
    m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

Metrics metrics_from_predictions(const std::vector<bool>& predicted, const std::vector<bool>& actual) {
    if (predicted.size() != actual.size()) throw std::invalid_argument("prediction and label counts differ");
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i]) {
            actual[i] ? ++tp : ++fp;
        } else {
            actual[i] ? ++fn : ++tn;
        }
    }
    return metrics_from_counts(tp, fp, fn, tn);
}

std::vector<PreparedExample> prepare_dataset(const ClonePipeline& pipeline, const std::vector<CloneExample>& data) {
    std::vector<PreparedExample> out(data.size());
    parallel_for(data.size(), 0, [&](std::size_t i) {
        out[i] = PreparedExample{pipeline.prepare(data[i].code_a), pipeline.prepare(data[i].code_b), data[i].clone};
    });
    return out;
}

Metrics evaluate(const ClonePipeline& pipeline, const std::vector<PreparedExample>& data, double threshold) {
    if (data.empty()) throw std::invalid_argument("evaluation set is empty");
    std::vector<double> p(data.size());
    parallel_for(data.size(), 0, [&](std::size_t i) { p[i] = pipeline.clone_probability(data[i].a, data[i].b); });
    std::vector<bool> predicted(data.size()), actual(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        predicted[i] = p[i] > threshold;
        actual[i] = data[i].clone;
    }
    return metrics_from_predictions(predicted, actual);
}

Metrics evaluate(const ClonePipeline& pipeline, const std::vector<CloneExample>& data, double threshold) {
    return evaluate(pipeline, prepare_dataset(pipeline, data), threshold);
}

void calibrate_head(ClonePipeline& pipeline, const std::vector<PreparedExample>& data) {
    if (data.empty()) throw std::invalid_argument("cannot calibrate on an empty set");
    std::vector<Matrix> z(data.size());
    parallel_for(data.size(), 0, [&](std::size_t i) {
        z[i] = concat_cols(pipeline.represent(data[i].a), pipeline.represent(data[i].b));
    });
    const std::size_t width = z.front().cols();
    const double n = static_cast<double>(data.size());
    Matrix mean(1, width), inv_std(1, width, 1.0);
    for (std::size_t j = 0; j < width; ++j) {
        double sum = 0.0;
        for (const auto& row : z) sum += row(0, j);
        const double mu = sum / n;
        double var = 0.0;
        for (const auto& row : z) var += (row(0, j) - mu) * (row(0, j) - mu);
        var /= n;
        mean(0, j) = mu;
        if (var > 1e-24) inv_std(0, j) = 1.0 / std::sqrt(var);
    }
    pipeline.head.input_mean = std::move(mean);
    pipeline.head.input_inv_std = std::move(inv_std);
}

double mean_loss(const ClonePipeline& pipeline, const std::vector<PreparedExample>& data) {
    if (data.empty()) throw std::invalid_argument("loss over an empty set");
    std::vector<double> loss(data.size());
    parallel_for(data.size(), 0, [&](std::size_t i) {
        const HeadForward f = head_forward(pipeline.head, pipeline.represent(data[i].a), pipeline.represent(data[i].b));
        const std::size_t label = data[i].clone ? 1 : 0;
        loss[i] = cross_entropy_with_logits(f.logits, std::span<const std::size_t>(&label, 1));
    });
    double sum = 0.0;
    for (double l : loss) sum += l;
    return sum / static_cast<double>(data.size());
}

// ---- training -------------------------------------------------------------

TrainConfig train_preset(std::string_view name) {
    TrainConfig c;
    c.preset = std::string(name);
    if (name == "desk") return c;
    if (name == "paper-clone") {
        c.optimizer.kind = OptimizerKind::AdamW;
        c.optimizer.learning_rate = 5e-5;
        c.batch = 4;
        c.epochs = 10;
        return c;
    }
    if (name == "paper-summarization") {
        c.optimizer.kind = OptimizerKind::Adam;
        c.optimizer.learning_rate = 1e-4;
        c.batch = 64;
        c.epochs = 20;
        return c;
    }
    throw std::invalid_argument(
        fmt::format("unknown preset '{}' (expected desk, paper-clone or paper-summarization)", name));
}

NonFiniteTrainingLoss::NonFiniteTrainingLoss(std::size_t epoch_, std::size_t batch_, double loss)
    : std::runtime_error(fmt::format("non-finite loss {} at epoch {} batch {}", loss, epoch_, batch_)),
      epoch(epoch_),
      batch(batch_) {}

std::string digest_tensors(const TensorMap& tensors) {
    std::string bytes;
    for (const auto& [name, m] : tensors) {
        bytes += name;
        bytes.push_back('\0');
        const auto v = m.values();
        bytes.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
    }
    return fnv1a_hex(bytes);
}

nlohmann::ordered_json TrainReport::to_json() const {
    auto metrics = [](const Metrics& m) {
        nlohmann::ordered_json j;
        j["precision"] = m.precision;
        j["recall"] = m.recall;
        j["f1"] = m.f1;
        j["tp"] = m.tp;
        j["fp"] = m.fp;
        j["fn"] = m.fn;
        j["tn"] = m.tn;
        return j;
    };
    nlohmann::ordered_json j;
    j["preset"] = preset;
    j["epoch_loss"] = epoch_loss;
    j["epoch_val_f1"] = epoch_val_f1;
    j["initial_loss"] = initial_loss;
    j["final_loss"] = final_loss;
    j["final_val"] = metrics(final_val);
    j["best_epoch"] = best_epoch;
    j["best_val_f1"] = best_val_f1;
    j["frozen_digest_before"] = frozen_digest_before;
    j["frozen_digest_after"] = frozen_digest_after;
    j["trainable_digest"] = trainable_digest;
    return j;
}

TrainReport train_adapters(ClonePipeline& pipeline, const std::vector<CloneExample>& train,
                           const std::vector<CloneExample>& validation, const TrainConfig& config) {
    if (train.empty()) throw std::invalid_argument("training set is empty");
    if (config.batch == 0) throw std::invalid_argument("batch size must be positive");

    TrainReport report;
    report.preset = config.preset;
    report.frozen_digest_before = pipeline.encoder().digest();

    const auto train_set = prepare_dataset(pipeline, train);
    const auto val_set = validation.empty() ? std::vector<PreparedExample>{} : prepare_dataset(pipeline, validation);
    if (config.calibrate && config.epochs > 0) calibrate_head(pipeline, train_set);
    report.initial_loss = mean_loss(pipeline, train_set);

    AdamOptimizer opt(config.optimizer);
    const bool with_adapters = pipeline.config().use_adapters;
    const std::vector<Matrix*> params = trainable_pointers(pipeline);
    Rng rng(config.shuffle_seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    report.best_checkpoint = pipeline.trainable_tensors();

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double epoch_sum = 0.0;
        std::size_t batch_id = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch, ++batch_id) {
            const std::size_t n = std::min(config.batch, order.size() - start);
            std::vector<ExampleGrads> per(n);
            parallel_for(n, config.threads,
                         [&](std::size_t i) { per[i] = example_grads(pipeline, train_set[order[start + i]]); });

            double batch_loss = 0.0;
            std::vector<Matrix> total;
            for (auto& g : per) {
                batch_loss += g.loss;
                auto flat = grads_in_order(g, with_adapters);
                if (total.empty()) {
                    total = std::move(flat);
                } else {
                    for (std::size_t k = 0; k < total.size(); ++k) total[k] += flat[k];
                }
            }
            batch_loss /= static_cast<double>(n);
            if (!std::isfinite(batch_loss)) throw NonFiniteTrainingLoss(epoch, batch_id, batch_loss);
            for (auto& t : total) t = scale(t, 1.0 / static_cast<double>(n));
            opt.step(params, total);
            epoch_sum += batch_loss * static_cast<double>(n);
        }
        report.epoch_loss.push_back(epoch_sum / static_cast<double>(order.size()));

        if (!val_set.empty()) {
            const Metrics m = evaluate(pipeline, val_set);
            report.epoch_val_f1.push_back(m.f1);
            if (report.best_epoch == 0 || m.f1 > report.best_val_f1) {
                report.best_epoch = epoch;
                report.best_val_f1 = m.f1;
                report.best_checkpoint = pipeline.trainable_tensors();
            }
        }
    }

    report.final_loss = mean_loss(pipeline, train_set);
    if (!val_set.empty()) report.final_val = evaluate(pipeline, val_set);
    report.frozen_digest_after = pipeline.encoder().digest();
    report.trainable_digest = digest_tensors(pipeline.trainable_tensors());
    return report;
}

}  // namespace hgcode
