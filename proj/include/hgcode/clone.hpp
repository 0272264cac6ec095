#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hgcode/adapter.hpp"
#include "hgcode/checkpoint.hpp"
#include "hgcode/encoder.hpp"
#include "hgcode/generator.hpp"
#include "hgcode/optimizer.hpp"
#include "hgcode/tokenizer.hpp"

namespace hgcode {

struct CloneExample {
    std::string code_a;
    std::string code_b;
    bool clone = false;

    friend bool operator==(const CloneExample&, const CloneExample&) = default;
};

// JSON lines: {"code_a": ..., "code_b": ..., "label": "clone" | "not_clone"}
void write_jsonl(const std::filesystem::path& path, const std::vector<CloneExample>& examples);
std::vector<CloneExample> read_jsonl(const std::filesystem::path& path);

// Java method pairs. Clones share a template and differ by consistent
// identifier renaming plus whitespace and line reflow; non-clones use two
// different templates. Half the pairs (rounded down) are clones.
std::vector<CloneExample> make_synthetic_clone_set(std::uint64_t seed, std::size_t size);
std::size_t synthetic_template_count();

// [a, b] -> standardize -> 2C (relu) -> 2 logits; class 1 is "clone". The
// last layer starts at zero, so a fresh head outputs p = 0.5. The
// standardization (input_mean, input_inv_std) is fixed, not trained; see
// calibrate_head.
struct CloneHead {
    Matrix input_mean, input_inv_std;  // 1 × 2C
    Matrix w1, b1, w2, b2;

    static CloneHead init(std::size_t hidden, std::uint64_t seed);

    template <class F>
    void for_each_trainable(F&& f) {
        f(std::string("W1"), w1);
        f(std::string("b1"), b1);
        f(std::string("W2"), w2);
        f(std::string("b2"), b2);
    }
    template <class F>
    void for_each(F&& f) {
        f(std::string("input_mean"), input_mean);
        f(std::string("input_inv_std"), input_inv_std);
        for_each_trainable(f);
    }
    template <class F>
    void for_each(F&& f) const {
        const_cast<CloneHead*>(this)->for_each([&](const std::string& n, const Matrix& m) { f(n, m); });
    }
    friend bool operator==(const CloneHead&, const CloneHead&) = default;
};

struct PipelineConfig {
    FrozenEncoderConfig encoder{.layers = 3};
    std::size_t bottleneck = 8;
    Language language = Language::Java;
    TypeSet types = all_types();
    GeneratorConfig generator{};
    bool use_adapters = true;
    std::uint64_t adapter_seed = 11;
    std::uint64_t head_seed = 13;
};

// A snippet ready for the encoder: position 0 is the start token and sits
// outside every hyperedge.
struct PreparedSnippet {
    std::vector<std::uint32_t> ids;
    std::shared_ptr<const HypergraphIndex> index;
};

class ClonePipeline {
public:
    ClonePipeline(PipelineConfig config, Tokenizer tokenizer);

    const PipelineConfig& config() const { return config_; }
    const FrozenEncoder& encoder() const { return encoder_; }

    std::vector<AdapterParameters> adapters;
    CloneHead head;

    // generate -> filter_types -> truncate to max_length - 1 -> shift by one.
    // Extraction errors propagate.
    TokenizedHypergraph prepare_graph(const std::string& code) const;
    PreparedSnippet prepare(const std::string& code) const;

    // Position-0 state of the final layer (1 × C).
    Matrix represent(const PreparedSnippet& s) const;
    double clone_probability(const PreparedSnippet& a, const PreparedSnippet& b) const;
    double classify(const std::string& code_a, const std::string& code_b) const;

    // Every trainable tensor: layer{l}.* then head.*.
    TensorMap trainable_tensors() const;
    void load_trainable(const TensorMap& tensors);

private:
    PipelineConfig config_;
    Tokenizer tokenizer_;
    FrozenEncoder encoder_;
};

struct Metrics {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Clone is the positive class; a pair is predicted clone when p > threshold.
Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
Metrics metrics_from_predictions(const std::vector<bool>& predicted, const std::vector<bool>& actual);

struct PreparedExample {
    PreparedSnippet a;
    PreparedSnippet b;
    bool clone = false;
};

// Sets the head's input standardization to the per-feature mean and inverse
// standard deviation of [a, b] over `data` under the current parameters.
// Features with no spread keep scale 1.
void calibrate_head(ClonePipeline& pipeline, const std::vector<PreparedExample>& data);

std::vector<PreparedExample> prepare_dataset(const ClonePipeline& pipeline, const std::vector<CloneExample>& data);
Metrics evaluate(const ClonePipeline& pipeline, const std::vector<PreparedExample>& data, double threshold = 0.5);
Metrics evaluate(const ClonePipeline& pipeline, const std::vector<CloneExample>& data, double threshold = 0.5);
// Mean cross-entropy over the set without touching any parameter.
double mean_loss(const ClonePipeline& pipeline, const std::vector<PreparedExample>& data);

struct TrainConfig {
    std::string preset = "desk";
    OptimizerConfig optimizer{};
    std::size_t epochs = 20;
    std::size_t batch = 8;
    std::uint64_t shuffle_seed = 5;
    unsigned threads = 0;  // 0: hardware concurrency
    bool calibrate = true;  // calibrate_head on the training set before the first step
};

// "desk" (adamw 1e-3, batch 8, 20 epochs), "paper-clone" (adamw 5e-5,
// batch 4, 10 epochs), "paper-summarization" (adam 1e-4, batch 64, 20 epochs).
TrainConfig train_preset(std::string_view name);

struct NonFiniteTrainingLoss : std::runtime_error {
    NonFiniteTrainingLoss(std::size_t epoch, std::size_t batch, double loss);
    std::size_t epoch;
    std::size_t batch;
};

struct TrainReport {
    std::string preset;
    std::vector<double> epoch_loss;  // mean training loss seen during each epoch
    std::vector<double> epoch_val_f1;
    double initial_loss = 0.0;       // full train set, before the first step
    double final_loss = 0.0;         // full train set, after the last step
    Metrics final_val;               // after the last epoch
    std::size_t best_epoch = 0;      // 1-based; 0 when no epoch ran
    double best_val_f1 = 0.0;
    TensorMap best_checkpoint;       // trainable tensors at best_epoch
    std::string frozen_digest_before;
    std::string frozen_digest_after;
    std::string trainable_digest;

    nlohmann::ordered_json to_json() const;
};

// Updates only the adapters and the head. Throws NonFiniteTrainingLoss on a
// NaN or infinite batch loss.
TrainReport train_adapters(ClonePipeline& pipeline, const std::vector<CloneExample>& train,
                           const std::vector<CloneExample>& validation, const TrainConfig& config);

std::string digest_tensors(const TensorMap& tensors);

}  // namespace hgcode
