#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "hgcode/numerics.hpp"

namespace hgcode {

enum class OptimizerKind { Adam, AdamW };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::AdamW;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;  // AdamW only, decoupled
};

// Adam with bias correction; AdamW additionally shrinks each parameter by
// lr·weight_decay before the adaptive step.
class AdamOptimizer {
public:
    explicit AdamOptimizer(OptimizerConfig config) : config_(config) {}

    void step(std::span<Matrix* const> params, std::span<const Matrix> grads);
    std::size_t steps_taken() const { return step_; }

private:
    OptimizerConfig config_;
    std::size_t step_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

}  // namespace hgcode
