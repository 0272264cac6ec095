#include "hgcode/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace hgcode {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "adamw"; }

OptimizerKind optimizer_from_string(std::string_view name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "adamw") return OptimizerKind::AdamW;
    throw std::invalid_argument(fmt::format("unknown optimizer '{}' (expected adam or adamw)", name));
}

void AdamOptimizer::step(std::span<Matrix* const> params, std::span<const Matrix> grads) {
    if (params.size() != grads.size()) throw ShapeError("optimizer: parameter and gradient counts differ");
    if (m_.empty()) {
        for (const Matrix* p : params) {
            m_.emplace_back(p->rows(), p->cols());
            v_.emplace_back(p->rows(), p->cols());
        }
    }
    if (m_.size() != params.size()) throw ShapeError("optimizer: parameter set changed between steps");

    ++step_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    const double lr = config_.learning_rate;
    const bool decoupled = config_.kind == OptimizerKind::AdamW && config_.weight_decay != 0.0;

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i]->values();
        auto g = grads[i].values();
        auto m = m_[i].values();
        auto v = v_[i].values();
        if (g.size() != p.size()) throw ShapeError("optimizer: gradient shape mismatch");
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
            v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
            if (decoupled) p[j] -= lr * config_.weight_decay * p[j];
            p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config_.epsilon);
        }
    }
}

}  // namespace hgcode
