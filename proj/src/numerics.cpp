#include "hgcode/numerics.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

namespace hgcode {

namespace {

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
    if (!ok) {
        throw ShapeError(fmt::format("{}: incompatible shapes {}x{} and {}x{}", op, a.rows(), a.cols(), b.rows(),
                                     b.cols()));
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ShapeError(fmt::format("matrix {}x{} given {} values", rows, cols, data_.size()));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::row_vector(std::span<const double> values) {
    return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require(same_shape(other), "add", *this, other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

bool all_finite(const Matrix& m) {
    return std::all_of(m.values().begin(), m.values().end(), [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "max_abs_diff", a, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    return worst;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal(double mean, double stddev) {
    // Box-Muller; u1 is kept away from 0.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
}

Matrix Rng::uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = uniform(lo, hi);
    return m;
}

Matrix Rng::normal_matrix(std::size_t rows, std::size_t cols, double stddev) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = normal(0.0, stddev);
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul", a, b);
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto o = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            auto br = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * br[j];
        }
    }
    return out;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "matmul_bt", a, b);
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ar = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            auto br = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ar[k] * br[k];
            out(i, j) = s;
        }
    }
    return out;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "matmul_at", a, b);
    Matrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        auto ar = a.row(k);
        auto br = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = ar[i];
            auto o = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aki * br[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    out += b;
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    for (double& v : out.values()) v *= s;
    return out;
}

Matrix linear(const Matrix& x, const Matrix& weight, const Matrix& bias) {
    return bias_add(matmul_bt(x, weight), bias);
}

LinearGrads linear_backward(const Matrix& x, const Matrix& weight, const Matrix& grad_out) {
    require(grad_out.cols() == weight.rows(), "linear_backward", grad_out, weight);
    return {matmul(grad_out, weight), matmul_at(grad_out, x), column_sums(grad_out)};
}

Matrix bias_add(const Matrix& x, const Matrix& bias) {
    require(bias.rows() == 1 && bias.cols() == x.cols(), "bias_add", x, bias);
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias(0, j);
    }
    return out;
}

Matrix column_sums(const Matrix& x) {
    Matrix out(1, x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = x.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) out(0, j) += r[j];
    }
    return out;
}

Matrix relu(const Matrix& x) {
    Matrix out = x;
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    return out;
}

Matrix relu_backward(const Matrix& pre_activation, const Matrix& grad_out) {
    require(pre_activation.same_shape(grad_out), "relu_backward", pre_activation, grad_out);
    Matrix out(grad_out.rows(), grad_out.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] = pre_activation.values()[i] > 0.0 ? grad_out.values()[i] : 0.0;
    }
    return out;
}

Matrix softmax_rows(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto in = x.row(i);
        auto o = out.row(i);
        const double mx = *std::max_element(in.begin(), in.end());
        double z = 0.0;
        for (std::size_t j = 0; j < in.size(); ++j) z += (o[j] = std::exp(in[j] - mx));
        for (double& v : o) v /= z;
    }
    return out;
}

Matrix softmax_rows_backward(const Matrix& y, const Matrix& grad_out) {
    require(y.same_shape(grad_out), "softmax_rows_backward", y, grad_out);
    Matrix out(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i) {
        auto yr = y.row(i);
        auto gr = grad_out.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < yr.size(); ++j) dot += yr[j] * gr[j];
        auto o = out.row(i);
        for (std::size_t j = 0; j < yr.size(); ++j) o[j] = yr[j] * (gr[j] - dot);
    }
    return out;
}

Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta, double eps, LayerNormCache* cache) {
    require(gamma.rows() == 1 && gamma.cols() == x.cols(), "layer_norm", x, gamma);
    require(beta.same_shape(gamma), "layer_norm", gamma, beta);
    const std::size_t c = x.cols();
    Matrix normalized(x.rows(), c);
    std::vector<double> rstd(x.rows());
    Matrix out(x.rows(), c);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = x.row(i);
        double mean = 0.0;
        for (double v : r) mean += v;
        mean /= static_cast<double>(c);
        double var = 0.0;
        for (double v : r) var += (v - mean) * (v - mean);
        var /= static_cast<double>(c);
        rstd[i] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < c; ++j) {
            normalized(i, j) = (r[j] - mean) * rstd[i];
            out(i, j) = normalized(i, j) * gamma(0, j) + beta(0, j);
        }
    }
    if (cache) *cache = {std::move(normalized), std::move(rstd)};
    return out;
}

LayerNormGrads layer_norm_backward(const LayerNormCache& cache, const Matrix& gamma, const Matrix& grad_out) {
    const Matrix& xhat = cache.normalized;
    require(xhat.same_shape(grad_out), "layer_norm_backward", xhat, grad_out);
    const std::size_t c = xhat.cols();
    LayerNormGrads g{Matrix(xhat.rows(), c), Matrix(1, c), Matrix(1, c)};
    std::vector<double> gxhat(c);
    for (std::size_t i = 0; i < xhat.rows(); ++i) {
        double mean_g = 0.0;
        double mean_gx = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            gxhat[j] = grad_out(i, j) * gamma(0, j);
            mean_g += gxhat[j];
            mean_gx += gxhat[j] * xhat(i, j);
            g.gamma(0, j) += grad_out(i, j) * xhat(i, j);
            g.beta(0, j) += grad_out(i, j);
        }
        mean_g /= static_cast<double>(c);
        mean_gx /= static_cast<double>(c);
        for (std::size_t j = 0; j < c; ++j) {
            g.input(i, j) = cache.rstd[i] * (gxhat[j] - mean_g - xhat(i, j) * mean_gx);
        }
    }
    return g;
}

double cross_entropy_with_logits(const Matrix& logits, std::span<const std::size_t> labels, Matrix* grad_logits) {
    if (labels.size() != logits.rows()) {
        throw ShapeError(fmt::format("cross_entropy: {} labels for {} rows", labels.size(), logits.rows()));
    }
    if (logits.rows() == 0) throw ShapeError("cross_entropy: no rows");
    const Matrix probs = softmax_rows(logits);
    const double n = static_cast<double>(logits.rows());
    double loss = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        if (labels[i] >= logits.cols()) throw ShapeError(fmt::format("cross_entropy: label {} out of range", labels[i]));
        auto r = logits.row(i);
        const double mx = *std::max_element(r.begin(), r.end());
        double z = 0.0;
        for (double v : r) z += std::exp(v - mx);
        loss += mx + std::log(z) - r[labels[i]];
    }
    if (grad_logits) {
        *grad_logits = probs;
        for (std::size_t i = 0; i < logits.rows(); ++i) (*grad_logits)(i, labels[i]) -= 1.0;
        for (double& v : grad_logits->values()) v /= n;
    }
    return loss / n;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "concat_cols", a, b);
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto o = out.row(i);
        std::copy(a.row(i).begin(), a.row(i).end(), o.begin());
        std::copy(b.row(i).begin(), b.row(i).end(), o.begin() + static_cast<std::ptrdiff_t>(a.cols()));
    }
    return out;
}

std::pair<Matrix, Matrix> split_cols(const Matrix& m, std::size_t left_cols) {
    if (left_cols > m.cols()) throw ShapeError("split_cols: split point beyond matrix width");
    Matrix left(m.rows(), left_cols);
    Matrix right(m.rows(), m.cols() - left_cols);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        std::copy(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(left_cols), left.row(i).begin());
        std::copy(r.begin() + static_cast<std::ptrdiff_t>(left_cols), r.end(), right.row(i).begin());
    }
    return {std::move(left), std::move(right)};
}

Matrix gather_rows(const Matrix& m, std::span<const std::uint32_t> index) {
    Matrix out(index.size(), m.cols());
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] >= m.rows()) throw ShapeError(fmt::format("gather_rows: row {} of {}", index[k], m.rows()));
        std::copy(m.row(index[k]).begin(), m.row(index[k]).end(), out.row(k).begin());
    }
    return out;
}

Matrix scatter_add_rows(const Matrix& grad, std::span<const std::uint32_t> index, std::size_t rows) {
    if (grad.rows() != index.size()) throw ShapeError("scatter_add_rows: index length differs from row count");
    Matrix out(rows, grad.cols());
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] >= rows) throw ShapeError(fmt::format("scatter_add_rows: row {} of {}", index[k], rows));
        auto o = out.row(index[k]);
        auto g = grad.row(k);
        for (std::size_t j = 0; j < g.size(); ++j) o[j] += g[j];
    }
    return out;
}

SegmentIndex::SegmentIndex(std::vector<std::uint32_t> group_of, std::size_t group_count)
    : group_of_(std::move(group_of)), group_count_(group_count), start_(group_count + 1, 0) {
    for (auto g : group_of_) {
        if (g >= group_count_) throw ShapeError(fmt::format("segment index: group {} of {}", g, group_count_));
        ++start_[g + 1];
    }
    for (std::size_t g = 0; g < group_count_; ++g) start_[g + 1] += start_[g];
    order_.resize(group_of_.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < group_of_.size(); ++k) {
        order_[fill[group_of_[k]]++] = static_cast<std::uint32_t>(k);
    }
}

bool SegmentIndex::all_groups_nonempty() const {
    for (std::size_t g = 0; g < group_count_; ++g) {
        if (start_[g + 1] == start_[g]) return false;
    }
    return true;
}

std::vector<double> segment_softmax(std::span<const double> scores, const SegmentIndex& groups) {
    if (scores.size() != groups.element_count()) throw ShapeError("segment_softmax: score count differs from index");
    std::vector<double> out(scores.size());
    for (std::size_t g = 0; g < groups.group_count(); ++g) {
        auto members = groups.members(g);
        if (members.empty()) continue;
        double mx = -std::numeric_limits<double>::infinity();
        for (auto k : members) mx = std::max(mx, scores[k]);
        double z = 0.0;
        for (auto k : members) z += (out[k] = std::exp(scores[k] - mx));
        for (auto k : members) out[k] /= z;
    }
    return out;
}

std::vector<double> segment_softmax_backward(std::span<const double> weights, std::span<const double> grad_weights,
                                             const SegmentIndex& groups) {
    if (weights.size() != groups.element_count() || grad_weights.size() != weights.size()) {
        throw ShapeError("segment_softmax_backward: length mismatch");
    }
    std::vector<double> out(weights.size());
    for (std::size_t g = 0; g < groups.group_count(); ++g) {
        auto members = groups.members(g);
        double dot = 0.0;
        for (auto k : members) dot += weights[k] * grad_weights[k];
        for (auto k : members) out[k] = weights[k] * (grad_weights[k] - dot);
    }
    return out;
}

Matrix segment_weighted_sum(const Matrix& values, std::span<const double> weights, const SegmentIndex& groups) {
    if (values.rows() != groups.element_count() || weights.size() != values.rows()) {
        throw ShapeError(fmt::format("segment_weighted_sum: {} rows, {} weights, {} indexed elements", values.rows(),
                                     weights.size(), groups.element_count()));
    }
    Matrix out(groups.group_count(), values.cols());
    for (std::size_t g = 0; g < groups.group_count(); ++g) {
        auto o = out.row(g);
        for (auto k : groups.members(g)) {
            auto v = values.row(k);
            for (std::size_t j = 0; j < v.size(); ++j) o[j] += weights[k] * v[j];
        }
    }
    return out;
}

SegmentSumGrads segment_weighted_sum_backward(const Matrix& values, std::span<const double> weights,
                                              const SegmentIndex& groups, const Matrix& grad_out) {
    if (grad_out.rows() != groups.group_count() || grad_out.cols() != values.cols()) {
        throw ShapeError("segment_weighted_sum_backward: gradient shape mismatch");
    }
    SegmentSumGrads g{Matrix(values.rows(), values.cols()), std::vector<double>(values.rows(), 0.0)};
    for (std::size_t k = 0; k < values.rows(); ++k) {
        auto go = grad_out.row(groups.group_of(k));
        auto v = values.row(k);
        auto gv = g.values.row(k);
        double dot = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            gv[j] = weights[k] * go[j];
            dot += v[j] * go[j];
        }
        g.weights[k] = dot;
    }
    return g;
}

GradCheckReport grad_check(const std::function<double()>& loss, std::span<Matrix* const> params,
                           std::span<const Matrix> analytic, const GradCheckOptions& options) {
    if (params.size() != analytic.size()) throw ShapeError("grad_check: parameter and gradient counts differ");
    GradCheckReport report;

    auto evaluate = [&](std::size_t p, std::size_t i) {
        const double v = loss();
        if (!std::isfinite(v)) {
            throw NonFiniteLoss(fmt::format("non-finite loss while perturbing parameter {} coordinate {}", p, i));
        }
        return v;
    };

    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& param = *params[p];
        if (!param.same_shape(analytic[p])) {
            throw ShapeError(fmt::format("grad_check: gradient {} does not match its parameter's shape", p));
        }
        for (std::size_t i = 0; i < param.size(); ++i) {
            if (options.skip && options.skip(p, i)) {
                report.skipped.push_back({p, i});
                continue;
            }
            double& x = param.values()[i];
            const double saved = x;
            const double h = options.eps;
            auto at = [&](double offset) {
                x = saved + offset;
                return evaluate(p, i);
            };
            const double plus1 = at(h), minus1 = at(-h), plus2 = at(2 * h), minus2 = at(-2 * h);
            const double centre = at(0.0);
            x = saved;

            const double d1 = (plus1 - minus1) / (2 * h);
            const double d2 = (plus2 - minus2) / (4 * h);
            // second differences at h and 2h agree for smooth losses; a slope jump makes them differ by half the jump
            const double c1 = (plus1 - 2 * centre + minus1) / h;
            const double c2 = (plus2 - 2 * centre + minus2) / (4 * h);
            const double scale = options.kink_tol * std::max(1.0, std::abs(d1) + std::abs(d2));
            if (options.skip_kinks && (std::abs(d1 - d2) > scale || std::abs(c1 - c2) > scale)) {
                report.skipped.push_back({p, i});
                continue;
            }
            const double numeric = (4 * d1 - d2) / 3;
            const double a = analytic[p].values()[i];
            const double rel = std::abs(a - numeric) / std::max(options.rel_floor, std::abs(a) + std::abs(numeric));
            report.max_abs_error = std::max(report.max_abs_error, std::abs(a - numeric));
            ++report.checked;
            if (report.checked == 1 || rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst = {p, i};
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
        }
    }
    report.passed = report.max_rel_error <= options.tol;
    return report;
}

}  // namespace hgcode
