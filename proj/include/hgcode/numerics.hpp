#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hgcode {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dense row-major f64 matrix. Vectors are 1-row matrices.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix row_vector(std::span<const double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    Matrix& operator+=(const Matrix& other);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

bool all_finite(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Seeded generator with explicit bit-to-double mapping so sequences do not
// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform();  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal(double mean = 0.0, double stddev = 1.0);
    std::size_t below(std::size_t n);  // uniform integer in [0, n)

    Matrix uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi);
    Matrix normal_matrix(std::size_t rows, std::size_t cols, double stddev);

private:
    std::mt19937_64 engine_;
};

// ---- dense kernels -------------------------------------------------------

Matrix matmul(const Matrix& a, const Matrix& b);     // a · b
Matrix matmul_bt(const Matrix& a, const Matrix& b);  // a · bᵀ
Matrix matmul_at(const Matrix& a, const Matrix& b);  // aᵀ · b
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

// y = x·Wᵀ + b, with x: N×in, W: out×in, b: 1×out.
Matrix linear(const Matrix& x, const Matrix& weight, const Matrix& bias);
struct LinearGrads {
    Matrix input;
    Matrix weight;
    Matrix bias;
};
LinearGrads linear_backward(const Matrix& x, const Matrix& weight, const Matrix& grad_out);

Matrix bias_add(const Matrix& x, const Matrix& bias);
Matrix column_sums(const Matrix& x);  // bias-add backward

Matrix relu(const Matrix& x);
// Subgradient 0 at exactly 0.
Matrix relu_backward(const Matrix& pre_activation, const Matrix& grad_out);

Matrix softmax_rows(const Matrix& x);
Matrix softmax_rows_backward(const Matrix& y, const Matrix& grad_out);

struct LayerNormCache {
    Matrix normalized;          // x̂
    std::vector<double> rstd;  // 1/sqrt(var + eps) per row
};
Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta, double eps,
                  LayerNormCache* cache = nullptr);
struct LayerNormGrads {
    Matrix input;
    Matrix gamma;
    Matrix beta;
};
LayerNormGrads layer_norm_backward(const LayerNormCache& cache, const Matrix& gamma, const Matrix& grad_out);

// Mean cross-entropy over rows of `logits` against class indices.
double cross_entropy_with_logits(const Matrix& logits, std::span<const std::size_t> labels,
                                 Matrix* grad_logits = nullptr);

Matrix concat_cols(const Matrix& a, const Matrix& b);
std::pair<Matrix, Matrix> split_cols(const Matrix& m, std::size_t left_cols);  // concat backward

Matrix gather_rows(const Matrix& m, std::span<const std::uint32_t> index);
// gather_rows backward: out[index[k]] += grad[k].
Matrix scatter_add_rows(const Matrix& grad, std::span<const std::uint32_t> index, std::size_t rows);

// ---- segment kernels -----------------------------------------------------

// Assignment of elements to groups (element k belongs to group_of[k]).
// Groups with no element are legal here; callers decide what they mean.
class SegmentIndex {
public:
    SegmentIndex() = default;
    SegmentIndex(std::vector<std::uint32_t> group_of, std::size_t group_count);

    std::size_t element_count() const { return group_of_.size(); }
    std::size_t group_count() const { return group_count_; }
    std::uint32_t group_of(std::size_t element) const { return group_of_[element]; }
    std::span<const std::uint32_t> groups() const { return group_of_; }
    // Elements of group g, ascending.
    std::span<const std::uint32_t> members(std::size_t g) const {
        return {order_.data() + start_[g], start_[g + 1] - start_[g]};
    }
    bool all_groups_nonempty() const;

private:
    std::vector<std::uint32_t> group_of_;
    std::size_t group_count_ = 0;
    std::vector<std::uint32_t> order_;
    std::vector<std::size_t> start_;
};

// Max-subtracted softmax within each group.
std::vector<double> segment_softmax(std::span<const double> scores, const SegmentIndex& groups);
std::vector<double> segment_softmax_backward(std::span<const double> weights, std::span<const double> grad_weights,
                                             const SegmentIndex& groups);

// out[g] = Σ_{k in g} weights[k] · values[k]; rows of empty groups are zero.
Matrix segment_weighted_sum(const Matrix& values, std::span<const double> weights, const SegmentIndex& groups);
struct SegmentSumGrads {
    Matrix values;
    std::vector<double> weights;
};
SegmentSumGrads segment_weighted_sum_backward(const Matrix& values, std::span<const double> weights,
                                              const SegmentIndex& groups, const Matrix& grad_out);

// ---- finite-difference gradient check ------------------------------------

// Derivatives are estimated with the fourth-order central stencil
// (Richardson extrapolation of the h and 2h central differences), which keeps
// roundoff small enough to resolve gradients near 1e-6.
struct GradCheckOptions {
    double eps = 1e-4;
    double tol = 1e-5;
    // Skip coordinates where the h and 2h central differences disagree, i.e.
    // the loss has a kink (ReLU at 0) within 2·eps of the evaluation point.
    bool skip_kinks = true;
    double kink_tol = 1e-6;
    // Relative error is |a - n| / max(|a| + |n|, rel_floor). Below the floor
    // the difference quotient's roundoff (~1e-11 for O(1) losses) dominates,
    // so tiny gradients are held to tol·rel_floor in absolute terms instead.
    double rel_floor = 1e-4;
    std::function<bool(std::size_t param, std::size_t index)> skip;
};

struct Coordinate {
    std::size_t param = 0;
    std::size_t index = 0;
    friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    Coordinate worst;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    double max_abs_error = 0.0;
    std::size_t checked = 0;
    std::vector<Coordinate> skipped;
    bool passed = true;
};

struct NonFiniteLoss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Central differences of `loss` around the current values of `params`
// compared with `analytic` (same shapes). Parameters are restored on return.
GradCheckReport grad_check(const std::function<double()>& loss, std::span<Matrix* const> params,
                           std::span<const Matrix> analytic, const GradCheckOptions& options = {});

}  // namespace hgcode
