#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "protofair/matrix.hpp"

namespace protofair::diff {

// Row norms below this are treated as degenerate in l2_normalize_rows.
constexpr double kNormEps = 1e-12;

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// A node in a reverse-mode computation graph. Leaves hold inputs or
// parameters; interior nodes are created by the ops below and remember how
// to push their gradient into their parents. Creation order doubles as a
// topological order, so backward() is a reverse sweep by sequence number.
//
// Graphs are single-threaded; independent graphs may live on distinct
// threads (the sequence counter is atomic, nothing else is shared).
class Tensor {
public:
    Matrix value;
    Matrix grad;  // empty until backward() reaches this node
    bool requires_grad = false;

    int rows() const { return value.rows; }
    int cols() const { return value.cols; }
    bool has_grad() const { return grad.rows > 0; }
    double scalar() const;  // value of a 1x1 tensor

    void accumulate_grad(const Matrix& g);

private:
    std::vector<TensorPtr> parents_;
    std::function<void(Tensor&)> backward_fn_;  // reads this->grad, accumulates into parents_
    uint64_t seq_ = 0;

    friend TensorPtr make_node(Matrix v, std::vector<TensorPtr> parents,
                               std::function<void(Tensor&)> backward_fn);
    friend void backward(const TensorPtr& loss);
};

// Leaves
TensorPtr make_tensor(Matrix v, bool requires_grad = false);
TensorPtr constant(Matrix v);
TensorPtr scalar_constant(double v);

// ---------------------------------------------------------------------------
// Forward ops (each defines an analytic backward)
// ---------------------------------------------------------------------------

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);     // a[n×k] · b[k×m]
TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b);  // a[n×k] · b[m×k]ᵀ
TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr add_row_bias(const TensorPtr& x, const TensorPtr& bias);  // bias is 1×d, broadcast over rows
TensorPtr relu(const TensorPtr& x);
TensorPtr scalar_mul(const TensorPtr& x, double c);
TensorPtr scalar_add(const TensorPtr& x, double c);
TensorPtr gather_rows(const TensorPtr& x, std::vector<int> indices);
TensorPtr concat_rows(const TensorPtr& a, const TensorPtr& b);
TensorPtr mean_all(const TensorPtr& x);  // 1x1
TensorPtr sum_all(const TensorPtr& x);   // 1x1

// Rows rescaled to unit Euclidean norm. Rows with norm < kNormEps raise
// ContractError naming the row.
TensorPtr l2_normalize_rows(const TensorPtr& x);

// Forward identity, gradient barrier: the result is a fresh leaf with no
// graph linkage and requires_grad = false.
TensorPtr detach(const TensorPtr& x);

// out[r] = log Σ_{c: mask[r*cols+c]} exp(x[r][c]), computed max-shifted.
// mask is row-major with x's shape; every row needs at least one true entry.
TensorPtr masked_row_logsumexp(const TensorPtr& x, std::vector<uint8_t> mask);

// Σ_ij w[i][j]·x[i][j] with constant weights; the workhorse for assembling
// contrastive numerators.
TensorPtr weighted_sum(const TensorPtr& x, Matrix weights);

// ---------------------------------------------------------------------------

// max(v) + log Σ exp(v - max(v)); overflow-free for |v_i| up to ~1e4.
double log_sum_exp(std::span<const double> v);

// Accumulates gradients into every requires_grad ancestor of `loss`
// (which must be 1x1). Values entered through detach() receive nothing.
void backward(const TensorPtr& loss);

}  // namespace protofair::diff
