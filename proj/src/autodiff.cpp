#include "protofair/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>
#include <utility>

namespace protofair::diff {

namespace {

std::atomic<uint64_t> g_seq{1};

void check_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (!a->value.same_shape(b->value))
        throw ContractError(std::string(op) + ": shape mismatch (" + std::to_string(a->rows()) + "x" +
                            std::to_string(a->cols()) + " vs " + std::to_string(b->rows()) + "x" +
                            std::to_string(b->cols()) + ")");
}

}  // namespace

double Tensor::scalar() const {
    if (value.rows != 1 || value.cols != 1)
        throw ContractError("Tensor::scalar: tensor is " + std::to_string(value.rows) + "x" +
                            std::to_string(value.cols) + ", expected 1x1");
    return value.data[0];
}

void Tensor::accumulate_grad(const Matrix& g) {
    if (!g.same_shape(value)) throw ContractError("accumulate_grad: gradient shape mismatch");
    if (!has_grad()) grad = Matrix(value.rows, value.cols, 0.0);
    for (size_t i = 0; i < grad.data.size(); ++i) grad.data[i] += g.data[i];
}

TensorPtr make_node(Matrix v, std::vector<TensorPtr> parents, std::function<void(Tensor&)> backward_fn) {
    auto t = std::make_shared<Tensor>();
    t->value = std::move(v);
    t->seq_ = g_seq.fetch_add(1, std::memory_order_relaxed);
    for (const auto& p : parents)
        if (p->requires_grad) t->requires_grad = true;
    if (t->requires_grad) {
        t->parents_ = std::move(parents);
        t->backward_fn_ = std::move(backward_fn);
    }
    return t;
}

TensorPtr make_tensor(Matrix v, bool requires_grad) {
    auto t = std::make_shared<Tensor>();
    t->value = std::move(v);
    t->requires_grad = requires_grad;
    t->seq_ = g_seq.fetch_add(1, std::memory_order_relaxed);
    return t;
}

TensorPtr constant(Matrix v) { return make_tensor(std::move(v), false); }

TensorPtr scalar_constant(double v) { return constant(Matrix(1, 1, v)); }

// ---------------------------------------------------------------------------

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->cols() != b->rows())
        throw ContractError("matmul: inner dimensions differ (" + std::to_string(a->cols()) + " vs " +
                            std::to_string(b->rows()) + ")");
    const int n = a->rows(), k = a->cols(), m = b->cols();
    Matrix out(n, m, 0.0);
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < k; ++p) {
            const double av = a->value.at(i, p);
            for (int j = 0; j < m; ++j) out.at(i, j) += av * b->value.at(p, j);
        }
    auto ta = a, tb = b;
    return make_node(std::move(out), {a, b}, [ta, tb, n, k, m](Tensor& self) {
        if (ta->requires_grad) {
            Matrix da(n, k, 0.0);  // G · Bᵀ
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    const double g = self.grad.at(i, j);
                    for (int p = 0; p < k; ++p) da.at(i, p) += g * tb->value.at(p, j);
                }
            ta->accumulate_grad(da);
        }
        if (tb->requires_grad) {
            Matrix db(k, m, 0.0);  // Aᵀ · G
            for (int i = 0; i < n; ++i)
                for (int p = 0; p < k; ++p) {
                    const double av = ta->value.at(i, p);
                    for (int j = 0; j < m; ++j) db.at(p, j) += av * self.grad.at(i, j);
                }
            tb->accumulate_grad(db);
        }
    });
}

TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b) {
    if (a->cols() != b->cols())
        throw ContractError("matmul_nt: inner dimensions differ (" + std::to_string(a->cols()) + " vs " +
                            std::to_string(b->cols()) + ")");
    const int n = a->rows(), k = a->cols(), m = b->rows();
    Matrix out(n, m, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += a->value.at(i, p) * b->value.at(j, p);
            out.at(i, j) = s;
        }
    auto ta = a, tb = b;
    return make_node(std::move(out), {a, b}, [ta, tb, n, k, m](Tensor& self) {
        if (ta->requires_grad) {
            Matrix da(n, k, 0.0);  // G · B
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    const double g = self.grad.at(i, j);
                    for (int p = 0; p < k; ++p) da.at(i, p) += g * tb->value.at(j, p);
                }
            ta->accumulate_grad(da);
        }
        if (tb->requires_grad) {
            Matrix db(m, k, 0.0);  // Gᵀ · A
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    const double g = self.grad.at(i, j);
                    for (int p = 0; p < k; ++p) db.at(j, p) += g * ta->value.at(i, p);
                }
            tb->accumulate_grad(db);
        }
    });
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "add");
    Matrix out = a->value;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b->value.data[i];
    auto ta = a, tb = b;
    return make_node(std::move(out), {a, b}, [ta, tb](Tensor& self) {
        if (ta->requires_grad) ta->accumulate_grad(self.grad);
        if (tb->requires_grad) tb->accumulate_grad(self.grad);
    });
}

TensorPtr add_row_bias(const TensorPtr& x, const TensorPtr& bias) {
    if (bias->rows() != 1 || bias->cols() != x->cols())
        throw ContractError("add_row_bias: bias must be 1x" + std::to_string(x->cols()));
    Matrix out = x->value;
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c) out.at(r, c) += bias->value.at(0, c);
    auto tx = x, tb = bias;
    return make_node(std::move(out), {x, bias}, [tx, tb](Tensor& self) {
        if (tx->requires_grad) tx->accumulate_grad(self.grad);
        if (tb->requires_grad) {
            Matrix db(1, self.grad.cols, 0.0);
            for (int r = 0; r < self.grad.rows; ++r)
                for (int c = 0; c < self.grad.cols; ++c) db.at(0, c) += self.grad.at(r, c);
            tb->accumulate_grad(db);
        }
    });
}

TensorPtr relu(const TensorPtr& x) {
    Matrix out = x->value;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    auto tx = x;
    return make_node(std::move(out), {x}, [tx](Tensor& self) {
        if (!tx->requires_grad) return;
        Matrix dx = self.grad;
        // subgradient 0 at exactly 0
        for (size_t i = 0; i < dx.data.size(); ++i)
            if (tx->value.data[i] <= 0.0) dx.data[i] = 0.0;
        tx->accumulate_grad(dx);
    });
}

TensorPtr scalar_mul(const TensorPtr& x, double c) {
    Matrix out = x->value;
    for (double& v : out.data) v *= c;
    auto tx = x;
    return make_node(std::move(out), {x}, [tx, c](Tensor& self) {
        if (!tx->requires_grad) return;
        Matrix dx = self.grad;
        for (double& v : dx.data) v *= c;
        tx->accumulate_grad(dx);
    });
}

TensorPtr scalar_add(const TensorPtr& x, double c) {
    Matrix out = x->value;
    for (double& v : out.data) v += c;
    auto tx = x;
    return make_node(std::move(out), {x}, [tx](Tensor& self) {
        if (tx->requires_grad) tx->accumulate_grad(self.grad);
    });
}

TensorPtr gather_rows(const TensorPtr& x, std::vector<int> indices) {
    for (int idx : indices)
        if (idx < 0 || idx >= x->rows())
            throw ContractError("gather_rows: index " + std::to_string(idx) + " out of range [0," +
                                std::to_string(x->rows()) + ")");
    Matrix out(static_cast<int>(indices.size()), x->cols());
    for (size_t r = 0; r < indices.size(); ++r)
        std::copy_n(x->value.row(indices[r]).data(), x->cols(), out.row(static_cast<int>(r)).data());
    auto tx = x;
    return make_node(std::move(out), {x}, [tx, indices = std::move(indices)](Tensor& self) {
        if (!tx->requires_grad) return;
        Matrix dx(tx->rows(), tx->cols(), 0.0);  // repeated indices accumulate
        for (size_t r = 0; r < indices.size(); ++r)
            for (int c = 0; c < dx.cols; ++c) dx.at(indices[r], c) += self.grad.at(static_cast<int>(r), c);
        tx->accumulate_grad(dx);
    });
}

TensorPtr concat_rows(const TensorPtr& a, const TensorPtr& b) {
    if (a->cols() != b->cols())
        throw ContractError("concat_rows: column counts differ (" + std::to_string(a->cols()) + " vs " +
                            std::to_string(b->cols()) + ")");
    Matrix out(a->rows() + b->rows(), a->cols());
    std::copy(a->value.data.begin(), a->value.data.end(), out.data.begin());
    std::copy(b->value.data.begin(), b->value.data.end(), out.data.begin() + a->value.data.size());
    auto ta = a, tb = b;
    return make_node(std::move(out), {a, b}, [ta, tb](Tensor& self) {
        const int na = ta->rows();
        if (ta->requires_grad) {
            Matrix da(ta->rows(), ta->cols());
            std::copy_n(self.grad.data.begin(), da.data.size(), da.data.begin());
            ta->accumulate_grad(da);
        }
        if (tb->requires_grad) {
            Matrix db(tb->rows(), tb->cols());
            std::copy_n(self.grad.data.begin() + static_cast<size_t>(na) * self.grad.cols, db.data.size(),
                        db.data.begin());
            tb->accumulate_grad(db);
        }
    });
}

TensorPtr mean_all(const TensorPtr& x) {
    if (x->value.size() == 0) throw ContractError("mean_all: empty tensor");
    double s = 0.0;
    for (double v : x->value.data) s += v;
    const double inv = 1.0 / static_cast<double>(x->value.size());
    auto tx = x;
    return make_node(Matrix(1, 1, s * inv), {x}, [tx, inv](Tensor& self) {
        if (!tx->requires_grad) return;
        tx->accumulate_grad(Matrix(tx->rows(), tx->cols(), self.grad.data[0] * inv));
    });
}

TensorPtr sum_all(const TensorPtr& x) {
    double s = 0.0;
    for (double v : x->value.data) s += v;
    auto tx = x;
    return make_node(Matrix(1, 1, s), {x}, [tx](Tensor& self) {
        if (!tx->requires_grad) return;
        tx->accumulate_grad(Matrix(tx->rows(), tx->cols(), self.grad.data[0]));
    });
}

TensorPtr l2_normalize_rows(const TensorPtr& x) {
    const int n = x->rows(), d = x->cols();
    Matrix out(n, d);
    std::vector<double> norms(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
        const double nr = row_norm(x->value, r);
        if (nr < kNormEps)
            throw ContractError("l2_normalize_rows: row " + std::to_string(r) + " has norm " +
                                std::to_string(nr) + " < 1e-12");
        norms[static_cast<size_t>(r)] = nr;
        for (int c = 0; c < d; ++c) out.at(r, c) = x->value.at(r, c) / nr;
    }
    auto tx = x;
    return make_node(std::move(out), {x}, [tx, norms = std::move(norms)](Tensor& self) {
        if (!tx->requires_grad) return;
        // d/dx (x/‖x‖) = (I - yyᵀ)/‖x‖ with y = x/‖x‖
        Matrix dx(tx->rows(), tx->cols());
        for (int r = 0; r < tx->rows(); ++r) {
            double dot = 0.0;
            for (int c = 0; c < tx->cols(); ++c) dot += self.grad.at(r, c) * self.value.at(r, c);
            const double inv = 1.0 / norms[static_cast<size_t>(r)];
            for (int c = 0; c < tx->cols(); ++c)
                dx.at(r, c) = (self.grad.at(r, c) - dot * self.value.at(r, c)) * inv;
        }
        tx->accumulate_grad(dx);
    });
}

TensorPtr detach(const TensorPtr& x) { return make_tensor(x->value, false); }

TensorPtr masked_row_logsumexp(const TensorPtr& x, std::vector<uint8_t> mask) {
    const int n = x->rows(), m = x->cols();
    if (mask.size() != x->value.size()) throw ContractError("masked_row_logsumexp: mask size mismatch");
    Matrix out(n, 1);
    for (int r = 0; r < n; ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < m; ++c)
            if (mask[static_cast<size_t>(r) * m + c]) mx = std::max(mx, x->value.at(r, c));
        if (!std::isfinite(mx))
            throw ContractError("masked_row_logsumexp: row " + std::to_string(r) + " has no unmasked entries");
        double s = 0.0;
        for (int c = 0; c < m; ++c)
            if (mask[static_cast<size_t>(r) * m + c]) s += std::exp(x->value.at(r, c) - mx);
        out.at(r, 0) = mx + std::log(s);
    }
    auto tx = x;
    return make_node(std::move(out), {x}, [tx, mask = std::move(mask)](Tensor& self) {
        if (!tx->requires_grad) return;
        const int m = tx->cols();
        Matrix dx(tx->rows(), m, 0.0);
        for (int r = 0; r < tx->rows(); ++r) {
            const double g = self.grad.at(r, 0);
            const double lse = self.value.at(r, 0);
            for (int c = 0; c < m; ++c)
                if (mask[static_cast<size_t>(r) * m + c])
                    dx.at(r, c) = g * std::exp(tx->value.at(r, c) - lse);  // softmax over the mask
        }
        tx->accumulate_grad(dx);
    });
}

TensorPtr weighted_sum(const TensorPtr& x, Matrix weights) {
    if (!weights.same_shape(x->value)) throw ContractError("weighted_sum: weight shape mismatch");
    double s = 0.0;
    for (size_t i = 0; i < weights.data.size(); ++i) s += weights.data[i] * x->value.data[i];
    auto tx = x;
    return make_node(Matrix(1, 1, s), {x}, [tx, w = std::move(weights)](Tensor& self) {
        if (!tx->requires_grad) return;
        Matrix dx = w;
        for (double& v : dx.data) v *= self.grad.data[0];
        tx->accumulate_grad(dx);
    });
}

// ---------------------------------------------------------------------------

double log_sum_exp(std::span<const double> v) {
    if (v.empty()) throw ContractError("log_sum_exp: empty vector");
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

void backward(const TensorPtr& loss) {
    if (loss->rows() != 1 || loss->cols() != 1)
        throw ContractError("backward: loss must be scalar, got " + std::to_string(loss->rows()) + "x" +
                            std::to_string(loss->cols()));
    if (!loss->requires_grad) return;  // constant loss: nothing reachable

    // Collect requires_grad ancestors; creation sequence is a topological order.
    std::vector<Tensor*> order;
    std::vector<TensorPtr> stack{loss};
    std::unordered_set<Tensor*> seen{loss.get()};
    order.push_back(loss.get());
    while (!stack.empty()) {
        TensorPtr t = stack.back();
        stack.pop_back();
        for (const auto& p : t->parents_) {
            if (p->requires_grad && seen.insert(p.get()).second) {
                order.push_back(p.get());
                stack.push_back(p);
            }
        }
    }
    std::sort(order.begin(), order.end(), [](const Tensor* a, const Tensor* b) { return a->seq_ > b->seq_; });

    loss->accumulate_grad(Matrix(1, 1, 1.0));
    for (Tensor* t : order)
        if (t->backward_fn_) t->backward_fn_(*t);
}

}  // namespace protofair::diff
