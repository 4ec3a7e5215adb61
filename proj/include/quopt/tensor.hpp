#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

// Minimal dense tensor with reverse-mode differentiation. Rank is 1 or 2,
// values are row-major doubles. Each op records a backward closure when any
// input wants gradients; backward() walks the recorded graph once. Gradients
// accumulate across backward calls until zero_grad().

namespace quopt::nn {

class Tensor {
public:
    struct Impl {
        std::vector<std::size_t> shape;
        std::vector<double> val;
        std::vector<double> grad; // sized lazily, same length as val
        bool requires_grad = false;
        std::vector<Tensor> parents;
        // Pulls from this->grad, pushes into parents' grads.
        std::function<void(Impl&)> backward;

        double* grad_data();
    };

    Tensor() = default;

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor from(std::vector<std::size_t> shape, std::vector<double> values);
    static Tensor scalar(double v);
    // Leaf with requires_grad set: a trainable parameter.
    static Tensor param(std::vector<std::size_t> shape, std::vector<double> values);

    bool defined() const { return static_cast<bool>(p_); }
    const std::vector<std::size_t>& shape() const { return p_->shape; }
    std::size_t rank() const { return p_->shape.size(); }
    std::size_t size() const { return p_->val.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<const double> val() const { return p_->val; }
    std::span<double> val_mut() { return p_->val; }
    std::span<const double> grad() const;
    double item() const; // value of a 1-element tensor

    bool requires_grad() const { return p_->requires_grad; }

    // Runs reverse-mode accumulation from this scalar.
    void backward();
    void zero_grad();

    // Value-identical leaf detached from the graph.
    Tensor detach() const;

    Impl* impl() const { return p_.get(); }

private:
    explicit Tensor(std::shared_ptr<Impl> p) : p_(std::move(p)) {}
    std::shared_ptr<Impl> p_;

    friend Tensor make_op(std::vector<std::size_t> shape, std::vector<double> val,
                          std::vector<Tensor> parents,
                          std::function<void(Tensor::Impl&)> backward);
};

// --- ops ---------------------------------------------------------------

// (m,k)x(k,n)->(m,n) or (m,k)x(k)->(m)
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);        // same shape
Tensor add_rowvec(const Tensor& m, const Tensor& v); // (m,n) + (n) broadcast over rows
Tensor sub(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor mul(const Tensor& a, const Tensor& b); // elementwise
Tensor scale(const Tensor& a, double c);
Tensor relu(const Tensor& a);
Tensor concat(const Tensor& a, const Tensor& b);      // 1-D
Tensor concat_cols(const Tensor& a, const Tensor& b); // (m,p)|(m,q) -> (m,p+q)
Tensor gather_rows(const Tensor& m, const std::vector<std::size_t>& idx);
// out[n,d]; out[idx[i],:] += src[i,:]
Tensor scatter_add_rows(const Tensor& src, const std::vector<std::size_t>& idx, std::size_t n);
Tensor flatten(const Tensor& a);              // rank-2 -> rank-1, row-major
Tensor as_row(const Tensor& a);               // rank-1 (n) -> rank-2 (1,n)
Tensor index1(const Tensor& v, std::size_t i); // 1-element slice of a rank-1 tensor
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor square(const Tensor& a);
Tensor exp_elem(const Tensor& a);
Tensor log_elem(const Tensor& a);
Tensor clip(const Tensor& a, double lo, double hi);
Tensor minimum(const Tensor& a, const Tensor& b); // ties take a's gradient
Tensor softmax(const Tensor& v);                  // 1-D, numerically stable

// Sentinel used for masked-out logits. Finite so downstream arithmetic stays
// NaN-free; exp() of it underflows to exactly 0.
inline constexpr double kMaskedLogit = -1e30;

// 1-D masked log-softmax: masked entries get kMaskedLogit and zero gradient,
// unmasked entries are normalized over the unmasked support only.
Tensor masked_log_softmax(const Tensor& v, const std::vector<std::uint8_t>& mask);

Tensor stop_gradient(const Tensor& a);

// --- optimizer ----------------------------------------------------------

// Adaptive-moment update with bias correction, one shared step counter.
class Adam {
public:
    Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void add(Tensor p, double lr);
    void step();
    void zero_grad();
    std::int64_t steps() const { return t_; }

private:
    struct Slot {
        Tensor p;
        double lr;
        std::vector<double> m, v;
    };
    std::vector<Slot> slots_;
    double beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

} // namespace quopt::nn
