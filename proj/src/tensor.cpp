#include "quopt/tensor.hpp"

#include "quopt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace quopt::nn {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape)
        n *= d;
    return n;
}

[[noreturn]] void shape_error(const std::string& what) {
    throw std::invalid_argument("tensor: " + what);
}

} // namespace

double* Tensor::Impl::grad_data() {
    if (grad.size() != val.size())
        grad.assign(val.size(), 0.0);
    return grad.data();
}

Tensor make_op(std::vector<std::size_t> shape, std::vector<double> val,
               std::vector<Tensor> parents, std::function<void(Tensor::Impl&)> backward) {
    auto impl = std::make_shared<Tensor::Impl>();
    impl->shape = std::move(shape);
    impl->val = std::move(val);
    bool rg = false;
    for (const Tensor& p : parents)
        rg = rg || p.requires_grad();
    impl->requires_grad = rg;
    if (rg) {
        impl->parents = std::move(parents);
        impl->backward = std::move(backward);
    }
    return Tensor(std::move(impl));
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = shape_size(shape);
    return from(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> values) {
    if (shape.empty() || shape.size() > 2)
        shape_error("rank must be 1 or 2");
    if (shape_size(shape) != values.size())
        shape_error("value count does not match shape");
    auto impl = std::make_shared<Impl>();
    impl->shape = std::move(shape);
    impl->val = std::move(values);
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double v) {
    return from({1}, {v});
}

Tensor Tensor::param(std::vector<std::size_t> shape, std::vector<double> values) {
    Tensor t = from(std::move(shape), std::move(values));
    t.p_->requires_grad = true;
    return t;
}

std::size_t Tensor::rows() const {
    return p_->shape[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2)
        shape_error("cols() on rank-1 tensor");
    return p_->shape[1];
}

std::span<const double> Tensor::grad() const {
    const_cast<Impl*>(p_.get())->grad_data();
    return p_->grad;
}

double Tensor::item() const {
    if (size() != 1)
        shape_error("item() on non-scalar");
    return p_->val[0];
}

void Tensor::zero_grad() {
    std::fill(p_->grad.begin(), p_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
    auto impl = std::make_shared<Impl>();
    impl->shape = p_->shape;
    impl->val = p_->val;
    return Tensor(std::move(impl));
}

void Tensor::backward() {
    if (size() != 1)
        shape_error("backward() requires a scalar loss");
    if (!p_->requires_grad)
        return;

    // Parents-first topological order via iterative post-order DFS.
    std::vector<Impl*> topo;
    std::unordered_set<Impl*> seen;
    struct Frame {
        Impl* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack{{p_.get(), 0}};
    seen.insert(p_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            Impl* parent = f.node->parents[f.next_parent++].impl();
            if (parent->requires_grad && seen.insert(parent).second)
                stack.push_back({parent, 0});
        } else {
            topo.push_back(f.node);
            stack.pop_back();
        }
    }

    p_->grad_data()[0] += 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        Impl* node = *it;
        if (node->backward) {
            node->grad_data(); // zero buffer when nothing was pushed here
            node->backward(*node);
        }
    }
}

// --- ops ----------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2)
        shape_error("matmul: lhs must be rank 2");
    const std::size_t m = a.rows(), k = a.cols();
    if (b.rank() == 2) {
        if (b.rows() != k)
            shape_error("matmul: inner dimensions disagree");
        const std::size_t n = b.cols();
        std::vector<double> out(m * n);
        kern::matmul(a.val().data(), b.val().data(), out.data(), m, k, n);
        return make_op({m, n}, std::move(out), {a, b}, [m, k, n](Tensor::Impl& self) {
            const double* g = self.grad.data();
            Tensor a = self.parents[0], b = self.parents[1];
            if (a.requires_grad()) {
                std::vector<double> da(m * k);
                kern::matmul_nt(g, b.val().data(), da.data(), m, n, k);
                kern::ops().add(a.impl()->grad_data(), da.data(), a.impl()->grad_data(), m * k);
            }
            if (b.requires_grad()) {
                std::vector<double> db(k * n);
                kern::matmul_tn(a.val().data(), g, db.data(), m, k, n);
                kern::ops().add(b.impl()->grad_data(), db.data(), b.impl()->grad_data(), k * n);
            }
        });
    }
    // (m,k) x (k) -> (m)
    if (b.size() != k)
        shape_error("matmul: vector length disagrees");
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i)
        out[i] = kern::ops().dot(a.val().data() + i * k, b.val().data(), k);
    return make_op({m}, std::move(out), {a, b}, [m, k](Tensor::Impl& self) {
        const double* g = self.grad.data();
        Tensor a = self.parents[0], b = self.parents[1];
        if (a.requires_grad()) {
            double* da = a.impl()->grad_data();
            for (std::size_t i = 0; i < m; ++i)
                kern::ops().axpy(g[i], b.val().data(), da + i * k, k);
        }
        if (b.requires_grad()) {
            double* db = b.impl()->grad_data();
            for (std::size_t i = 0; i < m; ++i)
                kern::ops().axpy(g[i], a.val().data() + i * k, db, k);
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        shape_error("add: shape mismatch");
    std::vector<double> out(a.size());
    kern::ops().add(a.val().data(), b.val().data(), out.data(), a.size());
    return make_op(a.shape(), std::move(out), {a, b}, [](Tensor::Impl& self) {
        for (Tensor& p : self.parents)
            if (p.requires_grad())
                kern::ops().add(p.impl()->grad_data(), self.grad.data(), p.impl()->grad_data(),
                                self.val.size());
    });
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1 || m.cols() != v.size())
        shape_error("add_rowvec: expected (m,n) + (n)");
    const std::size_t rows = m.rows(), n = m.cols();
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < rows; ++i)
        kern::ops().add(m.val().data() + i * n, v.val().data(), out.data() + i * n, n);
    return make_op(m.shape(), std::move(out), {m, v}, [rows, n](Tensor::Impl& self) {
        Tensor m = self.parents[0], v = self.parents[1];
        if (m.requires_grad())
            kern::ops().add(m.impl()->grad_data(), self.grad.data(), m.impl()->grad_data(),
                            rows * n);
        if (v.requires_grad()) {
            double* dv = v.impl()->grad_data();
            for (std::size_t i = 0; i < rows; ++i)
                kern::ops().add(dv, self.grad.data() + i * n, dv, n);
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        shape_error("sub: shape mismatch");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a.val()[i] - b.val()[i];
    return make_op(a.shape(), std::move(out), {a, b}, [](Tensor::Impl& self) {
        Tensor a = self.parents[0], b = self.parents[1];
        if (a.requires_grad())
            kern::ops().add(a.impl()->grad_data(), self.grad.data(), a.impl()->grad_data(),
                            self.val.size());
        if (b.requires_grad())
            kern::ops().axpy(-1.0, self.grad.data(), b.impl()->grad_data(), self.val.size());
    });
}

Tensor neg(const Tensor& a) {
    return scale(a, -1.0);
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        shape_error("mul: shape mismatch");
    std::vector<double> out(a.size());
    kern::ops().mul(a.val().data(), b.val().data(), out.data(), a.size());
    return make_op(a.shape(), std::move(out), {a, b}, [](Tensor::Impl& self) {
        Tensor a = self.parents[0], b = self.parents[1];
        std::vector<double> tmp(self.val.size());
        if (a.requires_grad()) {
            kern::ops().mul(self.grad.data(), b.val().data(), tmp.data(), tmp.size());
            kern::ops().add(a.impl()->grad_data(), tmp.data(), a.impl()->grad_data(), tmp.size());
        }
        if (b.requires_grad()) {
            kern::ops().mul(self.grad.data(), a.val().data(), tmp.data(), tmp.size());
            kern::ops().add(b.impl()->grad_data(), tmp.data(), b.impl()->grad_data(), tmp.size());
        }
    });
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    kern::ops().scale(a.val().data(), c, out.data(), a.size());
    return make_op(a.shape(), std::move(out), {a}, [c](Tensor::Impl& self) {
        Tensor a = self.parents[0];
        if (a.requires_grad())
            kern::ops().axpy(c, self.grad.data(), a.impl()->grad_data(), self.val.size());
    });
}

Tensor relu(const Tensor& a) {
    std::vector<double> out(a.size());
    kern::ops().relu(a.val().data(), out.data(), a.size());
    return make_op(a.shape(), std::move(out), {a}, [](Tensor::Impl& self) {
        Tensor a = self.parents[0];
        if (!a.requires_grad())
            return;
        std::vector<double> tmp(self.val.size());
        kern::ops().relu_grad(a.val().data(), self.grad.data(), tmp.data(), tmp.size());
        kern::ops().add(a.impl()->grad_data(), tmp.data(), a.impl()->grad_data(), tmp.size());
    });
}

Tensor concat(const Tensor& a, const Tensor& b) {
    if (a.rank() != 1 || b.rank() != 1)
        shape_error("concat: expected rank-1 inputs");
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.val().begin(), a.val().end());
    out.insert(out.end(), b.val().begin(), b.val().end());
    const std::size_t na = a.size();
    return make_op({a.size() + b.size()}, std::move(out), {a, b}, [na](Tensor::Impl& self) {
        Tensor a = self.parents[0], b = self.parents[1];
        if (a.requires_grad())
            kern::ops().add(a.impl()->grad_data(), self.grad.data(), a.impl()->grad_data(), na);
        if (b.requires_grad())
            kern::ops().add(b.impl()->grad_data(), self.grad.data() + na, b.impl()->grad_data(),
                            self.val.size() - na);
    });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows())
        shape_error("concat_cols: expected matching row counts");
    const std::size_t m = a.rows(), p = a.cols(), q = b.cols();
    std::vector<double> out(m * (p + q));
    for (std::size_t i = 0; i < m; ++i) {
        std::copy_n(a.val().data() + i * p, p, out.data() + i * (p + q));
        std::copy_n(b.val().data() + i * q, q, out.data() + i * (p + q) + p);
    }
    return make_op({m, p + q}, std::move(out), {a, b}, [m, p, q](Tensor::Impl& self) {
        Tensor a = self.parents[0], b = self.parents[1];
        for (std::size_t i = 0; i < m; ++i) {
            const double* g = self.grad.data() + i * (p + q);
            if (a.requires_grad())
                kern::ops().add(a.impl()->grad_data() + i * p, g, a.impl()->grad_data() + i * p,
                                p);
            if (b.requires_grad())
                kern::ops().add(b.impl()->grad_data() + i * q, g + p,
                                b.impl()->grad_data() + i * q, q);
        }
    });
}

Tensor gather_rows(const Tensor& m, const std::vector<std::size_t>& idx) {
    if (m.rank() != 2)
        shape_error("gather_rows: expected rank-2 input");
    const std::size_t d = m.cols();
    std::vector<double> out(idx.size() * d);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= m.rows())
            shape_error("gather_rows: index out of range");
        std::copy_n(m.val().data() + idx[i] * d, d, out.data() + i * d);
    }
    return make_op({idx.size(), d}, std::move(out), {m}, [idx, d](Tensor::Impl& self) {
        Tensor m = self.parents[0];
        if (!m.requires_grad())
            return;
        double* dm = m.impl()->grad_data();
        for (std::size_t i = 0; i < idx.size(); ++i)
            kern::ops().add(dm + idx[i] * d, self.grad.data() + i * d, dm + idx[i] * d, d);
    });
}

Tensor scatter_add_rows(const Tensor& src, const std::vector<std::size_t>& idx, std::size_t n) {
    if (src.rank() != 2 || src.rows() != idx.size())
        shape_error("scatter_add_rows: row count must match index count");
    const std::size_t d = src.cols();
    std::vector<double> out(n * d, 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= n)
            shape_error("scatter_add_rows: index out of range");
        kern::ops().add(out.data() + idx[i] * d, src.val().data() + i * d,
                        out.data() + idx[i] * d, d);
    }
    return make_op({n, d}, std::move(out), {src}, [idx, d](Tensor::Impl& self) {
        Tensor src = self.parents[0];
        if (!src.requires_grad())
            return;
        double* ds = src.impl()->grad_data();
        for (std::size_t i = 0; i < idx.size(); ++i)
            kern::ops().add(ds + i * d, self.grad.data() + idx[i] * d, ds + i * d, d);
    });
}

Tensor flatten(const Tensor& a) {
    std::vector<double> out(a.val().begin(), a.val().end());
    return make_op({a.size()}, std::move(out), {a}, [](Tensor::Impl& self) {
        Tensor a = self.parents[0];
        if (a.requires_grad())
            kern::ops().add(a.impl()->grad_data(), self.grad.data(), a.impl()->grad_data(),
                            self.val.size());
    });
}

Tensor as_row(const Tensor& a) {
    if (a.rank() != 1)
        shape_error("as_row: expected rank-1 input");
    std::vector<double> out(a.val().begin(), a.val().end());
    return make_op({1, a.size()}, std::move(out), {a}, [](Tensor::Impl& self) {
        Tensor a = self.parents[0];
        if (a.requires_grad())
            kern::ops().add(a.impl()->grad_data(), self.grad.data(), a.impl()->grad_data(),
                            self.val.size());
    });
}

Tensor index1(const Tensor& v, std::size_t i) {
    if (v.rank() != 1 || i >= v.size())
        shape_error("index1: bad index");
    return make_op({1}, {v.val()[i]}, {v}, [i](Tensor::Impl& self) {
        Tensor v = self.parents[0];
        if (v.requires_grad())
            v.impl()->grad_data()[i] += self.grad[0];
    });
}

Tensor sum(const Tensor& a) {
    double s = kern::ops().sum(a.val().data(), a.size());
    return make_op({1}, {s}, {a}, [](Tensor::Impl& self) {
        Tensor a = self.parents[0];
        if (!a.requires_grad())
            return;
        double* da = a.impl()->grad_data();
        const double g = self.grad[0];
        for (std::size_t i = 0; i < a.size(); ++i)
            da[i] += g;
    });
}

Tensor mean(const Tensor& a) {
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor square(const Tensor& a) {
    return mul(a, a);
}

Tensor exp_elem(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = std::exp(a.val()[i]);
    return make_op(a.shape(), std::move(out), {a}, [](Tensor::Impl& self) {
        Tensor a = self.parents[0];
        if (!a.requires_grad())
            return;
        std::vector<double> tmp(self.val.size());
        kern::ops().mul(self.grad.data(), self.val.data(), tmp.data(), tmp.size());
        kern::ops().add(a.impl()->grad_data(), tmp.data(), a.impl()->grad_data(), tmp.size());
    });
}

Tensor log_elem(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = std::log(a.val()[i]);
    return make_op(a.shape(), std::move(out), {a}, [](Tensor::Impl& self) {
        Tensor a = self.parents[0];
        if (!a.requires_grad())
            return;
        double* da = a.impl()->grad_data();
        for (std::size_t i = 0; i < self.val.size(); ++i)
            da[i] += self.grad[i] / a.val()[i];
    });
}

Tensor clip(const Tensor& a, double lo, double hi) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = std::clamp(a.val()[i], lo, hi);
    return make_op(a.shape(), std::move(out), {a}, [lo, hi](Tensor::Impl& self) {
        Tensor a = self.parents[0];
        if (!a.requires_grad())
            return;
        double* da = a.impl()->grad_data();
        for (std::size_t i = 0; i < self.val.size(); ++i)
            if (a.val()[i] >= lo && a.val()[i] <= hi)
                da[i] += self.grad[i];
    });
}

Tensor minimum(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        shape_error("minimum: shape mismatch");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a.val()[i] <= b.val()[i] ? a.val()[i] : b.val()[i];
    return make_op(a.shape(), std::move(out), {a, b}, [](Tensor::Impl& self) {
        Tensor a = self.parents[0], b = self.parents[1];
        for (std::size_t i = 0; i < self.val.size(); ++i) {
            const bool take_a = a.val()[i] <= b.val()[i];
            if (take_a && a.requires_grad())
                a.impl()->grad_data()[i] += self.grad[i];
            else if (!take_a && b.requires_grad())
                b.impl()->grad_data()[i] += self.grad[i];
        }
    });
}

Tensor softmax(const Tensor& v) {
    if (v.rank() != 1)
        shape_error("softmax: expected rank-1 input");
    const std::size_t n = v.size();
    if (n == 0)
        shape_error("softmax: empty input");
    double m = v.val()[0];
    for (double x : v.val())
        m = std::max(m, x);
    std::vector<double> out(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(v.val()[i] - m);
        z += out[i];
    }
    for (double& x : out)
        x /= z;
    return make_op({n}, std::move(out), {v}, [](Tensor::Impl& self) {
        Tensor v = self.parents[0];
        if (!v.requires_grad())
            return;
        const double gdotp = kern::ops().dot(self.grad.data(), self.val.data(), self.val.size());
        double* dv = v.impl()->grad_data();
        for (std::size_t i = 0; i < self.val.size(); ++i)
            dv[i] += self.val[i] * (self.grad[i] - gdotp);
    });
}

Tensor masked_log_softmax(const Tensor& v, const std::vector<std::uint8_t>& mask) {
    if (v.rank() != 1)
        shape_error("masked_log_softmax: expected rank-1 input");
    if (mask.size() != v.size())
        shape_error("masked_log_softmax: mask length mismatch");
    const std::size_t n = v.size();
    double m = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) {
            any = true;
            m = std::max(m, v.val()[i]);
        }
    if (!any)
        throw std::invalid_argument("masked_log_softmax: all entries masked");
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i])
            z += std::exp(v.val()[i] - m);
    const double logz = std::log(z);
    std::vector<double> out(n);
    std::vector<double> probs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (mask[i]) {
            out[i] = v.val()[i] - m - logz;
            probs[i] = std::exp(out[i]);
        } else {
            out[i] = kMaskedLogit;
        }
    }
    return make_op({n}, std::move(out), {v},
                   [mask, probs = std::move(probs)](Tensor::Impl& self) {
                       Tensor v = self.parents[0];
                       if (!v.requires_grad())
                           return;
                       double gsum = 0.0;
                       for (std::size_t i = 0; i < self.val.size(); ++i)
                           if (mask[i])
                               gsum += self.grad[i];
                       double* dv = v.impl()->grad_data();
                       for (std::size_t i = 0; i < self.val.size(); ++i)
                           if (mask[i])
                               dv[i] += self.grad[i] - probs[i] * gsum;
                   });
}

Tensor stop_gradient(const Tensor& a) {
    return a.detach();
}

// --- Adam ----------------------------------------------------------------

void Adam::add(Tensor p, double lr) {
    if (!p.requires_grad())
        throw std::invalid_argument("adam: parameter does not require grad");
    Slot s;
    s.p = std::move(p);
    s.lr = lr;
    s.m.assign(s.p.size(), 0.0);
    s.v.assign(s.p.size(), 0.0);
    slots_.push_back(std::move(s));
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Slot& s : slots_) {
        double* w = s.p.val_mut().data();
        const double* g = s.p.impl()->grad_data();
        for (std::size_t i = 0; i < s.p.size(); ++i) {
            s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g[i];
            s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = s.m[i] / bc1;
            const double vhat = s.v[i] / bc2;
            w[i] -= s.lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void Adam::zero_grad() {
    for (Slot& s : slots_)
        s.p.zero_grad();
}

} // namespace quopt::nn
