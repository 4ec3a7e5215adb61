// NEON variants for aarch64. NEON is baseline on aarch64 so no runtime
// capability check is needed. Same no-FMA discipline as the AVX2 file.

#include "quopt/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace quopt::kern {

namespace {

double v_dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    for (; i + 2 <= n; i += 2)
        acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    float64x2_t acc = vaddq_f64(acc0, acc1);
    double tail = 0.0;
    for (; i < n; ++i)
        tail += a[i] * b[i];
    return (vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1)) + tail;
}

void v_axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
    }
    for (; i < n; ++i)
        y[i] += alpha * x[i];
}

void v_add(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i)
        out[i] = a[i] + b[i];
}

void v_mul(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i)
        out[i] = a[i] * b[i];
}

void v_scale(const double* a, double c, double* out, std::size_t n) {
    const float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vc));
    for (; i < n; ++i)
        out[i] = a[i] * c;
}

void v_relu(const double* a, double* out, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmaxq_f64(vld1q_f64(a + i), zero));
    for (; i < n; ++i)
        out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void v_relu_grad(const double* a, const double* g, double* out, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        uint64x2_t keep = vcgtq_f64(vld1q_f64(a + i), zero);
        float64x2_t gv = vld1q_f64(g + i);
        vst1q_f64(out + i,
                  vreinterpretq_f64_u64(vandq_u64(keep, vreinterpretq_u64_f64(gv))));
    }
    for (; i < n; ++i)
        out[i] = a[i] > 0.0 ? g[i] : 0.0;
}

double v_sum(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vld1q_f64(a + i));
    double tail = 0.0;
    for (; i < n; ++i)
        tail += a[i];
    return (vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1)) + tail;
}

} // namespace

const Ops& neon_ops() {
    static const Ops table = {
        "neon", v_dot, v_axpy, v_add, v_mul, v_scale, v_relu, v_relu_grad, v_sum,
    };
    return table;
}

} // namespace quopt::kern

#endif
