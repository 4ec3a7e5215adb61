#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

// Dense double-precision kernels used by the tensor layer.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, a SIMD variant (AVX2 on x86-64, NEON on aarch64). The active
// table is chosen once at startup from CPU capabilities and can be overridden
// with select() or the QUOPT_KERNELS environment variable ("scalar", "avx2",
// "neon", "auto").
//
// All variants avoid fused multiply-add so that the element-wise kernels and
// the axpy-based matmul are bit-identical across implementations; only dot()
// and sum() reassociate and may differ in the last ulps.

namespace quopt::kern {

struct Ops {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    void (*scale)(const double* a, double c, double* out, std::size_t n);
    void (*relu)(const double* a, double* out, std::size_t n);
    // out[i] = g[i] if a[i] > 0 else 0   (backward of relu)
    void (*relu_grad)(const double* a, const double* g, double* out, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
bool avx2_supported();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// Active table. Defaults to the best supported variant.
const Ops& ops();
// Force a variant by name; throws std::invalid_argument for unknown or
// unsupported names. "auto" restores the default choice.
void select(std::string_view name);
std::string_view active();
std::vector<std::string_view> available();

// Row-major matrix products built on the dispatched kernels.
// C[m,n] = A[m,k] * B[k,n]
void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n);
// C[m,n] = A[m,k] * B[n,k]^T
void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n);
// C[k,n] = A[m,k]^T * B[m,n]
void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n);

} // namespace quopt::kern
