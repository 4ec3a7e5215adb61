#include "quopt/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace quopt::kern {

namespace {

const Ops* best_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported())
        return &avx2_ops();
#endif
#if defined(__aarch64__)
    return &neon_ops();
#endif
    return &scalar_ops();
}

const Ops* lookup(std::string_view name) {
    if (name == "auto")
        return best_supported();
    if (name == "scalar")
        return &scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
        if (!avx2_supported())
            throw std::invalid_argument("kernels: avx2 not supported on this cpu");
        return &avx2_ops();
    }
#endif
#if defined(__aarch64__)
    if (name == "neon")
        return &neon_ops();
#endif
    throw std::invalid_argument("kernels: unknown variant '" + std::string(name) + "'");
}

const Ops*& active_slot() {
    static const Ops* slot = [] {
        if (const char* env = std::getenv("QUOPT_KERNELS"); env && *env)
            return lookup(env);
        return best_supported();
    }();
    return slot;
}

} // namespace

const Ops& ops() {
    return *active_slot();
}

void select(std::string_view name) {
    active_slot() = lookup(name);
}

std::string_view active() {
    return active_slot()->name;
}

std::vector<std::string_view> available() {
    std::vector<std::string_view> out{"scalar"};
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported())
        out.push_back("avx2");
#endif
#if defined(__aarch64__)
    out.push_back("neon");
#endif
    return out;
}

void matmul(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
            std::size_t n) {
    const Ops& o = ops();
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        const double* arow = a + i * k;
        for (std::size_t l = 0; l < k; ++l)
            o.axpy(arow[l], b + l * n, crow, n);
    }
}

void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
    const Ops& o = ops();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            c[i * n + j] = o.dot(a + i * k, b + j * k, k);
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
    const Ops& o = ops();
    std::memset(c, 0, k * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (std::size_t l = 0; l < k; ++l)
            o.axpy(arow[l], brow, c + l * n, n);
    }
}

} // namespace quopt::kern
