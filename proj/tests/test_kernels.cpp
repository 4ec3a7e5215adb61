#include "quopt/kernels.hpp"

#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

using namespace quopt;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> v(n);
    for (double& x : v)
        x = 2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0;
    return v;
}

} // namespace

TEST_CASE("scalar kernels compute the obvious things") {
    const kern::Ops& o = kern::scalar_ops();
    std::vector<double> a{1, 2, 3}, b{4, 5, 6}, out(3);
    CHECK(o.dot(a.data(), b.data(), 3) == doctest::Approx(32.0));
    CHECK(o.sum(a.data(), 3) == doctest::Approx(6.0));
    o.add(a.data(), b.data(), out.data(), 3);
    CHECK(out[2] == 9.0);
    o.mul(a.data(), b.data(), out.data(), 3);
    CHECK(out[1] == 10.0);
    std::vector<double> r{-2.0, 0.0, 3.0};
    o.relu(r.data(), out.data(), 3);
    CHECK(out[0] == 0.0);
    CHECK(out[2] == 3.0);
}

TEST_CASE("every available variant agrees with the scalar reference") {
    const kern::Ops& ref = kern::scalar_ops();
    for (auto name : kern::available()) {
        if (name == "scalar")
            continue;
        CAPTURE(name);
        kern::select(name);
        const kern::Ops& o = kern::ops();
        // odd lengths exercise the tail loops
        for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 129u}) {
            auto a = random_vec(n, 11 + n);
            auto b = random_vec(n, 23 + n);

            // element-wise kernels and axpy must match bit for bit
            std::vector<double> e1(n), e2(n);
            ref.add(a.data(), b.data(), e1.data(), n);
            o.add(a.data(), b.data(), e2.data(), n);
            CHECK(e1 == e2);
            ref.mul(a.data(), b.data(), e1.data(), n);
            o.mul(a.data(), b.data(), e2.data(), n);
            CHECK(e1 == e2);
            ref.scale(a.data(), 1.75, e1.data(), n);
            o.scale(a.data(), 1.75, e2.data(), n);
            CHECK(e1 == e2);
            ref.relu(a.data(), e1.data(), n);
            o.relu(a.data(), e2.data(), n);
            CHECK(e1 == e2);
            ref.relu_grad(a.data(), b.data(), e1.data(), n);
            o.relu_grad(a.data(), b.data(), e2.data(), n);
            CHECK(e1 == e2);
            e1 = b;
            e2 = b;
            ref.axpy(0.37, a.data(), e1.data(), n);
            o.axpy(0.37, a.data(), e2.data(), n);
            CHECK(e1 == e2);

            // reductions reassociate; allow last-ulp noise
            CHECK(o.dot(a.data(), b.data(), n) ==
                  doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(1e-13));
            CHECK(o.sum(a.data(), n) ==
                  doctest::Approx(ref.sum(a.data(), n)).epsilon(1e-13));
        }
    }
    kern::select("auto");
}

TEST_CASE("matmul matches a naive triple loop and is variant-independent") {
    const std::size_t m = 5, k = 7, n = 6;
    auto a = random_vec(m * k, 3);
    auto b = random_vec(k * n, 5);
    std::vector<double> naive(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < n; ++j)
                naive[i * n + j] += a[i * k + l] * b[l * n + j];

    std::vector<double> per_variant;
    for (auto name : kern::available()) {
        kern::select(name);
        std::vector<double> c(m * n);
        kern::matmul(a.data(), b.data(), c.data(), m, k, n);
        for (std::size_t i = 0; i < m * n; ++i)
            CHECK(c[i] == doctest::Approx(naive[i]).epsilon(1e-12));
        if (per_variant.empty())
            per_variant = c;
        else
            CHECK(per_variant == c); // axpy-based matmul is bitwise stable
    }
    kern::select("auto");
}

TEST_CASE("transposed products agree with explicit transposition") {
    const std::size_t m = 4, k = 5, n = 3;
    auto a = random_vec(m * k, 7);
    auto b = random_vec(m * n, 9);
    // c[k,n] = a^T b
    std::vector<double> c(k * n);
    kern::matmul_tn(a.data(), b.data(), c.data(), m, k, n);
    for (std::size_t l = 0; l < k; ++l)
        for (std::size_t j = 0; j < n; ++j) {
            double want = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                want += a[i * k + l] * b[i * n + j];
            CHECK(c[l * n + j] == doctest::Approx(want).epsilon(1e-12));
        }

    auto bt = random_vec(n * k, 13); // rows are the columns of an implicit (k,n)
    std::vector<double> d(m * n);
    kern::matmul_nt(a.data(), bt.data(), d.data(), m, k, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double want = 0.0;
            for (std::size_t l = 0; l < k; ++l)
                want += a[i * k + l] * bt[j * k + l];
            CHECK(d[i * n + j] == doctest::Approx(want).epsilon(1e-12));
        }
}
