#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ldesim/kernels.hpp"
#include "ldesim/sparse.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace ldesim;
namespace k = ldesim::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -10.0,
                               double hi = 10.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

struct BackendGuard {
    ~BackendGuard() { k::force_backend("scalar"), k::force_backend(k::avx2_supported() ? "avx2" : "scalar"); }
};

} // namespace

TEST_CASE("scalar and avx2 backends agree") {
    if (!k::avx2_supported()) {
        MESSAGE("avx2 not available; equivalence sweep skipped");
        return;
    }
    BackendGuard guard;
    std::mt19937_64 rng(123);
    // odd lengths exercise the remainder loops
    for (std::size_t n : {std::size_t(1), std::size_t(3), std::size_t(4), std::size_t(7),
                          std::size_t(64), std::size_t(1001)}) {
        auto x = random_vec(rng, n);
        auto y = random_vec(rng, n);

        REQUIRE(k::force_backend("scalar"));
        const double dot_s = k::dot(x.data(), y.data(), n);
        const double ninf_s = k::norm_inf(x.data(), n);
        auto ax_s = y;
        k::axpy(2.5, x.data(), ax_s.data(), n);
        auto had_s = std::vector<double>(n);
        k::hadamard(x.data(), y.data(), had_s.data(), n);
        auto sc_s = x;
        k::scale(sc_s.data(), -1.5, n);

        REQUIRE(k::force_backend("avx2"));
        const double dot_v = k::dot(x.data(), y.data(), n);
        const double ninf_v = k::norm_inf(x.data(), n);
        auto ax_v = y;
        k::axpy(2.5, x.data(), ax_v.data(), n);
        auto had_v = std::vector<double>(n);
        k::hadamard(x.data(), y.data(), had_v.data(), n);
        auto sc_v = x;
        k::scale(sc_v.data(), -1.5, n);

        CHECK(std::abs(dot_s - dot_v) <= 1e-13 * (1.0 + std::abs(dot_s)));
        CHECK(ninf_s == ninf_v);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(ax_s[i] == doctest::Approx(ax_v[i]).epsilon(1e-15));
            CHECK(had_s[i] == had_v[i]);
            CHECK(sc_s[i] == sc_v[i]);
        }
    }
}

TEST_CASE("step_ratio agrees across backends and handles edge cases") {
    BackendGuard guard;
    std::mt19937_64 rng(5);
    for (std::size_t n : {std::size_t(2), std::size_t(5), std::size_t(33)}) {
        auto x = random_vec(rng, n, 0.01, 5.0);
        auto dx = random_vec(rng, n, -3.0, 3.0);
        REQUIRE(k::force_backend("scalar"));
        const double a_s = k::step_ratio(x.data(), dx.data(), n);
        if (k::avx2_supported()) {
            REQUIRE(k::force_backend("avx2"));
            const double a_v = k::step_ratio(x.data(), dx.data(), n);
            CHECK(a_s == doctest::Approx(a_v).epsilon(1e-15));
        }
        // alpha is the exact blocking ratio
        double expect = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            if (dx[i] < 0.0) expect = std::min(expect, -x[i] / dx[i]);
        CHECK(a_s == expect);
    }
    // all-ascending direction: unbounded step
    std::vector<double> x{1.0, 2.0}, dx{0.5, 0.0};
    REQUIRE(k::force_backend("scalar"));
    CHECK(std::isinf(k::step_ratio(x.data(), dx.data(), 2)));
}

TEST_CASE("spmv equivalence on random CSR matrices") {
    BackendGuard guard;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
        const int rows = 1 + static_cast<int>(rng() % 40);
        const int cols = 1 + static_cast<int>(rng() % 40);
        CsrBuilder b(rows, cols);
        const int nnz = static_cast<int>(rng() % (rows * cols + 1));
        for (int e = 0; e < nnz; ++e)
            b.add(static_cast<int>(rng() % rows), static_cast<int>(rng() % cols), u(rng));
        Csr m = b.build();
        auto x = random_vec(rng, static_cast<std::size_t>(cols));
        std::vector<double> ys(static_cast<std::size_t>(rows)), yv(static_cast<std::size_t>(rows));
        REQUIRE(k::force_backend("scalar"));
        m.multiply(x.data(), ys.data());
        if (!k::avx2_supported()) continue;
        REQUIRE(k::force_backend("avx2"));
        m.multiply(x.data(), yv.data());
        for (int r = 0; r < rows; ++r)
            CHECK(ys[static_cast<std::size_t>(r)] ==
                  doctest::Approx(yv[static_cast<std::size_t>(r)]).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("csr transpose round-trip") {
    CsrBuilder b(3, 4);
    b.add(0, 1, 2.0);
    b.add(2, 3, -1.0);
    b.add(1, 0, 4.0);
    b.add(0, 1, 1.0);  // duplicate merges
    Csr m = b.build();
    CHECK(m.nnz() == 3);
    Csr t = m.transposed();
    CHECK(t.rows == 4);
    CHECK(t.cols == 3);
    Csr m2 = t.transposed();
    CHECK(m2.col == m.col);
    CHECK(m2.val == m.val);
    CHECK(m2.row_ptr == m.row_ptr);
}
