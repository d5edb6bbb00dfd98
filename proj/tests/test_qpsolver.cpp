#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ldesim/qp.hpp"
#include "oracles/active_set.hpp"
#include "oracles/simplex.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

using namespace ldesim;

namespace {

qp::ConvexQP lp_from_dense(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                           const std::vector<double>& c) {
    qp::ConvexQP p;
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(b.size());
    p.resize(n);
    p.linear = c;
    CsrBuilder ab(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            if (a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0.0)
                ab.add(i, j, a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    p.constraints = ab.build();
    p.constraints.cols = n;
    p.sense.assign(static_cast<std::size_t>(m), qp::RowSense::LessEqual);
    p.rhs = b;
    return p;
}

double dual_objective(const qp::ConvexQP& p, const qp::SolveResult& r) {
    double dobj = p.constant;
    std::vector<double> qx(r.x.size(), 0.0);
    if (p.quad.nnz() > 0) p.quad.multiply(r.x.data(), qx.data());
    for (std::size_t j = 0; j < r.x.size(); ++j) dobj -= 0.5 * r.x[j] * qx[j];
    for (int i = 0; i < p.num_rows(); ++i)
        if (std::isfinite(p.rhs[static_cast<std::size_t>(i)]))
            dobj += p.rhs[static_cast<std::size_t>(i)] * r.row_duals[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < r.x.size(); ++j) {
        const double z = r.reduced_costs[j];
        if (z > 0.0) dobj -= p.lower[j] * z;
        else if (z < 0.0 && std::isfinite(p.upper[j])) dobj -= p.upper[j] * z;
    }
    return dobj;
}

} // namespace

TEST_CASE("scalar quadratic: maximize -x^2 + 2x over x >= 0") {
    qp::ConvexQP p;
    p.resize(1);
    CsrBuilder qb(1, 1);
    qb.add(0, 0, -2.0);
    p.quad = qb.build();
    p.linear[0] = 2.0;
    p.constraints = Csr(0, 1);
    auto r = qp::solve(p);
    REQUIRE(r.status == qp::SolveStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("tiny LP duality: maximize x s.t. x <= 5") {
    auto p = lp_from_dense({{1.0}}, {5.0}, {1.0});
    auto r = qp::solve(p);
    REQUIRE(r.status == qp::SolveStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(r.row_duals[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("duplicated row duals sum to the single-row dual") {
    auto single = lp_from_dense({{1.0, 2.0}}, {4.0}, {3.0, 5.0});
    auto dup = lp_from_dense({{1.0, 2.0}, {1.0, 2.0}}, {4.0, 4.0}, {3.0, 5.0});
    auto rs = qp::solve(single);
    auto rd = qp::solve(dup);
    REQUIRE(rs.status == qp::SolveStatus::Optimal);
    REQUIRE(rd.status == qp::SolveStatus::Optimal);
    // oracle dual for the single-row instance
    oracle::Simplex sx;
    auto o = sx.solve({{1.0, 2.0}}, {4.0}, {3.0, 5.0});
    REQUIRE(o.status == oracle::LpStatus::Optimal);
    CHECK(rs.row_duals[0] == doctest::Approx(o.duals[0]).epsilon(1e-6));
    CHECK(rd.row_duals[0] + rd.row_duals[1] == doctest::Approx(o.duals[0]).epsilon(1e-6));
    CHECK(rd.objective == doctest::Approx(rs.objective).epsilon(1e-7));
}

TEST_CASE("verify_kkt flags perturbed and inconsistent candidates") {
    auto p = lp_from_dense({{1.0}}, {5.0}, {1.0});
    auto r = qp::solve(p);
    REQUIRE(r.status == qp::SolveStatus::Optimal);
    auto rep = qp::verify_kkt(p, r);
    CHECK(rep.max_residual() <= 1e-8);
    CHECK(rep.stationarity <= 10.0 * std::max(r.residual_dual, 1e-12));
    CHECK(rep.primal <= 10.0 * std::max(r.residual_primal, 1e-12));

    auto perturbed = r;
    perturbed.x[0] += 1e-3;
    auto rep2 = qp::verify_kkt(p, perturbed);
    CHECK((rep2.stationarity > 1e-8 || rep2.primal > 1e-8 || rep2.complementarity > 1e-8));

    // all-zero x with the dual kept: slack row with positive dual
    auto zeroed = r;
    zeroed.x[0] = 0.0;
    zeroed.reduced_costs[0] = 0.0;
    zeroed.row_duals[0] = 1.0;
    auto rep3 = qp::verify_kkt(p, zeroed);
    CHECK(rep3.complementarity > 1e-8);
}

TEST_CASE("determinism: identical inputs give identical results") {
    auto p = lp_from_dense({{1.0, 1.0}, {2.0, 1.0}}, {4.0, 6.0}, {3.0, 2.0});
    CsrBuilder qb(2, 2);
    qb.add(0, 0, -0.5);
    qb.add(1, 1, -0.25);
    p.quad = qb.build();
    auto r1 = qp::solve(p);
    auto r2 = qp::solve(p);
    REQUIRE(r1.status == qp::SolveStatus::Optimal);
    CHECK(std::memcmp(r1.x.data(), r2.x.data(), r1.x.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(r1.row_duals.data(), r2.row_duals.data(), r1.row_duals.size() * sizeof(double)) == 0);
    CHECK(r1.objective == r2.objective);
}

TEST_CASE("objective sandwich holds for optimal results") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 5);
        const int m = 2 + static_cast<int>(rng() % 3);
        std::vector<std::vector<double>> a(static_cast<std::size_t>(m),
                                           std::vector<double>(static_cast<std::size_t>(n)));
        std::vector<double> b(static_cast<std::size_t>(m)), c(static_cast<std::size_t>(n));
        for (auto& row : a)
            for (auto& v : row) v = u(rng);
        for (auto& v : b) v = 1.0 + std::abs(u(rng));
        for (auto& v : c) v = u(rng);
        auto p = lp_from_dense(a, b, c);
        CsrBuilder qb(n, n);
        for (int j = 0; j < n; ++j) qb.add(j, j, -(0.1 + std::abs(u(rng))));
        p.quad = qb.build();
        auto r = qp::solve(p);
        REQUIRE(r.status == qp::SolveStatus::Optimal);
        const double dobj = dual_objective(p, r);
        CHECK(std::abs(r.objective - dobj) <= 1e-8 * (1.0 + std::abs(r.objective)) * 10.0);
    }
}

TEST_CASE("scaling toggle changes nothing material") {
    auto p = lp_from_dense({{1000.0, 0.001}, {1.0, 1.0}}, {500.0, 3.0}, {2000.0, 0.5});
    qp::SolveOptions on, off;
    off.scaling = false;
    auto r1 = qp::solve(p, on);
    auto r2 = qp::solve(p, off);
    REQUIRE(r1.status == qp::SolveStatus::Optimal);
    REQUIRE(r2.status == qp::SolveStatus::Optimal);
    CHECK(r1.objective == doctest::Approx(r2.objective).epsilon(1e-8));
}

TEST_CASE("dump round-trips exactly") {
    auto p = lp_from_dense({{1.5, -2.25}}, {4.0}, {1.0 / 3.0, -7.0});
    CsrBuilder qb(2, 2);
    qb.add(0, 0, -0.1);
    p.quad = qb.build();
    p.upper[1] = 9.5;
    p.constant = 1.25;
    std::stringstream ss;
    qp::dump(p, ss);
    auto q = qp::parse_dump(ss);
    CHECK(q.num_vars == p.num_vars);
    CHECK(q.linear == p.linear);
    CHECK(q.lower == p.lower);
    CHECK(q.upper == p.upper);
    CHECK(q.rhs == p.rhs);
    CHECK(q.constant == p.constant);
    CHECK(q.quad.val == p.quad.val);
    CHECK(q.constraints.val == p.constraints.val);
    CHECK(q.constraints.col == p.constraints.col);
}

TEST_CASE("dimension mismatches are rejected") {
    qp::ConvexQP p;
    p.resize(2);
    p.linear.resize(1);  // wrong
    CHECK_THROWS_AS((void)qp::solve(p), std::invalid_argument);
}

// The conformance sweep backing the acceptance suite: random LPs against
// the simplex oracle, random diagonal QPs against active-set enumeration.
TEST_CASE("random instances match the independent oracles") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    qp::SolveOptions opts;

    int lp_done = 0;
    int attempts = 0;
    while (lp_done < 30 && attempts < 500) {
        ++attempts;
        const int n = 3 + static_cast<int>(rng() % 18);  // up to 20
        const int m = 2 + static_cast<int>(rng() % 10);
        std::vector<std::vector<double>> a(static_cast<std::size_t>(m),
                                           std::vector<double>(static_cast<std::size_t>(n), 0.0));
        std::vector<double> b(static_cast<std::size_t>(m)), c(static_cast<std::size_t>(n));
        for (auto& row : a)
            for (auto& v : row) v = u(rng);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = u(rng) * 2.0 + 1.0;  // mostly positive
        for (auto& v : c) v = u(rng);
        // keep the region bounded
        a.push_back(std::vector<double>(static_cast<std::size_t>(n), 1.0));
        b.push_back(5.0 * n);

        oracle::Simplex sx;
        auto o = sx.solve(a, b, c);
        auto p = lp_from_dense(a, b, c);
        auto r = qp::solve(p, opts);
        if (o.status == oracle::LpStatus::Infeasible) {
            CHECK(r.status == qp::SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(o.status == oracle::LpStatus::Optimal);
        REQUIRE(r.status == qp::SolveStatus::Optimal);
        CHECK(std::abs(r.objective - o.objective) <= 1e-7 * (1.0 + std::abs(o.objective)));
        auto rep = qp::verify_kkt(p, r);
        CHECK(rep.max_residual() <= opts.tolerance);
        ++lp_done;
    }
    CHECK(lp_done == 30);

    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);  // up to 6
        const int m = 1 + static_cast<int>(rng() % 3);
        oracle::QpInstance inst;
        inst.qdiag.resize(static_cast<std::size_t>(n));
        inst.g.resize(static_cast<std::size_t>(n));
        inst.a.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(n)));
        inst.b.resize(static_cast<std::size_t>(m));
        for (auto& v : inst.qdiag) v = -(0.2 + std::abs(u(rng)));
        for (auto& v : inst.g) v = 2.0 * u(rng);
        for (auto& row : inst.a)
            for (auto& v : row) v = u(rng);
        for (auto& v : inst.b) v = std::abs(u(rng)) + 0.5;

        auto o = oracle::enumerate_active_sets(inst);
        REQUIRE(o.feasible);  // x = 0 is always feasible here (b > 0)

        auto p = lp_from_dense(inst.a, inst.b, inst.g);
        CsrBuilder qb(n, n);
        for (int j = 0; j < n; ++j) qb.add(j, j, inst.qdiag[static_cast<std::size_t>(j)]);
        p.quad = qb.build();
        auto r = qp::solve(p, opts);
        REQUIRE(r.status == qp::SolveStatus::Optimal);
        CHECK(std::abs(r.objective - o.objective) <= 1e-7 * (1.0 + std::abs(o.objective)));
        auto rep = qp::verify_kkt(p, r);
        CHECK(rep.max_residual() <= opts.tolerance);
    }
}
