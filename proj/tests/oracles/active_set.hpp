#pragma once

// Brute-force oracle for small convex QPs: enumerate every active set
// (constraint rows plus variables pinned at zero), solve the equality
// KKT system densely, keep the best candidate whose multipliers have the
// right signs. Exponential, so only for tiny instances. Test-only.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

struct QpInstance {
    // maximize 1/2 x' diag(qdiag) x + g' x  s.t.  A x <= b, x >= 0
    std::vector<double> qdiag;  // <= 0
    std::vector<double> g;
    std::vector<std::vector<double>> a;
    std::vector<double> b;
};

struct QpOracleResult {
    bool feasible = false;
    double objective = -std::numeric_limits<double>::infinity();
    std::vector<double> x;
};

inline QpOracleResult enumerate_active_sets(const QpInstance& qp) {
    const int n = static_cast<int>(qp.g.size());
    const int m = static_cast<int>(qp.b.size());
    QpOracleResult best;
    const double tol = 1e-7;

    for (unsigned rows_mask = 0; rows_mask < (1u << m); ++rows_mask) {
        for (unsigned var_mask = 0; var_mask < (1u << n); ++var_mask) {
            std::vector<int> act_rows, act_vars;
            for (int i = 0; i < m; ++i)
                if (rows_mask & (1u << i)) act_rows.push_back(i);
            for (int j = 0; j < n; ++j)
                if (var_mask & (1u << j)) act_vars.push_back(j);
            const int k = static_cast<int>(act_rows.size() + act_vars.size());
            const int dim = n + k;
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
            // stationarity: Qx + g - A_R' lam + I_Z z = 0
            for (int j = 0; j < n; ++j) {
                kkt(j, j) = qp.qdiag[static_cast<std::size_t>(j)];
                rhs(j) = -qp.g[static_cast<std::size_t>(j)];
            }
            for (std::size_t r = 0; r < act_rows.size(); ++r)
                for (int j = 0; j < n; ++j)
                    kkt(j, n + static_cast<int>(r)) = -qp.a[static_cast<std::size_t>(act_rows[r])][static_cast<std::size_t>(j)];
            for (std::size_t z = 0; z < act_vars.size(); ++z)
                kkt(act_vars[z], n + static_cast<int>(act_rows.size() + z)) = 1.0;
            // active rows and pinned variables
            for (std::size_t r = 0; r < act_rows.size(); ++r) {
                for (int j = 0; j < n; ++j)
                    kkt(n + static_cast<int>(r), j) = qp.a[static_cast<std::size_t>(act_rows[r])][static_cast<std::size_t>(j)];
                rhs(n + static_cast<int>(r)) = qp.b[static_cast<std::size_t>(act_rows[r])];
            }
            for (std::size_t z = 0; z < act_vars.size(); ++z)
                kkt(n + static_cast<int>(act_rows.size() + z), act_vars[z]) = 1.0;

            Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
            if (!lu.isInvertible()) continue;
            Eigen::VectorXd sol = lu.solve(rhs);
            // feasibility and multiplier signs
            bool ok = true;
            for (int j = 0; j < n && ok; ++j)
                if (sol(j) < -tol) ok = false;
            for (int i = 0; i < m && ok; ++i) {
                double ax = 0.0;
                for (int j = 0; j < n; ++j) ax += qp.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * sol(j);
                if (ax > qp.b[static_cast<std::size_t>(i)] + tol) ok = false;
            }
            for (int r = 0; r < static_cast<int>(act_rows.size()) && ok; ++r)
                if (sol(n + r) < -tol) ok = false;
            for (int z = 0; z < static_cast<int>(act_vars.size()) && ok; ++z)
                if (sol(n + static_cast<int>(act_rows.size()) + z) < -tol) ok = false;
            if (!ok) continue;
            double obj = 0.0;
            for (int j = 0; j < n; ++j)
                obj += 0.5 * qp.qdiag[static_cast<std::size_t>(j)] * sol(j) * sol(j) +
                       qp.g[static_cast<std::size_t>(j)] * sol(j);
            if (!best.feasible || obj > best.objective) {
                best.feasible = true;
                best.objective = obj;
                best.x.assign(sol.data(), sol.data() + n);
            }
        }
    }
    return best;
}

} // namespace oracle
