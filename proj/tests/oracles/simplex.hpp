#pragma once

// Dense two-phase tableau simplex used as an independent oracle for the
// interior-point solver. Maximizes c'x subject to Ax <= b, x >= 0 with b
// of any sign. Bland's rule throughout, so it cannot cycle. Test-only
// code; shares nothing with the production solver.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    std::vector<double> x;
    std::vector<double> duals;          // per row, >= 0
    std::vector<double> reduced_costs;  // per structural variable, >= 0 at optimum
    double objective = 0.0;
};

class Simplex {
public:
    // a is row-major m x n
    LpResult solve(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                   const std::vector<double>& c) {
        const int m = static_cast<int>(b.size());
        const int n = static_cast<int>(c.size());
        const double tol = 1e-9;

        // columns: n structural, m slack, up to m artificial
        int n_art = 0;
        std::vector<int> art_col(static_cast<std::size_t>(m), -1);
        for (int i = 0; i < m; ++i)
            if (b[static_cast<std::size_t>(i)] < 0.0) art_col[static_cast<std::size_t>(i)] = n + m + n_art++;
        const int ncol = n + m + n_art;

        std::vector<std::vector<double>> t(static_cast<std::size_t>(m),
                                           std::vector<double>(static_cast<std::size_t>(ncol) + 1, 0.0));
        std::vector<int> basis(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            const double sign = b[static_cast<std::size_t>(i)] < 0.0 ? -1.0 : 1.0;
            for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = sign * a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            t[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + i)] = sign;
            t[static_cast<std::size_t>(i)].back() = sign * b[static_cast<std::size_t>(i)];
            if (art_col[static_cast<std::size_t>(i)] >= 0) {
                t[static_cast<std::size_t>(i)][static_cast<std::size_t>(art_col[static_cast<std::size_t>(i)])] = 1.0;
                basis[static_cast<std::size_t>(i)] = art_col[static_cast<std::size_t>(i)];
            } else {
                basis[static_cast<std::size_t>(i)] = n + i;
            }
        }

        LpResult res;
        if (n_art > 0) {
            // phase 1: maximize -(sum of artificials)
            std::vector<double> c1(static_cast<std::size_t>(ncol), 0.0);
            for (int i = 0; i < m; ++i)
                if (art_col[static_cast<std::size_t>(i)] >= 0) c1[static_cast<std::size_t>(art_col[static_cast<std::size_t>(i)])] = -1.0;
            if (!iterate(t, basis, c1, ncol, tol)) {
                res.status = LpStatus::Unbounded;  // cannot happen in phase 1
                return res;
            }
            double p1 = 0.0;
            for (int i = 0; i < m; ++i)
                if (basis[static_cast<std::size_t>(i)] >= n + m) p1 -= t[static_cast<std::size_t>(i)].back();
            if (p1 < -1e-7) {
                res.status = LpStatus::Infeasible;
                return res;
            }
            // pivot leftover artificials out (they sit at zero)
            for (int i = 0; i < m; ++i) {
                if (basis[static_cast<std::size_t>(i)] < n + m) continue;
                int enter = -1;
                for (int j = 0; j < n + m; ++j)
                    if (std::abs(t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) > tol) { enter = j; break; }
                if (enter >= 0) pivot(t, basis, i, enter);
            }
        }

        // phase 2
        std::vector<double> c2(static_cast<std::size_t>(ncol), 0.0);
        for (int j = 0; j < n; ++j) c2[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
        // forbid artificial columns
        for (int i = 0; i < m; ++i)
            if (art_col[static_cast<std::size_t>(i)] >= 0)
                for (int row = 0; row < m; ++row)
                    if (basis[static_cast<std::size_t>(row)] == art_col[static_cast<std::size_t>(i)])
                        t[static_cast<std::size_t>(row)][static_cast<std::size_t>(art_col[static_cast<std::size_t>(i)])] = 1.0;
        if (!iterate(t, basis, c2, n + m, tol)) {
            res.status = LpStatus::Unbounded;
            return res;
        }

        res.x.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < m; ++i)
            if (basis[static_cast<std::size_t>(i)] < n)
                res.x[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] = t[static_cast<std::size_t>(i)].back();
        res.objective = 0.0;
        for (int j = 0; j < n; ++j) res.objective += c[static_cast<std::size_t>(j)] * res.x[static_cast<std::size_t>(j)];
        // reduced costs: cbar_j = c_j - z_j; duals come from slack columns
        std::vector<double> cbar = reduced(t, basis, c2, n + m);
        res.duals.assign(static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < m; ++i) res.duals[static_cast<std::size_t>(i)] = -cbar[static_cast<std::size_t>(n + i)];
        res.reduced_costs.assign(static_cast<std::size_t>(n), 0.0);
        for (int j = 0; j < n; ++j) res.reduced_costs[static_cast<std::size_t>(j)] = -cbar[static_cast<std::size_t>(j)];
        return res;
    }

private:
    static std::vector<double> reduced(const std::vector<std::vector<double>>& t,
                                       const std::vector<int>& basis, const std::vector<double>& c,
                                       int ncol) {
        const int m = static_cast<int>(basis.size());
        std::vector<double> cbar(c.begin(), c.begin() + ncol);
        for (int i = 0; i < m; ++i) {
            const double cb = c[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])];
            if (cb == 0.0) continue;
            for (int j = 0; j < ncol; ++j) cbar[static_cast<std::size_t>(j)] -= cb * t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        return cbar;
    }

    static void pivot(std::vector<std::vector<double>>& t, std::vector<int>& basis, int row, int col) {
        const int m = static_cast<int>(t.size());
        const std::size_t ncol1 = t[0].size();
        const double piv = t[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
        for (std::size_t j = 0; j < ncol1; ++j) t[static_cast<std::size_t>(row)][j] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            const double f = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < ncol1; ++j)
                t[static_cast<std::size_t>(i)][j] -= f * t[static_cast<std::size_t>(row)][j];
        }
        basis[static_cast<std::size_t>(row)] = col;
    }

    // Bland's rule; returns false on unboundedness.
    static bool iterate(std::vector<std::vector<double>>& t, std::vector<int>& basis,
                        const std::vector<double>& c, int ncol, double tol) {
        const int m = static_cast<int>(t.size());
        for (int guard = 0; guard < 100000; ++guard) {
            std::vector<double> cbar = reduced(t, basis, c, ncol);
            int enter = -1;
            for (int j = 0; j < ncol; ++j)
                if (cbar[static_cast<std::size_t>(j)] > tol) { enter = j; break; }
            if (enter < 0) return true;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < m; ++i) {
                const double aij = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
                if (aij > tol) {
                    const double ratio = t[static_cast<std::size_t>(i)].back() / aij;
                    if (leave < 0 || ratio < best - 1e-12 ||
                        (std::abs(ratio - best) <= 1e-12 &&
                         basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                        leave = i;
                        best = ratio;
                    }
                }
            }
            if (leave < 0) return false;  // unbounded
            pivot(t, basis, leave, enter);
        }
        return true;  // guard exhausted; treat as converged for oracle purposes
    }
};

} // namespace oracle
