#pragma once

#include "ldesim/sparse.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace ldesim::qp {

enum class RowSense { LessEqual, Equal };

/// Convex quadratic program in maximization form:
///
///   maximize   1/2 x' Q x + g' x + constant
///   subject to A x (<= | =) b,   lower <= x <= upper
///
/// Q is symmetric negative semidefinite and stored in full (both
/// triangles). Default bounds are [0, +inf). A variable with
/// lower == upper is treated as fixed and eliminated in presolve.
struct ConvexQP {
    int num_vars = 0;
    Csr quad;         // n x n, may be empty (LP)
    std::vector<double> linear;
    double constant = 0.0;

    Csr constraints;  // m x n
    std::vector<RowSense> sense;
    std::vector<double> rhs;

    std::vector<double> lower;  // default 0
    std::vector<double> upper;  // default +inf

    static constexpr double infinity() { return std::numeric_limits<double>::infinity(); }

    void resize(int n) {
        num_vars = n;
        linear.assign(static_cast<std::size_t>(n), 0.0);
        lower.assign(static_cast<std::size_t>(n), 0.0);
        upper.assign(static_cast<std::size_t>(n), infinity());
    }

    int num_rows() const { return constraints.rows; }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NotConverged };

const char* to_string(SolveStatus s);

/// Primal-dual solution. Duals follow the maximization convention:
/// row_duals[i] >= 0 for <=-rows, free for =-rows. reduced_costs holds
/// z = z_lower - z_upper, so z >= 0 indicates a variable pressed against
/// its lower bound and z <= 0 against its upper bound.
struct SolveResult {
    SolveStatus status = SolveStatus::NotConverged;
    std::vector<double> x;
    std::vector<double> row_duals;
    std::vector<double> reduced_costs;
    double objective = 0.0;
    double residual_primal = 0.0;
    double residual_dual = 0.0;
    double residual_comp = 0.0;
    int iterations = 0;
};

struct SolveOptions {
    double tolerance = 1e-8;
    int max_iterations = 200;
    bool scaling = true;
};

/// Mehrotra predictor-corrector interior-point method with centrality
/// correctors. Deterministic: identical inputs and options produce
/// identical results.
///
/// OPTIMAL guarantees all reported residual norms <= tolerance. The
/// relative duality gap is additionally driven to the tolerance where the
/// central path allows; on degenerate optimal faces (flat directions) it
/// may floor, and results are accepted up to a relative gap of 1e-6.
SolveResult solve(const ConvexQP& qp, const SolveOptions& options = {});

/// Independent KKT recomputation for an arbitrary candidate point.
/// All norms are scaled the same way the solver scales its self-reported
/// residuals (documented in qp.cpp next to kkt_residuals).
struct KktReport {
    double stationarity = 0.0;   // ||Qx + g - A'y + z||, scaled
    double primal = 0.0;         // row and bound violations, scaled
    double complementarity = 0.0;
    double dual_sign = 0.0;      // negative duals on <=-rows
    double max_residual() const;
};

KktReport verify_kkt(const ConvexQP& qp, const SolveResult& result);

/// Plain-text dump for cross-checking against external solvers. The
/// format is documented in the README; parse_dump inverts it exactly.
void dump(const ConvexQP& qp, std::ostream& os);
ConvexQP parse_dump(std::istream& is);

} // namespace ldesim::qp
