#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "stiffkrylov/types.hpp"

namespace stiffkrylov {

/// Linear DAE  C x' + G x = u(t),  u(t) = u0 + u1*t,  with C symmetric PSD
/// and possibly singular.
struct DaeSystem {
    Index n_dim = 0;
    SpMat C;
    SpMat G;
    Vec u0, u1, x0;
    /// Whether sym(G) is strictly positive definite (set by validate()).
    bool g_definite = false;

    Vec u_at(double t) const { return u0 + t * u1; }
};

struct ValidationReport {
    double c_symmetry_defect = 0;     // max|C - C^T| / max|C|
    double c_min_eig = 0;             // smallest eigenvalue of C
    double c_max_eig = 0;
    double g_sym_min_eig = 0;         // smallest eigenvalue of (G + G^T)/2
    bool c_psd_ok = false;
    bool g_definite = false;
    bool g_psd_ok = false;
    Index c_rank = 0;
    double range_condition_defect = 0;  // ||(I - P_C)(G x0 - u0)|| / (1 + ||G x0 - u0||)
    bool range_condition_ok = false;
    std::vector<std::string> warnings;

    bool pass() const { return c_psd_ok && g_psd_ok; }
    std::string summary() const;
};

/// Checks the structural assumptions (C symmetric PSD, sym(G) PSD, range
/// consistency of the initial data) and sets system.g_definite.
/// Throws ValidationError on dimension mismatch or indefinite C.
ValidationReport validate(DaeSystem& system, double tau = 1e-10);

/// Orthogonal projector onto the range of C from its eigen-decomposition.
/// A structurally diagonal C takes the O(N) coordinate-selection path.
struct RangeProjector {
    Index dim = 0;             // N
    Index n = 0;               // rank
    double zero_threshold = 0; // absolute cutoff used
    bool diagonal_fast_path = false;
    std::vector<Index> idx;    // fast path: coordinates with c_ii > threshold
    Vec c1;                    // the n nonzero eigenvalues
    Mat v;                     // N x n eigenvector basis (empty on fast path)

    Vec apply(const Vec& x) const;       // P_C x
    Vec vt_apply(const Vec& x) const;    // V_C^T x  (length n)
    Vec lift(const Vec& y) const;        // V_C y    (length N)
    Mat basis() const;                   // materialized V_C
};

RangeProjector range_projector(const SpMat& C, double zero_threshold_rel = 1e-12);

/// Reusable sparse LU wrapper. Throws NumericalError naming the pivot on
/// singular factorization.
class SparseSolver {
public:
    explicit SparseSolver(const SpMat& a, std::string name = "matrix");
    Vec solve(const Vec& rhs) const;
    const SpMat& matrix() const { return a_; }

private:
    SpMat a_;
    std::string name_;
    std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
};

/// Dense reduced operators B11 = V_C^T G^{-1} C V_C and
/// S11 = V_C^T (C + gamma G)^{-1} C V_C. Oracle/diagnostic scale only.
struct ReducedOperators {
    Mat b11;
    Mat s11;
    Vec c1;
    double gamma = 0;
};

ReducedOperators reduced_operators(const DaeSystem& system, const RangeProjector& P,
                                   double gamma);

/// Smallest eigenvalue of a sparse symmetric matrix; dense below n=2000,
/// shifted inverse iteration above.
double min_sym_eigenvalue(const SpMat& sym);

}  // namespace stiffkrylov
