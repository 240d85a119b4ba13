#pragma once

#include <optional>
#include <string>

#include "stiffkrylov/dae_system.hpp"

namespace stiffkrylov {

/// Factorization of (C + gamma*G), reused for every Arnoldi step.
class ShiftedOperator {
public:
    ShiftedOperator(const DaeSystem& system, double gamma);

    Vec solve(const Vec& rhs) const { return solver_.solve(rhs); }
    Vec apply_c(const Vec& x) const { return system_->C * x; }
    double gamma() const { return gamma_; }
    const DaeSystem& system() const { return *system_; }

private:
    const DaeSystem* system_;
    double gamma_;
    SparseSolver solver_;
};

enum class OrthoMode {
    structured,  // C-semi-inner product, P_C after every solve
    plain        // Euclidean inner product, P_C only on the initial vector
};

struct ArnoldiOptions {
    int m_max = 30;
    double tol = 1e-12;  // happy-breakdown tolerance, relative to beta0
    OrthoMode mode = OrthoMode::structured;
    bool project_each_step = true;  // structured mode only
};

struct KrylovDecomposition {
    Mat w;           // N x m basis
    Mat h;           // m x m upper Hessenberg
    double h_tail = 0;
    Vec w_next;      // zero at breakdown
    double gamma = 0;
    double beta0 = 0;
    int m = 0;
    bool breakdown = false;
    OrthoMode mode = OrthoMode::structured;
};

/// Arnoldi with explicit structured orthogonalization and implicit
/// regularization: w <- P_C v, normalize in ||.||_C, per step solve
/// (C + gamma*G) w = C w_j, project, modified Gram-Schmidt in <.,.>_C
/// plus one unconditional second pass.
KrylovDecomposition c_arnoldi(const ShiftedOperator& op, const RangeProjector& P,
                              const Vec& v, const ArnoldiOptions& opts = {});

/// One DGKS pass of w against the first j columns of basis in the C inner
/// product; coefficients are accumulated into coeffs when given.
Vec reorthogonalize_pass(const Mat& basis, int j, Vec w, const SpMat& C, Vec* coeffs);

/// beta(t) = h_tail * gamma^{-1} * e_m^T H^{-1} phi_0(-t (H^{-1}-I)/gamma) * rhs_coeff.
double residual_beta(const KrylovDecomposition& K, double t, const Vec& rhs_coeff);

struct ResidualEstimate {
    double beta_sup = 0;
    double residual_direction_norm = 0;
    double posterior_bound = 0;
    bool heuristic = false;
    double cond_k = 1;
    double omega = 0;
    std::string omega_choice;  // "largest" or "smallest" eigenvalue of the symmetric part
};

/// Posterior bound K * t * phi1(-t*omega) * ||(I + gamma B11^{-1}) V_C^T w_{m+1}||_{C1}
/// * sup_theta |beta(t*theta)|. Without reduced operators only the beta part
/// is returned, flagged heuristic.
ResidualEstimate posterior_bound(const KrylovDecomposition& K, const RangeProjector& P,
                                 const ReducedOperators* ops, double t,
                                 const Vec& rhs_coeff);

/// H as CSV, W as Matrix Market, metadata as JSON into dir.
void dump_decomposition(const KrylovDecomposition& K, const std::string& dir);

}  // namespace stiffkrylov
