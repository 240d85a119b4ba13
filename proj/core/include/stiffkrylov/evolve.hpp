#pragma once

#include <array>
#include <limits>
#include <vector>

#include "stiffkrylov/arnoldi.hpp"

namespace stiffkrylov {

/// Moebius map lambda = g(mu) = (1 + gamma/mu)^{-1} and its inverse
/// mu = g1(lambda) = gamma*lambda/(1 - lambda). g maps the right half
/// plane into D(1/2, 1/2). g_inverse throws InfiniteShiftError at lambda=1.
Complex g_map(Complex mu, double gamma);
Complex g_inverse(Complex lambda, double gamma);

struct PruningPolicy {
    enum class Mode { none, prune };
    Mode mode = Mode::prune;
    double disk_margin = 1e-8;  // eigenvalues outside D(1/2, 1/2 + margin) discarded
    double floor = 1e-14;       // minimum |lambda| kept
};

struct PhiApplyInfo {
    int pruned_count = 0;
    bool eig_fallback = false;           // defective H, augmented-exponential route
    std::vector<Complex> pruned;         // discarded eigenvalues
};

/// Scalar maps evaluated at mu_inv = g1(lambda)^{-1} = (1/lambda - 1)/gamma
/// on the (possibly pruned) spectrum of H.
enum class SpectralFn {
    phi,            // phi_k(-t*mu_inv)
    phi_weighted,   // k=0: phi_0(-t*mu_inv); k>=1: mu_inv * phi_k(-t*mu_inv)
    exp_deriv,      // mu_inv * exp(-t*mu_inv)
    one_minus_exp   // 1 - exp(-t*mu_inv)
};

/// fn(H) * coeff through the eigen-decomposition of H, pruning spurious
/// eigenvalues per policy. Falls back to the augmented exponential of
/// (H^{-1}-I)/gamma (no pruning) when H is too defective.
Vec hessenberg_phi(const Mat& h, double gamma, double t, int k, const PruningPolicy& policy,
                   const Vec& coeff, SpectralFn fn = SpectralFn::phi_weighted,
                   PhiApplyInfo* info = nullptr);

/// Factorizations shared by every evaluation of one (system, gamma) pair.
struct StepContext {
    const DaeSystem* system;
    RangeProjector proj;
    ShiftedOperator op;
    SparseSolver gsolve;
};
StepContext make_step_context(const DaeSystem& system, double gamma);

/// Krylov bases for the three source terms x(0), G^{-1}u(0), G^{-1}u'(0).
/// term[k] indexes into ks; -1 marks a term with no range component.
struct KrylovBundle {
    std::vector<KrylovDecomposition> ks;
    std::array<int, 3> term{-1, -1, -1};
    bool combined = false;
    bool literal_route = false;  // seeds/coefficients use u directly, not G^{-1}u
};

KrylovBundle build_bases(const StepContext& ctx, int m_max, double tol,
                         bool combined = false, OrthoMode mode = OrthoMode::structured,
                         bool literal_route = false);

struct StepResult {
    Vec x_r, x_n, x_full;
    double t = 0;
    ResidualEstimate posterior;
    int pruned_count = 0;
    bool warning_unconverged = false;
};

/// x_a(t) = W{ f(H) W^T C x(0) + t f1(H) W^T C G^{-1}u(0) + t^2 f2(H) W^T C G^{-1}u'(0) }.
Vec assemble_xr(const KrylovBundle& bundle, const StepContext& ctx, double t,
                const PruningPolicy& policy, PhiApplyInfo* info = nullptr);
/// Single-basis form used by tests: one decomposition serves all three terms.
Vec assemble_xr(const KrylovDecomposition& K, const StepContext& ctx, double t,
                const PruningPolicy& policy, PhiApplyInfo* info = nullptr);

Vec derivative_xr(const KrylovBundle& bundle, const StepContext& ctx, double t,
                  const PruningPolicy& policy);
Vec derivative_xr(const KrylovDecomposition& K, const StepContext& ctx, double t,
                  const PruningPolicy& policy);

/// x(t) = G^{-1}u(t) - G^{-1}C dx_R/dt,  x_N = x - x_R.
StepResult complete_solution(const KrylovBundle& bundle, const StepContext& ctx, double t,
                             const PruningPolicy& policy);

struct SingleStepOptions {
    double gamma = -1.0;  // <= 0 selects gamma = h/2
    int m_max = 30;
    double tol = 1e-12;
    PruningPolicy policy;
    bool per_term = true;
    bool literal_route = false;
    OrthoMode mode = OrthoMode::structured;
    bool attach_posterior = false;
    double posterior_tol = std::numeric_limits<double>::infinity();
};

StepResult single_step(const DaeSystem& system, double h, const SingleStepOptions& opts = {});

}  // namespace stiffkrylov
