#pragma once

#include "stiffkrylov/evolve.hpp"

namespace stiffkrylov {

/// Dense reference machinery: orthonormal bases for range(C) and its
/// complement, the G blocks in that basis, and the reduced generator
/// A = C1^{-1}(G1 - G2 G4^{-1} G3). Capped at dimension 2000.
struct OracleContext {
    const DaeSystem* system;
    RangeProjector proj;
    Mat vc;      // N x n basis of range(C)
    Mat vn;      // N x (N-n) complement basis
    Vec c1;      // nonzero eigenvalues of C
    Mat g1, g2, g3, g4;
    Mat a;       // reduced generator (n x n)
    SparseSolver gsolve;
};

OracleContext make_oracle_context(const DaeSystem& system);

/// Dynamic part by dense matrix functions of the reduced generator:
/// y(t) = e^{-tA} y0 + t A phi1(-tA) q1 + t^2 A phi2(-tA) q2 with
/// q_k = V_C^T G^{-1} u-coefficients. Returns V_C y.
Vec exact_projected(const OracleContext& ctx, double t);

/// Full solution split derived from exact_projected and the derivative of y.
StepResult exact_solution(const OracleContext& ctx, double t);

/// Algebraic completion of a given dynamic part:
/// x_N = V_N (V_N^T G V_N)^{-1} V_N^T (u(t) - G x_r).
Vec exact_algebraic(const OracleContext& ctx, const Vec& x_r, double t);

/// Independent route through the block-decoupled equations:
/// C1 y' + (G1 - G2 G4^{-1} G3) y = f(t), then the algebraic back-solve.
/// Returns the full state x(t).
Vec decoupled_reference(const OracleContext& ctx, double t);

/// Plain backward Euler over n equal steps.
Vec backward_euler_reference(const DaeSystem& system, double t, int n_steps);

/// Backward Euler with n and 2n steps, Richardson-extrapolated (order 1).
Vec fine_step_reference(const DaeSystem& system, double t, int n_steps);

}  // namespace stiffkrylov
