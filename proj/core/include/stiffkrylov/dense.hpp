#pragma once

#include "stiffkrylov/types.hpp"

namespace stiffkrylov {

/// exp(A) by Pade scaling-and-squaring (degree 13).
/// Throws NumericalError on non-square input or overflow.
CMat expm_dense(const CMat& A);

/// phi_k(A) through the augmented block exponential
///   exp([A I; 0 J]) with J the k x k nilpotent shift,
/// so the result is valid for singular A. phi_0 = exp.
CMat phi_dense(const CMat& A, int k);

/// Scalar phi_k. Truncated Taylor series below |z| = 0.25, the
/// recurrence phi_{k}(z) = (phi_{k-1}(z) - 1/(k-1)!)/z above it.
Complex phi_scalar(Complex z, int k);

struct EigResult {
    CVec values;
    CMat vectors;  // unit-normalized columns
};

/// General complex eigen-decomposition with a residual check.
EigResult eig_dense(const CMat& A);

/// 2-norm condition number via SVD.
double cond2(const CMat& A);

}  // namespace stiffkrylov
