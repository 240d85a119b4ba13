#include "stiffkrylov/arnoldi.hpp"

#include <cmath>

#include "stiffkrylov/dense.hpp"
#include "stiffkrylov/errors.hpp"
#include "stiffkrylov/io.hpp"

namespace stiffkrylov {

namespace {

Mat real_inverse(const Mat& h, const char* who) {
    Eigen::FullPivLU<Mat> lu(h);
    if (!lu.isInvertible()) {
        throw NumericalError(std::string(who) + ": H_m is numerically singular "
                             "(loss of passivity; prune or reduce m)");
    }
    return lu.inverse();
}

Mat real_expm(const Mat& a) {
    return expm_dense(a.cast<Complex>()).real();
}

}  // namespace

ShiftedOperator::ShiftedOperator(const DaeSystem& system, double gamma)
    : system_(&system),
      gamma_(gamma),
      solver_(SpMat(system.C + gamma * system.G), "C+gamma*G") {
    if (!(gamma > 0)) throw NumericalError("ShiftedOperator: gamma must be positive");
}

Vec reorthogonalize_pass(const Mat& basis, int j, Vec w, const SpMat& C, Vec* coeffs) {
    const Vec cw = C * w;
    for (int i = 0; i < j; ++i) {
        const double c = basis.col(i).dot(cw);
        w -= c * basis.col(i);
        if (coeffs) (*coeffs)(i) += c;
    }
    return w;
}

KrylovDecomposition c_arnoldi(const ShiftedOperator& op, const RangeProjector& P,
                              const Vec& v, const ArnoldiOptions& opts) {
    const DaeSystem& sys = op.system();
    const bool structured = opts.mode == OrthoMode::structured;

    auto cnorm = [&](const Vec& x) {
        if (!structured) return x.norm();
        const double q = x.dot(sys.C * x);
        return q > 0 ? std::sqrt(q) : 0.0;
    };

    KrylovDecomposition K;
    K.gamma = op.gamma();
    K.mode = opts.mode;

    Vec w = P.apply(v);
    K.beta0 = cnorm(w);
    if (K.beta0 <= opts.tol * std::max(v.norm(), 1e-300)) {
        throw NumericalError("c_arnoldi: initial vector has no range component");
    }

    const int m_max = opts.m_max;
    Mat basis(sys.n_dim, m_max + 1);
    Mat h = Mat::Zero(m_max + 1, m_max);
    basis.col(0) = w / K.beta0;

    int m = 0;
    for (int j = 0; j < m_max; ++j) {
        w = op.solve(sys.C * basis.col(j));
        if (structured && opts.project_each_step) w = P.apply(w);

        if (structured) {
            Vec cw = sys.C * w;
            for (int i = 0; i <= j; ++i) {
                h(i, j) = basis.col(i).dot(cw);
                w -= h(i, j) * basis.col(i);
                cw = sys.C * w;  // keep MGS exact in the C product
            }
            Vec hj = h.col(j).head(j + 1);
            w = reorthogonalize_pass(basis, j + 1, w, sys.C, &hj);
            h.col(j).head(j + 1) = hj;
        } else {
            for (int i = 0; i <= j; ++i) {
                h(i, j) = basis.col(i).dot(w);
                w -= h(i, j) * basis.col(i);
            }
            // second pass
            for (int i = 0; i <= j; ++i) {
                const double c = basis.col(i).dot(w);
                w -= c * basis.col(i);
                h(i, j) += c;
            }
        }

        h(j + 1, j) = cnorm(w);
        m = j + 1;
        if (h(j + 1, j) <= opts.tol * K.beta0) {
            K.breakdown = true;
            K.h_tail = 0.0;
            K.w_next = Vec::Zero(sys.n_dim);
            break;
        }
        basis.col(j + 1) = w / h(j + 1, j);
        if (j + 1 == m_max) {
            K.h_tail = h(j + 1, j);
            K.w_next = basis.col(j + 1);
        }
    }

    K.m = m;
    K.w = basis.leftCols(m);
    K.h = h.topLeftCorner(m, m);
    if (!K.breakdown && K.w_next.size() == 0) {
        K.h_tail = h(m, m - 1);
        K.w_next = basis.col(m);
    }
    return K;
}

double residual_beta(const KrylovDecomposition& K, double t, const Vec& rhs_coeff) {
    if (K.m == 0) return 0.0;
    if (K.h_tail == 0.0) return 0.0;
    const Mat hinv = real_inverse(K.h, "residual_beta");
    const Mat exp_arg = -(t / K.gamma) * (hinv - Mat::Identity(K.m, K.m));
    const Vec y = real_expm(exp_arg) * rhs_coeff;
    const Vec z = hinv * y;
    return K.h_tail / K.gamma * z(K.m - 1);
}

ResidualEstimate posterior_bound(const KrylovDecomposition& K, const RangeProjector& P,
                                 const ReducedOperators* ops, double t,
                                 const Vec& rhs_coeff) {
    ResidualEstimate est;
    if (K.h_tail == 0.0 || K.m == 0) return est;

    // sup over a 33-point Chebyshev grid in [0,1]
    for (int i = 0; i <= 32; ++i) {
        const double theta = 0.5 * (1.0 + std::cos(M_PI * i / 32.0));
        est.beta_sup = std::max(est.beta_sup, std::abs(residual_beta(K, t * theta, rhs_coeff)));
    }

    if (!ops) {
        est.heuristic = true;
        est.posterior_bound = t * est.beta_sup;
        return est;
    }

    const Index n = ops->b11.rows();
    const Mat b11_inv = real_inverse(ops->b11, "posterior_bound");
    const Vec sqrt_c1 = ops->c1.cwiseSqrt();
    const Mat m_c1 = sqrt_c1.asDiagonal() * b11_inv * sqrt_c1.cwiseInverse().asDiagonal();

    const auto eig = eig_dense(m_c1.cast<Complex>());
    est.cond_k = cond2(eig.vectors);

    // The symmetric part gives two omega candidates; keep whichever makes
    // ||exp(-s B11^{-1})||_{C1} <= K exp(-s omega) hold on a t-grid, preferring
    // the tighter (largest) one.
    Eigen::SelfAdjointEigenSolver<Mat> sym_es(0.5 * (m_c1 + m_c1.transpose()));
    const double omega_small = sym_es.eigenvalues().minCoeff();
    const double omega_large = sym_es.eigenvalues().maxCoeff();
    auto valid = [&](double omega) {
        for (int i = 1; i <= 8; ++i) {
            const double s = t * i / 8.0;
            const double lhs = real_expm(-s * m_c1).operatorNorm();
            if (lhs > est.cond_k * std::exp(-s * omega) * (1.0 + 1e-10)) return false;
        }
        return true;
    };
    if (valid(omega_large)) {
        est.omega = omega_large;
        est.omega_choice = "largest";
    } else if (valid(omega_small)) {
        est.omega = omega_small;
        est.omega_choice = "smallest";
    } else {
        est.omega = std::min(omega_small, 0.0);
        est.omega_choice = "fallback";
    }

    const Vec vtw = P.vt_apply(K.w_next);
    const Vec dir = (Mat::Identity(n, n) + K.gamma * b11_inv) * vtw;
    est.residual_direction_norm = std::sqrt(dir.dot(ops->c1.asDiagonal() * dir));

    const double phi1 = std::real(phi_scalar(Complex(-t * est.omega, 0.0), 1));
    est.posterior_bound =
        est.cond_k * t * phi1 * est.residual_direction_norm * est.beta_sup;
    return est;
}

void dump_decomposition(const KrylovDecomposition& K, const std::string& dir) {
    write_csv_matrix(dir + "/H.csv", K.h);
    write_matrix_market_dense(dir + "/W.mtx", K.w);
    write_json_file(dir + "/meta.json",
                    {{"gamma", K.gamma},
                     {"m", K.m},
                     {"beta0", K.beta0},
                     {"breakdown", K.breakdown},
                     {"h_tail", K.h_tail}});
}

}  // namespace stiffkrylov
