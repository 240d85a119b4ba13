#include "stiffkrylov/oracle.hpp"

#include <Eigen/Dense>

#include "stiffkrylov/dense.hpp"
#include "stiffkrylov/errors.hpp"

namespace stiffkrylov {

namespace {

Mat complement_basis(const RangeProjector& P) {
    const Index N = P.dim, n = P.n;
    if (n == N) return Mat(N, 0);
    if (P.diagonal_fast_path) {
        std::vector<char> in_range(static_cast<size_t>(N), 0);
        for (Index i : P.idx) in_range[static_cast<size_t>(i)] = 1;
        Mat vn = Mat::Zero(N, N - n);
        Index j = 0;
        for (Index i = 0; i < N; ++i) {
            if (!in_range[static_cast<size_t>(i)]) vn(i, j++) = 1.0;
        }
        return vn;
    }
    Mat vc = P.basis();
    Eigen::HouseholderQR<Mat> qr(vc);
    Mat q = qr.householderQ();
    return q.rightCols(N - n);
}

Mat real_phi(const Mat& a, int k) {
    if (k == 0) return expm_dense(a.cast<Complex>()).real();
    return phi_dense(a.cast<Complex>(), k).real();
}

}  // namespace

OracleContext make_oracle_context(const DaeSystem& system) {
    if (system.n_dim > 2000) {
        throw ValidationError("dense reference solutions are capped at dimension 2000");
    }
    RangeProjector proj = range_projector(system.C);
    if (proj.n == 0) {
        throw ValidationError("reference solution requires a nonzero C");
    }
    Mat vc = proj.basis();
    Mat vn = complement_basis(proj);
    Mat gd = Mat(system.G);
    Mat g1 = vc.transpose() * gd * vc;
    Mat g2 = vc.transpose() * gd * vn;
    Mat g3 = vn.transpose() * gd * vc;
    Mat g4 = vn.transpose() * gd * vn;
    Mat schur = g1;
    if (vn.cols() > 0) {
        Eigen::FullPivLU<Mat> lu(g4);
        if (!lu.isInvertible()) {
            throw NumericalError("algebraic block of G is singular; system is not index one");
        }
        schur.noalias() -= g2 * lu.solve(g3);
    }
    Mat a = proj.c1.cwiseInverse().asDiagonal() * schur;
    Vec c1 = proj.c1;
    return OracleContext{&system, std::move(proj), std::move(vc), std::move(vn),
                         std::move(c1), std::move(g1), std::move(g2), std::move(g3),
                         std::move(g4), std::move(a),
                         SparseSolver(system.G, "conductance matrix")};
}

namespace {

struct ReducedState {
    Vec y;   // dynamic coordinates at t
    Vec dy;  // their derivative
};

ReducedState reduced_evolution(const OracleContext& ctx, double t) {
    const DaeSystem& sys = *ctx.system;
    Vec y0 = ctx.vc.transpose() * sys.x0;
    Vec q1 = sys.u0.isZero(0.0) ? Vec(Vec::Zero(ctx.proj.n))
                                : Vec(ctx.vc.transpose() * ctx.gsolve.solve(sys.u0));
    Vec q2 = sys.u1.isZero(0.0) ? Vec(Vec::Zero(ctx.proj.n))
                                : Vec(ctx.vc.transpose() * ctx.gsolve.solve(sys.u1));
    Mat ta = -t * ctx.a;
    Mat e = real_phi(ta, 0);
    Vec y = e * y0;
    if (!q1.isZero(0.0)) y.noalias() += t * (ctx.a * (real_phi(ta, 1) * q1));
    if (!q2.isZero(0.0)) y.noalias() += (t * t) * (ctx.a * (real_phi(ta, 2) * q2));
    // y' = -A y + A (q1 + t q2)
    Vec dy = ctx.a * (q1 + t * q2 - y);
    return {std::move(y), std::move(dy)};
}

}  // namespace

Vec exact_projected(const OracleContext& ctx, double t) {
    return ctx.vc * reduced_evolution(ctx, t).y;
}

StepResult exact_solution(const OracleContext& ctx, double t) {
    const DaeSystem& sys = *ctx.system;
    ReducedState st = reduced_evolution(ctx, t);
    StepResult res;
    res.t = t;
    res.x_r = ctx.vc * st.y;
    Vec dxr = ctx.vc * st.dy;
    res.x_full = ctx.gsolve.solve(sys.u_at(t) - sys.C * dxr);
    res.x_n = res.x_full - res.x_r;
    return res;
}

Vec exact_algebraic(const OracleContext& ctx, const Vec& x_r, double t) {
    const DaeSystem& sys = *ctx.system;
    if (ctx.vn.cols() == 0) return Vec::Zero(sys.n_dim);
    Vec rhs = ctx.vn.transpose() * (sys.u_at(t) - sys.G * x_r);
    Vec x2 = ctx.g4.fullPivLu().solve(rhs);
    return ctx.vn * x2;
}

Vec decoupled_reference(const OracleContext& ctx, double t) {
    const DaeSystem& sys = *ctx.system;
    const Index n = ctx.proj.n;
    Vec c1inv = ctx.proj.c1.cwiseInverse();
    auto forcing = [&](const Vec& u) {
        Vec f = ctx.vc.transpose() * u;
        if (ctx.vn.cols() > 0) {
            f.noalias() -= ctx.g2 * ctx.g4.fullPivLu().solve(Vec(ctx.vn.transpose() * u));
        }
        return f;
    };
    Vec f0 = forcing(sys.u0);
    Vec f1 = forcing(sys.u1);
    Vec y0 = ctx.vc.transpose() * sys.x0;
    Mat ta = -t * ctx.a;
    Vec y = real_phi(ta, 0) * y0;
    if (!f0.isZero(0.0)) y.noalias() += t * (real_phi(ta, 1) * Vec(c1inv.cwiseProduct(f0)));
    if (!f1.isZero(0.0)) {
        y.noalias() += (t * t) * (real_phi(ta, 2) * Vec(c1inv.cwiseProduct(f1)));
    }
    Vec x = ctx.vc * y;
    x += exact_algebraic(ctx, x, t);
    return x;
}

namespace {

Vec backward_euler(const DaeSystem& sys, double t, int n) {
    double dt = t / n;
    SpMat lhs = sys.G + SpMat((1.0 / dt) * sys.C);
    SparseSolver solver(lhs, "implicit step matrix");
    Vec x = sys.x0;
    for (int j = 1; j <= n; ++j) {
        x = solver.solve(Vec((1.0 / dt) * (sys.C * x) + sys.u_at(dt * j)));
    }
    return x;
}

}  // namespace

Vec backward_euler_reference(const DaeSystem& system, double t, int n_steps) {
    if (n_steps < 1) throw ValidationError("backward_euler_reference needs at least one step");
    if (!(t > 0.0)) throw ValidationError("backward_euler_reference needs a positive time");
    return backward_euler(system, t, n_steps);
}

Vec fine_step_reference(const DaeSystem& system, double t, int n_steps) {
    if (n_steps < 1) throw ValidationError("fine_step_reference needs at least one step");
    if (!(t > 0.0)) throw ValidationError("fine_step_reference needs a positive time");
    Vec coarse = backward_euler(system, t, n_steps);
    Vec fine = backward_euler(system, t, 2 * n_steps);
    return 2.0 * fine - coarse;
}

}  // namespace stiffkrylov
