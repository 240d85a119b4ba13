#include "stiffkrylov/evolve.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "stiffkrylov/dense.hpp"
#include "stiffkrylov/errors.hpp"

namespace stiffkrylov {

Complex g_map(Complex mu, double gamma) {
    if (mu == Complex(0.0, 0.0)) return Complex(0.0, 0.0);
    return mu / (mu + gamma);
}

Complex g_inverse(Complex lambda, double gamma) {
    Complex denom = Complex(1.0, 0.0) - lambda;
    if (std::abs(denom) < 1e-300) {
        throw InfiniteShiftError("g_inverse: lambda = 1 maps to an infinite shift");
    }
    return gamma * lambda / denom;
}

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Complex eval_scalar(Complex lambda, double gamma, double t, int k, SpectralFn fn) {
    if (std::abs(lambda) < 1e-300) {
        // mu_inv -> +inf limits
        switch (fn) {
            case SpectralFn::phi: return 0.0;
            case SpectralFn::phi_weighted:
                if (k == 0 || t <= 0.0) return 0.0;
                return 1.0 / (factorial(k - 1) * t);
            case SpectralFn::exp_deriv: return 0.0;
            case SpectralFn::one_minus_exp: return 1.0;
        }
    }
    Complex mu_inv = (1.0 / lambda - 1.0) / gamma;
    Complex z = -t * mu_inv;
    switch (fn) {
        case SpectralFn::phi: return phi_scalar(z, k);
        case SpectralFn::phi_weighted:
            if (k == 0) return phi_scalar(z, 0);
            return mu_inv * phi_scalar(z, k);
        case SpectralFn::exp_deriv: return mu_inv * std::exp(z);
        case SpectralFn::one_minus_exp: return 1.0 - std::exp(z);
    }
    return 0.0;  // unreachable
}

// Augmented-exponential evaluation on M = (H^{-1} - I)/gamma, used when the
// Hessenberg eigenbasis is too ill conditioned to trust.
Vec defective_fallback(const Mat& h, double gamma, double t, int k, const Vec& coeff,
                       SpectralFn fn) {
    Eigen::FullPivLU<Mat> lu(h);
    if (!lu.isInvertible()) {
        throw NumericalError("hessenberg_phi: singular Hessenberg matrix in fallback path");
    }
    const Index m = h.rows();
    Mat minv = lu.inverse();
    Mat M = (minv - Mat::Identity(m, m)) / gamma;
    CMat Mc = (-t * M).cast<Complex>();
    Mat result;
    switch (fn) {
        case SpectralFn::phi:
            result = phi_dense(Mc, k).real();
            break;
        case SpectralFn::phi_weighted:
            if (k == 0) {
                result = expm_dense(Mc).real();
            } else {
                result = M * phi_dense(Mc, k).real();
            }
            break;
        case SpectralFn::exp_deriv:
            result = M * expm_dense(Mc).real();
            break;
        case SpectralFn::one_minus_exp:
            result = Mat::Identity(m, m) - expm_dense(Mc).real();
            break;
    }
    return result * coeff;
}

}  // namespace

Vec hessenberg_phi(const Mat& h, double gamma, double t, int k, const PruningPolicy& policy,
                   const Vec& coeff, SpectralFn fn, PhiApplyInfo* info) {
    const Index m = h.rows();
    if (m == 0) return Vec();
    if (coeff.size() != m) {
        throw ValidationError("hessenberg_phi: coefficient length does not match matrix size");
    }
    EigResult eig;
    double conditioning = std::numeric_limits<double>::infinity();
    bool eig_ok = false;
    try {
        eig = eig_dense(h.cast<Complex>());
        conditioning = cond2(eig.vectors);
        eig_ok = std::isfinite(conditioning) && conditioning < 1e12;
    } catch (const NumericalError&) {
        eig_ok = false;
    }
    if (!eig_ok) {
        if (info) info->eig_fallback = true;
        return defective_fallback(h, gamma, t, k, coeff, fn);
    }

    CVec y = eig.vectors.fullPivLu().solve(coeff.cast<Complex>());
    const bool prune = policy.mode == PruningPolicy::Mode::prune;
    for (Index i = 0; i < m; ++i) {
        Complex lambda = eig.values(i);
        bool outside = std::abs(lambda - Complex(0.5, 0.0)) > 0.5 + policy.disk_margin;
        bool tiny = std::abs(lambda) < policy.floor;
        if (prune && (outside || tiny)) {
            y(i) = 0.0;
            if (info) {
                info->pruned_count += 1;
                info->pruned.push_back(lambda);
            }
            continue;
        }
        y(i) *= eval_scalar(lambda, gamma, t, k, fn);
    }
    return (eig.vectors * y).real();
}

StepContext make_step_context(const DaeSystem& system, double gamma) {
    if (!(gamma > 0.0)) {
        throw ValidationError("step context requires a positive shift");
    }
    return StepContext{&system, range_projector(system.C), ShiftedOperator(system, gamma),
                       SparseSolver(system.G, "conductance matrix")};
}

namespace {

std::array<Vec, 3> seed_vectors(const StepContext& ctx, bool literal_route) {
    const DaeSystem& sys = *ctx.system;
    std::array<Vec, 3> v;
    v[0] = sys.x0;
    if (literal_route) {
        v[1] = sys.u0;
        v[2] = sys.u1;
    } else {
        v[1] = sys.u0.isZero(0.0) ? Vec(Vec::Zero(sys.n_dim)) : ctx.gsolve.solve(sys.u0);
        v[2] = sys.u1.isZero(0.0) ? Vec(Vec::Zero(sys.n_dim)) : ctx.gsolve.solve(sys.u1);
    }
    return v;
}

double c_seminorm(const StepContext& ctx, const Vec& v) {
    Vec pv = ctx.proj.apply(v);
    double s = pv.dot(ctx.system->C * pv);
    return s > 0.0 ? std::sqrt(s) : 0.0;
}

}  // namespace

KrylovBundle build_bases(const StepContext& ctx, int m_max, double tol, bool combined,
                         OrthoMode mode, bool literal_route) {
    KrylovBundle bundle;
    bundle.literal_route = literal_route;
    auto seeds = seed_vectors(ctx, literal_route);
    ArnoldiOptions opts;
    opts.m_max = m_max;
    opts.tol = tol;
    opts.mode = mode;

    const Vec& c1 = ctx.proj.c1;
    double scale = c1.size() > 0 ? c1.maxCoeff() : 1.0;
    auto has_range_part = [&](const Vec& v) {
        return c_seminorm(ctx, v) > 1e-150 * std::max(1.0, std::sqrt(scale));
    };

    if (combined) {
        Vec sum = seeds[0] + seeds[1] + seeds[2];
        if (has_range_part(sum)) {
            bundle.ks.push_back(c_arnoldi(ctx.op, ctx.proj, sum, opts));
            bundle.combined = true;
            for (int k = 0; k < 3; ++k) {
                if (has_range_part(seeds[k])) bundle.term[k] = 0;
            }
            return bundle;
        }
        // Cancellation between terms: fall through to per-term bases.
    }
    for (int k = 0; k < 3; ++k) {
        if (!has_range_part(seeds[k])) continue;
        bundle.term[k] = static_cast<int>(bundle.ks.size());
        bundle.ks.push_back(c_arnoldi(ctx.op, ctx.proj, seeds[k], opts));
    }
    return bundle;
}

Vec assemble_xr(const KrylovBundle& bundle, const StepContext& ctx, double t,
                const PruningPolicy& policy, PhiApplyInfo* info) {
    const DaeSystem& sys = *ctx.system;
    Vec x = Vec::Zero(sys.n_dim);
    auto seeds = seed_vectors(ctx, bundle.literal_route);
    const double prefac[3] = {1.0, t, t * t};
    for (int k = 0; k < 3; ++k) {
        int idx = bundle.term[k];
        if (idx < 0 || prefac[k] == 0.0) continue;
        const KrylovDecomposition& K = bundle.ks[static_cast<size_t>(idx)];
        Vec q = K.w.transpose() * (sys.C * seeds[k]);
        Vec y = hessenberg_phi(K.h, K.gamma, t, k, policy, q, SpectralFn::phi_weighted, info);
        x.noalias() += prefac[k] * (K.w * y);
    }
    return x;
}

Vec assemble_xr(const KrylovDecomposition& K, const StepContext& ctx, double t,
                const PruningPolicy& policy, PhiApplyInfo* info) {
    KrylovBundle bundle;
    bundle.ks.push_back(K);
    bundle.term = {0, 0, 0};
    bundle.combined = true;
    return assemble_xr(bundle, ctx, t, policy, info);
}

Vec derivative_xr(const KrylovBundle& bundle, const StepContext& ctx, double t,
                  const PruningPolicy& policy) {
    const DaeSystem& sys = *ctx.system;
    Vec d = Vec::Zero(sys.n_dim);
    std::array<Vec, 3> a;
    a[0] = -sys.x0;
    a[1] = sys.u0.isZero(0.0) ? Vec(Vec::Zero(sys.n_dim)) : ctx.gsolve.solve(sys.u0);
    a[2] = sys.u1.isZero(0.0) ? Vec(Vec::Zero(sys.n_dim)) : ctx.gsolve.solve(sys.u1);
    const SpectralFn fn[3] = {SpectralFn::exp_deriv, SpectralFn::exp_deriv,
                              SpectralFn::one_minus_exp};
    for (int k = 0; k < 3; ++k) {
        int idx = bundle.term[k];
        if (idx < 0) continue;
        const KrylovDecomposition& K = bundle.ks[static_cast<size_t>(idx)];
        Vec q = K.w.transpose() * (sys.C * a[k]);
        if (q.lpNorm<Eigen::Infinity>() == 0.0) continue;
        Vec y = hessenberg_phi(K.h, K.gamma, t, 0, policy, q, fn[k], nullptr);
        d.noalias() += K.w * y;
    }
    return d;
}

Vec derivative_xr(const KrylovDecomposition& K, const StepContext& ctx, double t,
                  const PruningPolicy& policy) {
    KrylovBundle bundle;
    bundle.ks.push_back(K);
    bundle.term = {0, 0, 0};
    bundle.combined = true;
    return derivative_xr(bundle, ctx, t, policy);
}

StepResult complete_solution(const KrylovBundle& bundle, const StepContext& ctx, double t,
                             const PruningPolicy& policy) {
    const DaeSystem& sys = *ctx.system;
    StepResult res;
    res.t = t;
    PhiApplyInfo info;
    res.x_r = assemble_xr(bundle, ctx, t, policy, &info);
    res.pruned_count = info.pruned_count;
    Vec dxr = derivative_xr(bundle, ctx, t, policy);
    Vec rhs = sys.u_at(t) - sys.C * dxr;
    res.x_full = ctx.gsolve.solve(rhs);
    res.x_n = res.x_full - res.x_r;
    return res;
}

StepResult single_step(const DaeSystem& system, double h, const SingleStepOptions& opts) {
    if (!(h > 0.0)) throw ValidationError("step size must be positive");
    double gamma = opts.gamma > 0.0 ? opts.gamma : h / 2.0;
    StepContext ctx = make_step_context(system, gamma);
    KrylovBundle bundle = build_bases(ctx, opts.m_max, opts.tol, !opts.per_term, opts.mode,
                                      opts.literal_route);
    StepResult res = complete_solution(bundle, ctx, h, opts.policy);

    if (opts.attach_posterior && !bundle.ks.empty()) {
        ReducedOperators ops;
        const ReducedOperators* ops_ptr = nullptr;
        if (system.n_dim <= 2000) {
            ops = reduced_operators(system, ctx.proj, gamma);
            ops_ptr = &ops;
        }
        auto seeds = seed_vectors(ctx, bundle.literal_route);
        const double prefac[3] = {1.0, h, h * h};
        bool all_breakdown = true;
        bool first = true;
        double total = 0.0, beta_total = 0.0;
        for (int k = 0; k < 3; ++k) {
            int idx = bundle.term[k];
            if (idx < 0) continue;
            const KrylovDecomposition& K = bundle.ks[static_cast<size_t>(idx)];
            all_breakdown = all_breakdown && K.breakdown;
            if (K.breakdown) continue;
            Vec q = K.w.transpose() * (system.C * seeds[k]);
            ResidualEstimate est = posterior_bound(K, ctx.proj, ops_ptr, h, q);
            total += prefac[k] * est.posterior_bound;
            beta_total += prefac[k] * est.beta_sup;
            if (first) {
                res.posterior = est;
                first = false;
            }
        }
        res.posterior.posterior_bound = total;
        res.posterior.beta_sup = beta_total;
        if (!all_breakdown && total > opts.posterior_tol) {
            res.warning_unconverged = true;
        }
    }
    return res;
}

}  // namespace stiffkrylov
