#include <doctest.h>

#include <cmath>
#include <random>

#include "stiffkrylov/dense.hpp"
#include "stiffkrylov/errors.hpp"
#include "stiffkrylov/evolve.hpp"
#include "stiffkrylov/mna.hpp"
#include "stiffkrylov/netlist.hpp"
#include "stiffkrylov/oracle.hpp"
#include "testutil.hpp"

using namespace stiffkrylov;
using namespace testutil;

TEST_CASE("Moebius map and its inverse") {
    const double gamma = 0.7;
    for (Complex mu : {Complex(2.0, 0.0), Complex(0.3, -1.1), Complex(1e6, 1.0)}) {
        Complex lam = g_map(mu, gamma);
        CHECK(std::abs(g_inverse(lam, gamma) - mu) < 1e-9 * std::abs(mu));
        // Right half plane lands in D(1/2, 1/2).
        CHECK(std::abs(lam - 0.5) <= 0.5 + 1e-14);
    }
    CHECK_THROWS_AS(g_inverse(Complex(1.0, 0.0), 0.7), InfiniteShiftError);
}

TEST_CASE("Hessenberg spectral maps agree with dense matrix functions") {
    DaeSystem sys = definite_system(30, 22, 19);
    auto P = range_projector(sys.C);
    const double gamma = 0.35;
    ShiftedOperator op(sys, gamma);
    ArnoldiOptions aopts;
    aopts.m_max = 8;
    KrylovDecomposition K = c_arnoldi(op, P, P.apply(sys.x0), aopts);
    REQUIRE_FALSE(K.breakdown);

    const double t = 0.6;
    Vec coeff = Vec::Zero(K.m);
    coeff(0) = K.beta0;
    Mat m = (K.h.inverse() - Mat::Identity(K.m, K.m)) / gamma;
    CMat mt = (-t * m).cast<Complex>();
    PruningPolicy none;
    none.mode = PruningPolicy::Mode::none;

    for (int k = 0; k <= 2; ++k) {
        Vec got = hessenberg_phi(K.h, gamma, t, k, none, coeff, SpectralFn::phi);
        Vec ref = phi_dense(mt, k).real() * coeff;
        CHECK((got - ref).norm() < 1e-9 * (1.0 + ref.norm()));

        Vec gotw = hessenberg_phi(K.h, gamma, t, k, none, coeff, SpectralFn::phi_weighted);
        Vec refw = k == 0 ? ref : Vec(m * ref);
        CHECK((gotw - refw).norm() < 1e-9 * (1.0 + refw.norm()));
    }

    Vec gd = hessenberg_phi(K.h, gamma, t, 0, none, coeff, SpectralFn::exp_deriv);
    Vec rd = m * (phi_dense(mt, 0).real() * coeff);
    CHECK((gd - rd).norm() < 1e-9 * (1.0 + rd.norm()));

    Vec go = hessenberg_phi(K.h, gamma, t, 0, none, coeff, SpectralFn::one_minus_exp);
    Vec ro = coeff - phi_dense(mt, 0).real() * coeff;
    CHECK((go - ro).norm() < 1e-9 * (1.0 + ro.norm()));
}

TEST_CASE("pruning discards eigenvalues outside the stability disk") {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = 0.5;
    h(1, 1) = 1.2;  // well outside D(1/2, 1/2)
    Vec coeff(2);
    coeff << 1.0, 1.0;
    PruningPolicy prune;
    PhiApplyInfo info;
    const double gamma = 0.5, t = 0.4;
    Vec got = hessenberg_phi(h, gamma, t, 0, prune, coeff, SpectralFn::phi, &info);
    CHECK(info.pruned_count == 1);
    const double mu_inv = (1.0 / 0.5 - 1.0) / gamma;
    CHECK(got(0) == doctest::Approx(std::exp(-t * mu_inv)));
    CHECK(got(1) == doctest::Approx(0.0));

    h(1, 1) = 1e-20;  // below the magnitude floor
    PhiApplyInfo info2;
    hessenberg_phi(h, gamma, t, 0, prune, coeff, SpectralFn::phi, &info2);
    CHECK(info2.pruned_count == 1);
}

TEST_CASE("single resistor-capacitor circuit matches the closed form") {
    Netlist nl = parse_netlist(
        "* rc charging\n"
        "r1 1 0 2.0\n"
        "c1 1 0 0.5\n"
        "i1 0 1 DC 1.0\n");
    DaeSystem sys = stamp_mna(nl).system;
    REQUIRE(sys.n_dim == 1);
    const double h = 0.3;
    StepResult res = single_step(sys, h);
    const double expected = 2.0 * (1.0 - std::exp(-h));  // R*I*(1 - e^{-t/RC}), RC = 1
    CHECK(res.x_full(0) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("equilibrium state stays put") {
    DaeSystem sys = definite_system(16, 16, 64);
    sys.u1.setZero();
    sys.x0 = Mat(sys.G).fullPivLu().solve(sys.u0);
    StepResult res = single_step(sys, 0.8);
    CHECK((res.x_full - sys.x0).norm() < 1e-9 * (1.0 + sys.x0.norm()));
}

TEST_CASE("per-term bases skip terms without range component") {
    DaeSystem sys = definite_system(20, 12, 5);
    sys.x0.setZero();
    sys.u0.setZero();
    StepContext ctx = make_step_context(sys, 0.2);
    KrylovBundle b = build_bases(ctx, 10, 1e-12);
    CHECK(b.term[0] == -1);
    CHECK(b.term[1] == -1);
    CHECK(b.term[2] >= 0);
}

TEST_CASE("single step agrees with the dense reference at breakdown") {
    for (uint64_t seed : {201u, 202u, 203u}) {
        DaeSystem sys = definite_system(40, 18, seed);
        OracleContext octx = make_oracle_context(sys);
        const double h = 0.5;
        SingleStepOptions opts;
        opts.m_max = 25;  // above rank(C): every term hits happy breakdown
        StepResult got = single_step(sys, h, opts);
        StepResult ref = exact_solution(octx, h);
        CHECK((got.x_r - ref.x_r).norm() < 1e-8 * (1.0 + ref.x_r.norm()));
        CHECK((got.x_full - ref.x_full).norm() < 1e-8 * (1.0 + ref.x_full.norm()));
    }
}

TEST_CASE("literal assembly route reaches the same solution") {
    DaeSystem sys = definite_system(30, 14, 321);
    OracleContext octx = make_oracle_context(sys);
    const double h = 0.4;
    SingleStepOptions opts;
    opts.m_max = 20;
    opts.literal_route = true;
    StepResult got = single_step(sys, h, opts);
    StepResult ref = exact_solution(octx, h);
    CHECK((got.x_full - ref.x_full).norm() < 1e-8 * (1.0 + ref.x_full.norm()));
}

TEST_CASE("completed solution satisfies the algebraic constraints") {
    DaeSystem sys = definite_system(26, 12, 88);
    auto P = range_projector(sys.C);
    const double h = 0.25;
    SingleStepOptions opts;
    opts.m_max = 20;
    StepResult res = single_step(sys, h, opts);
    Vec r = sys.G * res.x_full - sys.u_at(h);
    Vec off = r - P.apply(r);  // kernel-of-C rows must balance exactly
    CHECK(off.norm() < 1e-9 * (1.0 + r.norm()));
    CHECK((res.x_r + res.x_n - res.x_full).norm() < 1e-12 * (1.0 + res.x_full.norm()));
}

TEST_CASE("posterior attachment and the convergence warning") {
    DaeSystem sys = definite_system(30, 20, 555);
    SingleStepOptions opts;
    opts.m_max = 4;  // far from converged
    opts.attach_posterior = true;
    opts.posterior_tol = 0.0;
    StepResult res = single_step(sys, 0.5, opts);
    CHECK(res.posterior.posterior_bound > 0.0);
    CHECK(res.warning_unconverged);
}
