#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "stiffkrylov/arnoldi.hpp"
#include "stiffkrylov/dense.hpp"
#include "stiffkrylov/errors.hpp"
#include "testutil.hpp"

using namespace stiffkrylov;
using namespace testutil;

namespace {

Mat dense_propagation_operator(const DaeSystem& sys, const RangeProjector& P,
                               const ShiftedOperator& op) {
    Mat s(sys.n_dim, sys.n_dim);
    for (Index j = 0; j < sys.n_dim; ++j) {
        Vec e = Vec::Zero(sys.n_dim);
        e(j) = 1.0;
        s.col(j) = P.apply(op.solve(op.apply_c(e)));
    }
    return s;
}

}  // namespace

TEST_CASE("structured Arnoldi invariants on a definite system") {
    DaeSystem sys = definite_system(35, 24, 101);
    auto P = range_projector(sys.C);
    ShiftedOperator op(sys, 0.4);
    std::mt19937_64 rng(3);
    Vec v = randn_vec(35, rng);

    ArnoldiOptions opts;
    opts.m_max = 12;
    KrylovDecomposition K = c_arnoldi(op, P, v, opts);
    REQUIRE(K.m == 12);
    CHECK(K.beta0 == doctest::Approx(c_norm(sys.C, P.apply(v))));

    // Basis is orthonormal in the C inner product.
    Mat gram = K.w.transpose() * Mat(sys.C) * K.w;
    CHECK((gram - Mat::Identity(K.m, K.m)).cwiseAbs().maxCoeff() < 1e-10);

    // Upper Hessenberg.
    for (int i = 0; i < K.m; ++i)
        for (int j = 0; j < i - 1; ++j) CHECK(K.h(i, j) == 0.0);

    // S W = W H + h_tail w_next e_m^T.
    Mat s = dense_propagation_operator(sys, P, op);
    Mat resid = s * K.w - K.w * K.h;
    resid.col(K.m - 1) -= K.h_tail * K.w_next;
    CHECK(resid.norm() < 1e-9 * s.norm());

    // Next vector continues the C-orthonormal family.
    CHECK(c_norm(sys.C, K.w_next) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((K.w.transpose() * (sys.C * K.w_next)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("plain mode keeps Euclidean orthonormality instead") {
    DaeSystem sys = definite_system(30, 30, 55);
    auto P = range_projector(sys.C);
    ShiftedOperator op(sys, 0.1);
    std::mt19937_64 rng(9);
    ArnoldiOptions opts;
    opts.m_max = 10;
    opts.mode = OrthoMode::plain;
    KrylovDecomposition K = c_arnoldi(op, P, randn_vec(30, rng), opts);
    Mat gram = K.w.transpose() * K.w;
    CHECK((gram - Mat::Identity(K.m, K.m)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(K.mode == OrthoMode::plain);
}

TEST_CASE("happy breakdown at the rank of C") {
    DaeSystem sys = definite_system(40, 5, 77);
    auto P = range_projector(sys.C);
    ShiftedOperator op(sys, 0.25);
    std::mt19937_64 rng(1);
    ArnoldiOptions opts;
    opts.m_max = 12;
    KrylovDecomposition K = c_arnoldi(op, P, randn_vec(40, rng), opts);
    CHECK(K.breakdown);
    CHECK(K.m <= 5);
    CHECK(K.h_tail == 0.0);
    CHECK(K.w_next.norm() == 0.0);
}

TEST_CASE("vector with no range component is rejected") {
    DaeSystem sys = definite_system(15, 6, 21);
    auto P = range_projector(sys.C);
    ShiftedOperator op(sys, 0.5);
    std::mt19937_64 rng(6);
    Vec v = randn_vec(15, rng);
    Vec off = v - P.apply(v);
    REQUIRE(off.norm() > 0.1);
    CHECK_THROWS_AS(c_arnoldi(op, P, off), NumericalError);
}

TEST_CASE("residual matches the rank-one closed form") {
    DaeSystem sys = definite_system(30, 18, 404);
    auto P = range_projector(sys.C);
    const double gamma = 0.2;
    ShiftedOperator op(sys, gamma);
    ArnoldiOptions opts;
    opts.m_max = 6;
    KrylovDecomposition K = c_arnoldi(op, P, P.apply(sys.x0), opts);
    REQUIRE_FALSE(K.breakdown);

    const Vec coeff = K.w.transpose() * (sys.C * P.apply(sys.x0));
    SparseSolver gsolve(sys.G, "G");
    const double t = 0.7;

    // Dense differentiation of y_m(t) = W exp(-t M) coeff, M = (H^{-1}-I)/gamma.
    Mat hin = K.h.inverse();
    Mat m = (hin - Mat::Identity(K.m, K.m)) / gamma;
    CMat e = expm_dense((-t * m).cast<Complex>());
    Vec ym = K.w * (e.real() * coeff);
    Vec dym = K.w * (-(m * (e.real() * coeff)));
    Vec r = P.apply(gsolve.solve(sys.C * dym)) + ym;

    const double beta = residual_beta(K, t, coeff);
    Vec rhs = -beta * P.apply(gsolve.solve(Vec(sys.C * K.w_next + gamma * (sys.G * K.w_next))));
    CHECK((r - rhs).norm() < 1e-9 * (1.0 + r.norm()));
}

TEST_CASE("posterior estimate falls back to the heuristic without reduced operators") {
    DaeSystem sys = definite_system(20, 12, 33);
    auto P = range_projector(sys.C);
    ShiftedOperator op(sys, 0.3);
    ArnoldiOptions opts;
    opts.m_max = 5;
    KrylovDecomposition K = c_arnoldi(op, P, P.apply(sys.x0), opts);
    Vec coeff = Vec::Zero(K.m);
    coeff(0) = K.beta0;
    ResidualEstimate est = posterior_bound(K, P, nullptr, 0.5, coeff);
    CHECK(est.heuristic);
    CHECK(est.posterior_bound == doctest::Approx(0.5 * est.beta_sup));

    ReducedOperators ops = reduced_operators(sys, P, 0.3);
    ResidualEstimate full = posterior_bound(K, P, &ops, 0.5, coeff);
    CHECK_FALSE(full.heuristic);
    CHECK(full.posterior_bound >= 0.0);
    CHECK((full.omega_choice == "largest" || full.omega_choice == "smallest" ||
           full.omega_choice == "fallback"));
}

TEST_CASE("decomposition dump writes readable artifacts") {
    DaeSystem sys = definite_system(12, 8, 2);
    auto P = range_projector(sys.C);
    ShiftedOperator op(sys, 0.2);
    ArnoldiOptions opts;
    opts.m_max = 4;
    KrylovDecomposition K = c_arnoldi(op, P, P.apply(sys.x0), opts);

    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "stiffkrylov_dump_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    dump_decomposition(K, dir.string());
    CHECK(fs::exists(dir / "H.csv"));
    CHECK(fs::exists(dir / "W.mtx"));
    std::ifstream meta(dir / "meta.json");
    REQUIRE(meta.good());
    nlohmann::json j;
    meta >> j;
    CHECK(j["m"].get<int>() == K.m);
    fs::remove_all(dir);
}
