#include <doctest.h>

#include <random>

#include "stiffkrylov/dae_system.hpp"
#include "stiffkrylov/errors.hpp"
#include "testutil.hpp"

using namespace stiffkrylov;
using namespace testutil;

TEST_CASE("validate accepts a well-posed system and reports the structure") {
    DaeSystem sys = definite_system(30, 20, 42);
    ValidationReport rep = validate(sys);
    CHECK(rep.pass());
    CHECK(rep.c_rank == 20);
    CHECK(rep.g_definite);
    CHECK(rep.range_condition_ok);
    CHECK(sys.g_definite);
}

TEST_CASE("validate rejects malformed inputs") {
    DaeSystem sys = definite_system(10, 6, 1);
    SUBCASE("dimension mismatch") {
        sys.u0 = Vec::Zero(9);
        CHECK_THROWS_AS(validate(sys), ValidationError);
    }
    SUBCASE("non-symmetric C") {
        sys.C.coeffRef(0, 1) = 0.5;
        CHECK_THROWS_AS(validate(sys), ValidationError);
    }
    SUBCASE("indefinite C") {
        DaeSystem full = definite_system(10, 10, 1);
        full.C.coeffRef(3, 3) = -1.0;
        CHECK_THROWS_AS(validate(full), ValidationError);
    }
}

TEST_CASE("validate flags semi-definite G and inconsistent initial state") {
    std::vector<std::string> warnings;
    DaeSystem sys = mesh_system(3, 3, 0.5, 7, &warnings);
    ValidationReport rep = validate(sys);
    CHECK(rep.pass());
    CHECK_FALSE(rep.g_definite);
    bool saw = false;
    for (const auto& w : rep.warnings) saw |= w.find("semi-definite") != std::string::npos;
    CHECK(saw);

    // Kick the state off the consistency manifold on a kernel coordinate of C.
    DaeSystem bad = definite_system(12, 6, 3);
    auto P = range_projector(bad.C);
    bad.x0 += 10.0 * (Vec::Ones(12) - P.apply(Vec::Ones(12))).normalized();
    ValidationReport rep2 = validate(bad);
    CHECK_FALSE(rep2.range_condition_ok);
}

TEST_CASE("range projector, diagonal fast path") {
    DaeSystem sys = definite_system(25, 14, 9);
    auto P = range_projector(sys.C);
    CHECK(P.diagonal_fast_path);
    CHECK(P.n == 14);

    std::mt19937_64 rng(2);
    Vec v = randn_vec(25, rng);
    Vec pv = P.apply(v);
    CHECK((P.apply(pv) - pv).norm() < 1e-14);            // idempotent
    CHECK((P.lift(P.vt_apply(pv)) - pv).norm() < 1e-14); // lift/restrict consistent
    CHECK((sys.C * (v - pv)).norm() < 1e-12);            // complement is the kernel
    Mat b = P.basis();
    CHECK((b.transpose() * b - Mat::Identity(14, 14)).norm() < 1e-14);
}

TEST_CASE("range projector, rotated dense path") {
    std::mt19937_64 rng(4);
    Mat q = Eigen::HouseholderQR<Mat>(randn_mat(12, rng)).householderQ();
    Vec d = Vec::Zero(12);
    for (int i = 0; i < 7; ++i) d(i) = 0.1 * (i + 1);
    Mat c = q * d.asDiagonal() * q.transpose();
    SpMat cs = c.sparseView();
    auto P = range_projector(cs);
    CHECK_FALSE(P.diagonal_fast_path);
    CHECK(P.n == 7);
    Vec v = randn_vec(12, rng);
    Vec pv = P.apply(v);
    CHECK((P.apply(pv) - pv).norm() < 1e-12);
    CHECK((c * (v - pv)).norm() < 1e-12);
}

TEST_CASE("sparse solver solves and refuses singular matrices") {
    DaeSystem sys = definite_system(20, 20, 6);
    SparseSolver s(sys.G, "G");
    std::mt19937_64 rng(8);
    Vec rhs = randn_vec(20, rng);
    Vec x = s.solve(rhs);
    CHECK((sys.G * x - rhs).norm() / rhs.norm() < 1e-12);

    SpMat sing(3, 3);
    sing.insert(0, 0) = 1.0;  // rank one
    sing.makeCompressed();
    CHECK_THROWS_AS(SparseSolver(sing, "singular"), NumericalError);
}

TEST_CASE("reduced operators match their dense definitions") {
    DaeSystem sys = definite_system(18, 10, 13);
    auto P = range_projector(sys.C);
    const double gamma = 0.3;
    ReducedOperators ops = reduced_operators(sys, P, gamma);

    Mat g = Mat(sys.G);
    Mat c = Mat(sys.C);
    Mat vc = P.basis();
    Mat b11_ref = vc.transpose() * g.fullPivLu().solve(c * vc);
    Mat s11_ref = vc.transpose() * Mat(c + gamma * g).fullPivLu().solve(c * vc);
    CHECK((ops.b11 - b11_ref).norm() / b11_ref.norm() < 1e-10);
    CHECK((ops.s11 - s11_ref).norm() / s11_ref.norm() < 1e-10);
    CHECK((ops.c1 - P.c1).norm() == 0.0);
}

TEST_CASE("minimum symmetric eigenvalue, small dense route") {
    SpMat a(3, 3);
    a.insert(0, 0) = 2.0;
    a.insert(1, 1) = -0.5;
    a.insert(2, 2) = 1.0;
    a.makeCompressed();
    CHECK(min_sym_eigenvalue(a) == doctest::Approx(-0.5));
}
