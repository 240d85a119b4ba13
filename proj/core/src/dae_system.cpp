#include "stiffkrylov/dae_system.hpp"

#include <cmath>
#include <sstream>

#include "stiffkrylov/errors.hpp"

namespace stiffkrylov {

namespace {

double max_abs(const SpMat& a) {
    double m = 0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

bool structurally_diagonal(const SpMat& a) {
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            if (it.row() != it.col() && it.value() != 0.0) return false;
    return true;
}

}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << "C symmetry defect " << c_symmetry_defect
       << ", min eig(C) " << c_min_eig
       << ", rank(C) " << c_rank
       << ", min eig(sym G) " << g_sym_min_eig
       << ", G " << (g_definite ? "positive definite" : (g_psd_ok ? "positive semi-definite (not definite)" : "indefinite"))
       << ", range condition defect " << range_condition_defect;
    for (const auto& w : warnings) os << "\n  warning: " << w;
    return os.str();
}

double min_sym_eigenvalue(const SpMat& sym) {
    const Index n = sym.rows();
    if (n <= 2000) {
        Eigen::SelfAdjointEigenSolver<Mat> es{Mat(sym)};
        return es.eigenvalues().minCoeff();
    }
    // Shifted inverse iteration around the low end of the spectrum.
    const double scale = std::max(max_abs(sym), 1e-300);
    double shift = -1e-8 * scale;
    SpMat shifted = sym;
    SpMat id(n, n);
    id.setIdentity();
    shifted -= shift * id;
    Eigen::SimplicialLDLT<SpMat> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) {
        // Shift landed on the spectrum; the smallest eigenvalue is near it.
        return shift;
    }
    Vec v = Vec::Random(n).normalized();
    double lambda = 0;
    for (int it = 0; it < 40; ++it) {
        Vec w = ldlt.solve(v);
        const double nw = w.norm();
        if (!(nw > 0) || !w.allFinite()) break;
        v = w / nw;
        lambda = v.dot(sym * v);
    }
    return lambda;
}

ValidationReport validate(DaeSystem& system, double tau) {
    const Index n = system.n_dim;
    if (system.C.rows() != n || system.C.cols() != n || system.G.rows() != n ||
        system.G.cols() != n || system.u0.size() != n || system.u1.size() != n ||
        system.x0.size() != n) {
        throw ValidationError("validate: dimension mismatch between C, G, u and x0");
    }

    ValidationReport rep;
    const double cmax = std::max(max_abs(system.C), 1e-300);
    SpMat ct = SpMat(system.C.transpose());
    rep.c_symmetry_defect = max_abs(SpMat(system.C - ct)) / cmax;
    if (rep.c_symmetry_defect > 1e-12) {
        throw ValidationError("validate: C is not symmetric (relative defect " +
                              std::to_string(rep.c_symmetry_defect) + ")");
    }

    auto P = range_projector(system.C);
    rep.c_rank = P.n;
    rep.c_max_eig = P.n > 0 ? P.c1.maxCoeff() : 0.0;
    rep.c_min_eig = 0.0;
    if (structurally_diagonal(system.C)) {
        rep.c_min_eig = Vec(system.C.diagonal()).minCoeff();
    } else {
        SpMat csym = SpMat(0.5 * (system.C + ct));
        rep.c_min_eig = min_sym_eigenvalue(csym);
    }
    rep.c_psd_ok = rep.c_min_eig >= -tau * std::max(rep.c_max_eig, 1e-300);
    if (!rep.c_psd_ok) {
        throw ValidationError("validate: C has negative eigenvalue " +
                              std::to_string(rep.c_min_eig));
    }

    SpMat gsym = SpMat(0.5 * (system.G + SpMat(system.G.transpose())));
    rep.g_sym_min_eig = min_sym_eigenvalue(gsym);
    const double gmax = std::max(max_abs(system.G), 1e-300);
    rep.g_psd_ok = rep.g_sym_min_eig >= -tau * gmax;
    rep.g_definite = rep.g_sym_min_eig > tau * gmax;
    system.g_definite = rep.g_definite;
    if (!rep.g_psd_ok) {
        rep.warnings.push_back("sym(G) has negative eigenvalue " +
                               std::to_string(rep.g_sym_min_eig));
    } else if (!rep.g_definite) {
        rep.warnings.push_back("G positive semi-definite (not definite)");
    }

    // x(t) - G^{-1}u(t) must lie in range(G^{-1}C), i.e. G x0 - u(0) in range(C).
    const Vec r = system.G * system.x0 - system.u0;
    const Vec off = r - P.apply(r);
    rep.range_condition_defect = off.norm() / (1.0 + r.norm());
    rep.range_condition_ok = rep.range_condition_defect <= 1e-10;
    if (!rep.range_condition_ok) {
        rep.warnings.push_back("initial state violates the range consistency condition");
    }
    return rep;
}

Vec RangeProjector::apply(const Vec& x) const {
    if (x.size() != dim) throw NumericalError("RangeProjector::apply: length mismatch");
    if (diagonal_fast_path) {
        Vec y = Vec::Zero(dim);
        for (Index i : idx) y(i) = x(i);
        return y;
    }
    if (n == 0) return Vec::Zero(dim);
    return v * (v.transpose() * x);
}

Vec RangeProjector::vt_apply(const Vec& x) const {
    if (diagonal_fast_path) {
        Vec y(n);
        for (Index j = 0; j < n; ++j) y(j) = x(idx[j]);
        return y;
    }
    return v.transpose() * x;
}

Vec RangeProjector::lift(const Vec& y) const {
    if (diagonal_fast_path) {
        Vec x = Vec::Zero(dim);
        for (Index j = 0; j < n; ++j) x(idx[j]) = y(j);
        return x;
    }
    if (n == 0) return Vec::Zero(dim);
    return v * y;
}

Mat RangeProjector::basis() const {
    if (!diagonal_fast_path) return v;
    Mat b = Mat::Zero(dim, n);
    for (Index j = 0; j < n; ++j) b(idx[j], j) = 1.0;
    return b;
}

RangeProjector range_projector(const SpMat& C, double zero_threshold_rel) {
    RangeProjector P;
    P.dim = C.rows();
    if (C.rows() != C.cols()) throw ValidationError("range_projector: C not square");

    if (structurally_diagonal(C)) {
        P.diagonal_fast_path = true;
        const Vec d = C.diagonal();
        const double lmax = d.size() > 0 ? d.maxCoeff() : 0.0;
        P.zero_threshold = zero_threshold_rel * lmax;
        std::vector<double> vals;
        for (Index i = 0; i < d.size(); ++i) {
            if (d(i) > P.zero_threshold) {
                P.idx.push_back(i);
                vals.push_back(d(i));
            }
        }
        P.n = static_cast<Index>(P.idx.size());
        P.c1 = Eigen::Map<Vec>(vals.data(), P.n);
        return P;
    }

    if (P.dim > 2000) {
        throw NumericalError("range_projector: dense eigen-decomposition capped at N=2000 "
                             "for non-diagonal C");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es{Mat(C)};
    if (es.info() != Eigen::Success) {
        throw NumericalError("range_projector: eigen-decomposition of C failed");
    }
    const Vec& evals = es.eigenvalues();
    const double lmax = evals.size() > 0 ? evals.maxCoeff() : 0.0;
    P.zero_threshold = zero_threshold_rel * lmax;
    std::vector<Index> keep;
    for (Index i = 0; i < evals.size(); ++i) {
        if (evals(i) > P.zero_threshold) keep.push_back(i);
    }
    P.n = static_cast<Index>(keep.size());
    P.c1.resize(P.n);
    P.v.resize(P.dim, P.n);
    for (Index j = 0; j < P.n; ++j) {
        P.c1(j) = evals(keep[j]);
        P.v.col(j) = es.eigenvectors().col(keep[j]);
    }
    return P;
}

SparseSolver::SparseSolver(const SpMat& a, std::string name)
    : a_(a), name_(std::move(name)), lu_(std::make_shared<Eigen::SparseLU<SpMat>>()) {
    a_.makeCompressed();
    lu_->analyzePattern(a_);
    lu_->factorize(a_);
    if (lu_->info() != Eigen::Success) {
        throw NumericalError("SparseSolver: singular factorization of " + name_ + ": " +
                             lu_->lastErrorMessage());
    }
}

Vec SparseSolver::solve(const Vec& rhs) const {
    Vec x = lu_->solve(rhs);
    // One step of iterative refinement.
    Vec r = rhs - a_ * x;
    x += lu_->solve(r);
    if (!x.allFinite()) {
        throw NumericalError("SparseSolver: non-finite solve result for " + name_);
    }
    return x;
}

ReducedOperators reduced_operators(const DaeSystem& system, const RangeProjector& P,
                                   double gamma) {
    if (P.n > 2000) throw NumericalError("reduced_operators: rank capped at 2000");
    ReducedOperators ops;
    ops.gamma = gamma;
    ops.c1 = P.c1;
    SparseSolver gsolve(system.G, "G");
    SpMat shifted = system.C + gamma * system.G;
    SparseSolver ssolve(shifted, "C+gamma*G");
    const Mat vc = P.basis();
    ops.b11.resize(P.n, P.n);
    ops.s11.resize(P.n, P.n);
    for (Index j = 0; j < P.n; ++j) {
        const Vec cv = system.C * vc.col(j);
        ops.b11.col(j) = vc.transpose() * gsolve.solve(cv);
        ops.s11.col(j) = vc.transpose() * ssolve.solve(cv);
    }
    return ops;
}

}  // namespace stiffkrylov
