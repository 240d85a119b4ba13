#include "stiffkrylov/dense.hpp"

#include <cmath>
#include <sstream>

#include "stiffkrylov/errors.hpp"

namespace stiffkrylov {

namespace {

void require_square_finite(const CMat& a, const char* who) {
    if (a.rows() != a.cols()) {
        std::ostringstream os;
        os << who << ": matrix is " << a.rows() << "x" << a.cols() << ", expected square";
        throw NumericalError(os.str());
    }
    if (!a.allFinite()) {
        throw NumericalError(std::string(who) + ": input has non-finite entries");
    }
}

double one_norm(const CMat& a) {
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

CMat expm_dense(const CMat& a) {
    require_square_finite(a, "expm_dense");
    const Index n = a.rows();
    if (n == 0) return CMat(0, 0);

    // Higham's degree-13 Pade coefficients.
    static const double b[] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double nrm = one_norm(a);
    int squarings = 0;
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    }
    const CMat as = a / std::pow(2.0, squarings);

    const CMat id = CMat::Identity(n, n);
    const CMat a2 = as * as;
    const CMat a4 = a2 * a2;
    const CMat a6 = a2 * a4;

    const CMat u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                         b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const CMat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                   b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

    CMat r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) r = r * r;

    if (!r.allFinite()) {
        throw NumericalError("expm_dense: overflow, result has non-finite entries");
    }
    return r;
}

CMat phi_dense(const CMat& a, int k) {
    if (k < 0) throw NumericalError("phi_dense: negative phi order");
    require_square_finite(a, "phi_dense");
    if (k == 0) return expm_dense(a);

    const Index n = a.rows();
    // Augmented matrix [A I 0; 0 0 I; 0 0 0]: the (0,k) block of its
    // exponential is phi_k(A).
    const Index dim = n * (k + 1);
    CMat m = CMat::Zero(dim, dim);
    m.topLeftCorner(n, n) = a;
    for (int j = 0; j < k; ++j) {
        m.block(j * n, (j + 1) * n, n, n) = CMat::Identity(n, n);
    }
    const CMat e = expm_dense(m);
    return e.block(0, k * n, n, n);
}

Complex phi_scalar(Complex z, int k) {
    if (k < 0) throw NumericalError("phi_scalar: negative phi order");
    if (k == 0) return std::exp(z);
    if (std::abs(z) < 0.25) {
        // sum_{j>=0} z^j / (j+k)!
        double fact = 1.0;
        for (int i = 2; i <= k; ++i) fact *= i;
        Complex term = 1.0 / fact;
        Complex sum = term;
        for (int j = 1; j < 40; ++j) {
            term *= z / static_cast<double>(j + k);
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    Complex phi = std::exp(z);
    double fact = 1.0;  // (i-1)! below
    for (int i = 1; i <= k; ++i) {
        phi = (phi - 1.0 / fact) / z;
        fact *= i;
    }
    return phi;
}

EigResult eig_dense(const CMat& a) {
    require_square_finite(a, "eig_dense");
    Eigen::ComplexEigenSolver<CMat> es(a);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eig_dense: QR iteration failed to converge");
    }
    EigResult r{es.eigenvalues(), es.eigenvectors()};
    const double resid =
        (a * r.vectors - r.vectors * r.values.asDiagonal()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (!(resid <= 1e-9 * scale * std::max<double>(1, a.rows()))) {
        std::ostringstream os;
        os << "eig_dense: residual " << resid << " exceeds tolerance for scale " << scale;
        throw NumericalError(os.str());
    }
    for (Index j = 0; j < r.vectors.cols(); ++j) {
        r.vectors.col(j).normalize();
    }
    return r;
}

double cond2(const CMat& a) {
    Eigen::JacobiSVD<CMat> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / s(s.size() - 1);
}

}  // namespace stiffkrylov
