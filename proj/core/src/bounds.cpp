#include "stiffkrylov/bounds.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "stiffkrylov/dense.hpp"
#include "stiffkrylov/errors.hpp"

namespace stiffkrylov {

RangeSample sample_c_numrange(const std::function<Vec(const Vec&)>& a_action, const SpMat& C,
                              int n_samples, uint64_t seed) {
    const Index N = C.rows();
    double cnorm = 0.0;
    for (int k = 0; k < C.outerSize(); ++k) {
        for (SpMat::InnerIterator it(C, k); it; ++it) {
            cnorm = std::max(cnorm, std::abs(it.value()));
        }
    }
    if (cnorm == 0.0) throw ValidationError("weighted numerical range of a zero weight matrix");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RangeSample sample;
    sample.count = n_samples;
    sample.seed = seed;
    sample.points.reserve(static_cast<size_t>(n_samples));
    while (static_cast<int>(sample.points.size()) < n_samples) {
        Vec xr(N), xi(N);
        for (Index i = 0; i < N; ++i) xr(i) = normal(rng);
        for (Index i = 0; i < N; ++i) xi(i) = normal(rng);
        Vec cxr = C * xr, cxi = C * xi;
        double den = xr.dot(cxr) + xi.dot(cxi);
        double nx2 = xr.squaredNorm() + xi.squaredNorm();
        if (den < 1e-14 * cnorm * nx2) continue;  // negligible range component: redraw
        Vec axr = a_action(xr), axi = a_action(xi);
        double re = xr.dot(C * axr) + xi.dot(C * axi);
        double im = xr.dot(C * axi) - xi.dot(C * axr);
        sample.points.emplace_back(re / den, im / den);
    }
    return sample;
}

RangeSample sample_numrange(const Mat& a, int n_samples, uint64_t seed) {
    const Index N = a.rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RangeSample sample;
    sample.count = n_samples;
    sample.seed = seed;
    sample.points.reserve(static_cast<size_t>(n_samples));
    CMat ac = a.cast<Complex>();
    for (int s = 0; s < n_samples; ++s) {
        CVec x(N);
        for (Index i = 0; i < N; ++i) x(i) = Complex(normal(rng), normal(rng));
        Complex num = x.dot(ac * x);  // conjugate-linear in the first argument
        double den = x.squaredNorm();
        sample.points.push_back(num / den);
    }
    return sample;
}

SpectralBox spectral_box(const DaeSystem& system) {
    if (system.n_dim > 2000) {
        throw ValidationError("spectral box is computed densely; dimension capped at 2000");
    }
    Mat gd = Mat(system.G);
    Eigen::FullPivLU<Mat> lu(gd);
    if (!lu.isInvertible()) throw NumericalError("conductance matrix is singular");
    Mat ginv = lu.inverse();
    Mat sym = 0.5 * (ginv + ginv.transpose());
    Mat skew = 0.5 * (ginv - ginv.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
    RangeProjector P = range_projector(system.C);
    if (P.n == 0) throw ValidationError("spectral box requires a nonzero C");
    SpectralBox box;
    box.xi1 = es.eigenvalues().minCoeff();
    box.xi2 = es.eigenvalues().maxCoeff();
    box.xi3 = skew.isZero(0.0) ? 0.0
                               : Eigen::JacobiSVD<Mat>(skew).singularValues().maxCoeff();
    box.xi4 = P.c1.minCoeff();
    box.xi5 = P.c1.maxCoeff();
    return box;
}

DiskBound covering_disk_from_box(const SpectralBox& box) {
    if (!(box.xi1 > 0.0) || !(box.xi4 > 0.0)) {
        throw ValidationError("covering disk requires positive-definite bounds (xi1, xi4 > 0)");
    }
    double a = box.xi1 * box.xi4;           // left real extent
    double b = box.xi2 * box.xi5;           // right real extent
    double s = box.xi3 * box.xi5;           // imaginary extent
    double midpoint = 0.5 * (a + b);
    double threshold = std::max((a * a + s * s) / (2.0 * a), (b * b + s * s) / (2.0 * b));
    double c1 = std::max(midpoint, threshold * (1.0 + 1e-12));
    auto radius_at = [&](double c) {
        double bracket = std::max(c - a, b - c);
        return std::hypot(std::max(bracket, 0.0), s);
    };
    double rho1 = radius_at(c1);
    for (int tries = 0; c1 <= rho1 && tries < 8; ++tries) {
        c1 *= 1.0 + 1e-10;
        rho1 = radius_at(c1);
    }
    if (!(c1 > rho1)) {
        throw NumericalError("right-half-plane certificate unavailable");
    }
    return DiskBound{c1, rho1};
}

double g_of_mu(double mu, double gamma) { return mu / (mu + gamma); }

DiskBound mapped_disk(const DiskBound& d, double gamma) {
    double mu1 = d.center - d.radius;
    double mu2 = d.center + d.radius;
    if (!(mu1 > 0.0)) {
        throw ValidationError("mapped disk requires the source disk in the right half plane");
    }
    double glo = g_of_mu(mu1, gamma), ghi = g_of_mu(mu2, gamma);
    return DiskBound{0.5 * (glo + ghi), 0.5 * (ghi - glo)};
}

double prior_bound_thm4(const DiskBound& d_s, double r, double t, double gamma, int m,
                        const std::array<double, 3>& norms) {
    const double c0 = d_s.center, rho0 = d_s.radius;
    if (r <= 0.0) r = c0;
    if (!(r > rho0) || !(r <= c0)) {
        throw ValidationError("contour radius must lie in (rho0, c0]");
    }
    const int npts = 256;
    double peak = 0.0;
    for (int j = 0; j < npts; ++j) {
        double theta = 2.0 * M_PI * (j + 0.5) / npts;
        Complex lambda = Complex(c0, 0.0) + r * Complex(std::cos(theta), std::sin(theta));
        Complex mu_inv = (1.0 / lambda - 1.0) / gamma;
        Complex z = -t * mu_inv;
        double val = std::abs(phi_scalar(z, 0)) * norms[0] +
                     std::abs(mu_inv * phi_scalar(z, 1)) * norms[1] +
                     std::abs(mu_inv * phi_scalar(z, 2)) * norms[2];
        peak = std::max(peak, val);
    }
    return peak * (4.0 / (r - rho0)) * std::pow(rho0 / r, m);
}

RateFit convergence_rate_fit(const std::vector<std::pair<int, double>>& errors) {
    if (errors.size() < 4) {
        throw ValidationError("rate fit needs at least four points");
    }
    RateFit fit;
    for (const auto& [m, err] : errors) {
        if (!(err > 1e-15)) {
            fit.exact = true;
            return fit;
        }
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(errors.size());
    for (const auto& [m, err] : errors) {
        double x = std::log(static_cast<double>(m)), y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.prefactor = std::exp((sy - fit.order * sx) / n);
    return fit;
}

double rho_over_c0(double mu1, double mu2, double gamma) {
    return (mu2 - mu1) * gamma / (mu1 * (mu2 + gamma) + mu2 * (mu1 + gamma));
}

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// log E, evaluated in log space so huge exponents neither overflow nor
// collapse into denormals.
double log_e_gamma_value(double mu1, double mu2, double delta, int m, double gamma, int k) {
    double c0 = 0.5 * (g_of_mu(mu1, gamma) + g_of_mu(mu2, gamma));
    double rho = 0.5 * (g_of_mu(mu2, gamma) - g_of_mu(mu1, gamma));
    double core = m * std::log(rho / c0) - std::log(c0 - rho);
    if (k == 0) return delta * (1.0 - 1.0 / (2.0 * c0)) + core;
    return k * std::log(delta * gamma) + core;
}

double e_gamma_value(double mu1, double mu2, double delta, int m, double gamma, int k) {
    return std::exp(log_e_gamma_value(mu1, mu2, delta, m, gamma, k));
}

double e_gamma_slope(double mu1, double mu2, double delta, int m, double gamma, int k) {
    double t_mid = 2.0 * m / ((1.0 / mu1 + 1.0 / mu2) * gamma + 2.0);
    double t_edge = gamma / (mu1 + gamma);
    if (k >= 1) return k + t_mid + t_edge;
    double c0 = 0.5 * (g_of_mu(mu1, gamma) + g_of_mu(mu2, gamma));
    double d_exp = -delta / (4.0 * c0 * c0) *
                   (mu2 / ((gamma + mu2) * (gamma + mu2)) + mu1 / ((gamma + mu1) * (gamma + mu1)));
    return gamma * d_exp + t_mid + t_edge;
}

}  // namespace

std::vector<EGammaPoint> e_gamma_curve(double mu1, double mu2, double h_over_gamma, int m,
                                       const std::vector<double>& gammas, int k) {
    if (!(mu1 > 0.0) || !(mu2 >= mu1)) {
        throw ValidationError("landscape curve requires 0 < mu1 <= mu2");
    }
    if (gammas.empty()) throw ValidationError("empty gamma grid");
    std::vector<EGammaPoint> curve;
    curve.reserve(gammas.size());
    for (double gamma : gammas) {
        curve.push_back(EGammaPoint{gamma, e_gamma_value(mu1, mu2, h_over_gamma, m, gamma, k),
                                    e_gamma_slope(mu1, mu2, h_over_gamma, m, gamma, k)});
    }
    return curve;
}

SlopeReport slope_diagnostics(const std::vector<EGammaPoint>& curve, double mu1, double mu2,
                              int m, double delta, int k) {
    SlopeReport rep;
    double omega = mu1 / mu2;
    double sq = 1.0 + std::sqrt(omega);
    rep.epsilon = delta - (2.0 * m * omega / (1.0 + 3.0 * omega)) * sq * sq -
                  sq * sq / (1.0 + omega);
    rep.remark_quantity = 2.0 * mu1 * mu2 * m * (mu1 + 3.0 * mu2) /
                          ((mu1 + mu2) * (mu1 + mu2) + 4.0 * mu1 * mu2);
    rep.remark_ok = rep.remark_quantity <= 6.0 * mu1 * m * (1.0 + 1e-12);

    int changes = 0;
    for (size_t i = 1; i < curve.size(); ++i) {
        if ((curve[i - 1].slope > 0) != (curve[i].slope > 0)) ++changes;
    }
    rep.sign_changes = changes;
    rep.unimodal = changes <= 1;

    if (k == 0 && rep.epsilon > 0.0) {
        double scale = std::sqrt(mu1) + std::sqrt(mu2);
        double target = rep.epsilon / (scale * scale);
        bool all_ok = true, any = false;
        for (const auto& p : curve) {
            if (p.gamma <= mu2) continue;
            any = true;
            double decay = -p.slope / p.gamma;  // -d log E / d gamma
            if (decay < target * (1.0 - 1e-9)) all_ok = false;
        }
        rep.decay_regime_checked = any;
        rep.decay_ok = any && all_ok;
    }

    if (k >= 1) {
        rep.monotone_increasing = true;
        rep.slope_lower_ok = true;
        for (size_t i = 0; i < curve.size(); ++i) {
            if (curve[i].slope < k + 1 - 1e-9) rep.slope_lower_ok = false;
            if (i > 0 && curve[i].e < curve[i - 1].e) rep.monotone_increasing = false;
        }
    }

    // Finite-difference cross-check of the analytic slopes.
    const double s = 1e-5;
    double worst = 0.0;
    for (const auto& p : curve) {
        double ep = log_e_gamma_value(mu1, mu2, delta, m, p.gamma * std::exp(s), k);
        double em = log_e_gamma_value(mu1, mu2, delta, m, p.gamma * std::exp(-s), k);
        worst = std::max(worst, std::abs((ep - em) / (2.0 * s) - p.slope));
    }
    rep.max_fd_defect = worst;
    return rep;
}

bool phi_bound_check(double h, int k, const std::vector<double>& mus) {
    if (k < 1 || !(h > 0.0)) throw ValidationError("phi bound check needs k >= 1 and h > 0");
    double hk = std::pow(h, k);
    for (double mu : mus) {
        if (!(mu > 0.0)) throw ValidationError("phi bound check needs positive mu");
        double val = hk * std::abs(phi_scalar(Complex(-h / mu, 0.0), k));
        if (val > hk / factorial(k) + 1e-15) return false;
    }
    return true;
}

}  // namespace stiffkrylov
