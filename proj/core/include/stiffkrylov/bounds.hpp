#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "stiffkrylov/dae_system.hpp"

namespace stiffkrylov {

/// Disk with real center (all maps used here keep centers on the axis).
struct DiskBound {
    double center = 0;
    double radius = 0;
};

struct RangeSample {
    std::vector<Complex> points;
    int count = 0;
    uint64_t seed = 0;
};

/// xi1 <= xi2: extreme eigenvalues of sym(G^{-1}); xi3: largest singular
/// value of skew(G^{-1}); xi4 <= xi5: extreme nonzero eigenvalues of C.
struct SpectralBox {
    double xi1 = 0, xi2 = 0, xi3 = 0, xi4 = 0, xi5 = 0;
};

/// Weighted Rayleigh quotients (x*C A x)/(x*C x) for complex Gaussian x;
/// draws with x*Cx below 1e-14*||C||*||x||^2 are discarded and redrawn.
RangeSample sample_c_numrange(const std::function<Vec(const Vec&)>& a_action, const SpMat& C,
                              int n_samples, uint64_t seed);

/// Euclidean special case for dense matrices (e.g. Hessenberg blocks).
RangeSample sample_numrange(const Mat& a, int n_samples, uint64_t seed);

/// Dense eigen-bounds feeding the covering disk. Capped at dimension 2000.
SpectralBox spectral_box(const DaeSystem& system);

/// Right-half-plane covering disk D(c1, rho1) of the weighted range of
/// G^{-1}C from the box bounds; throws NumericalError when no c1 > rho1
/// exists ("right-half-plane certificate unavailable").
DiskBound covering_disk_from_box(const SpectralBox& box);

/// Moebius image of D(c, rho): c0 = (g(mu1)+g(mu2))/2, rho0 = (g(mu2)-g(mu1))/2
/// with mu1 = c-rho, mu2 = c+rho. Always inside D(1/2, 1/2).
DiskBound mapped_disk(const DiskBound& d, double gamma);

/// Cauchy-integral bound on the assembly error over a circle of radius r
/// around the mapped center: max over 256 contour points of
/// |f|*n0 + |f1|*n1 + |f2|*n2, times 4/(r-rho0) * (rho0/r)^m.
/// r <= 0 selects the default r = c0.
double prior_bound_thm4(const DiskBound& d_s, double r, double t, double gamma, int m,
                        const std::array<double, 3>& norms);

struct RateFit {
    double order = 0;
    double prefactor = 0;
    bool exact = false;  // all errors at rounding level: no rate to fit
};

/// Least-squares fit of log(err) against log(m).
RateFit convergence_rate_fit(const std::vector<std::pair<int, double>>& errors);

double g_of_mu(double mu, double gamma);            // mu/(mu+gamma)
double rho_over_c0(double mu1, double mu2, double gamma);

struct EGammaPoint {
    double gamma = 0;
    double e = 0;
    double slope = 0;  // analytic d log E / d log gamma
};

/// Error-landscape curve over a gamma grid with delta = h/gamma fixed:
/// k=0: E = exp(delta*(1 - 1/(2 c0))) * (rho/c0)^m / (c0 - rho);
/// k>=1: E = (delta*gamma)^k * (rho/c0)^m / (c0 - rho).
std::vector<EGammaPoint> e_gamma_curve(double mu1, double mu2, double h_over_gamma, int m,
                                       const std::vector<double>& gammas, int k);

struct SlopeReport {
    int sign_changes = 0;          // of the k=0 slope across the grid
    bool unimodal = false;         // at most one +/- crossing
    double epsilon = 0;            // decay margin from the small-omega expansion
    bool decay_regime_checked = false;
    bool decay_ok = false;         // -dlogE/dgamma >= epsilon/(sqrt(mu1)+sqrt(mu2))^2 beyond mu2
    double remark_quantity = 0;    // 2 mu1 mu2 m (mu1+3mu2)/((mu1+mu2)^2+4 mu1 mu2)
    bool remark_ok = false;        // remark_quantity <= 6 mu1 m
    bool monotone_increasing = false;  // k>=1 curves
    bool slope_lower_ok = false;       // k>=1: slope >= k+1 everywhere
    double max_fd_defect = 0;      // |finite difference - analytic| on interior points
};

SlopeReport slope_diagnostics(const std::vector<EGammaPoint>& curve, double mu1, double mu2,
                              int m, double delta, int k);

/// |h^k phi_k(-h/mu)| <= h^k/k! + slack across the mu grid.
bool phi_bound_check(double h, int k, const std::vector<double>& mus);

}  // namespace stiffkrylov
