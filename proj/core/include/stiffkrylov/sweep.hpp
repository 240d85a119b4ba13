#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stiffkrylov/evolve.hpp"

namespace stiffkrylov {

enum class PhiVariant { phi0, phi1, phi2 };
enum class ArnoldiVariant { plain, plain_pruned, structured_pruned };

std::string to_string(PhiVariant v);
std::string to_string(ArnoldiVariant v);

struct SweepConfig {
    std::vector<double> h_grid;
    std::vector<int> m_grid;
    bool gamma_half_h = true;   // gamma = h/2 per grid point
    double gamma_fixed = 0;     // used when gamma_half_h is false
    PhiVariant phi = PhiVariant::phi2;
    std::vector<ArnoldiVariant> variants{ArnoldiVariant::structured_pruned};
    uint64_t seed = 0;
    int jobs = 1;
};

struct SweepRow {
    double h = 0;
    int m = 0;
    ArnoldiVariant variant = ArnoldiVariant::structured_pruned;
    double abs_error = 0;   // NaN when the oracle is out of reach
    double bound = 0;       // posterior substitute above the oracle cap
    bool oracle_used = false;
};

/// Error grid of the ramp-source term: for each (h, m, variant) the
/// designated phi-route recomputes x_R(h) for the system restricted to
/// x(0)=0, u(0)=0, and is compared against the dense reference (dimension
/// <= 2000) or a posterior bound. Rows come back sorted by (h, m, variant).
std::vector<SweepRow> run_sweep(const DaeSystem& system, const SweepConfig& config);

/// Header "h,m,abs_error,variant"; a "bound" column is inserted before
/// "variant" when any row lacks an oracle comparison.
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace stiffkrylov
