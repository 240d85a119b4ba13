#include "stiffkrylov/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <thread>

#include "stiffkrylov/errors.hpp"
#include "stiffkrylov/io.hpp"
#include "stiffkrylov/oracle.hpp"

namespace stiffkrylov {

std::string to_string(PhiVariant v) {
    switch (v) {
        case PhiVariant::phi0: return "phi0";
        case PhiVariant::phi1: return "phi1";
        case PhiVariant::phi2: return "phi2";
    }
    return "?";
}

std::string to_string(ArnoldiVariant v) {
    switch (v) {
        case ArnoldiVariant::plain: return "plain";
        case ArnoldiVariant::plain_pruned: return "plain-pruned";
        case ArnoldiVariant::structured_pruned: return "structured-pruned";
    }
    return "?";
}

namespace {

struct GridPoint {
    double h;
    int m;
    ArnoldiVariant variant;
};

// Per-worker state: factorizations are rebuilt rather than shared across
// threads, cached by shift value within the worker.
struct Worker {
    const DaeSystem* system;
    const RangeProjector* proj;
    const Vec* ramp_seed;  // G^{-1} u'(0)
    std::map<double, std::unique_ptr<ShiftedOperator>> ops;
    std::unique_ptr<SparseSolver> gsolve;

    ShiftedOperator& op_for(double gamma) {
        auto it = ops.find(gamma);
        if (it == ops.end()) {
            it = ops.emplace(gamma, std::make_unique<ShiftedOperator>(*system, gamma)).first;
        }
        return *it->second;
    }
    SparseSolver& g() {
        if (!gsolve) gsolve = std::make_unique<SparseSolver>(system->G, "conductance matrix");
        return *gsolve;
    }
};

Vec route_value(Worker& w, const GridPoint& pt, double gamma, PhiVariant phi) {
    ArnoldiOptions aopts;
    aopts.m_max = pt.m;
    aopts.mode = pt.variant == ArnoldiVariant::structured_pruned ? OrthoMode::structured
                                                                 : OrthoMode::plain;
    PruningPolicy policy;
    policy.mode = pt.variant == ArnoldiVariant::plain ? PruningPolicy::Mode::none
                                                      : PruningPolicy::Mode::prune;
    KrylovDecomposition K = c_arnoldi(w.op_for(gamma), *w.proj, *w.ramp_seed, aopts);
    Vec q = K.w.transpose() * (w.system->C * (*w.ramp_seed));
    const double h = pt.h;
    switch (phi) {
        case PhiVariant::phi2: {
            Vec y = hessenberg_phi(K.h, gamma, h, 2, policy, q, SpectralFn::phi_weighted);
            return Vec((h * h) * (K.w * y));
        }
        case PhiVariant::phi1: {
            Vec y = hessenberg_phi(K.h, gamma, h, 1, policy, q, SpectralFn::phi);
            return Vec(-h * (K.w * y) + h * w.proj->apply(*w.ramp_seed));
        }
        case PhiVariant::phi0: {
            Vec y = hessenberg_phi(K.h, gamma, h, 0, policy, q, SpectralFn::phi);
            Vec delta = K.w * Vec(y - q);  // (exp - I) applied in the subspace
            Vec bdelta = w.proj->apply(w.g().solve(Vec(w.system->C * delta)));
            return Vec(bdelta + h * w.proj->apply(*w.ramp_seed));
        }
    }
    return Vec::Zero(w.system->n_dim);
}

}  // namespace

std::vector<SweepRow> run_sweep(const DaeSystem& system, const SweepConfig& config) {
    if (config.h_grid.empty() || config.m_grid.empty() || config.variants.empty()) {
        throw ValidationError("sweep grids must be nonempty");
    }
    if (!config.gamma_half_h && !(config.gamma_fixed > 0.0)) {
        throw ValidationError("fixed gamma must be positive");
    }
    if (system.u1.isZero(0.0)) {
        throw ValidationError("sweep measures the ramp term; the source has u'(0) = 0");
    }

    RangeProjector proj = range_projector(system.C);
    SparseSolver gsolve(system.G, "conductance matrix");
    Vec ramp_seed = gsolve.solve(system.u1);

    std::vector<double> hs = config.h_grid;
    std::sort(hs.begin(), hs.end());
    std::vector<int> ms = config.m_grid;
    std::sort(ms.begin(), ms.end());

    std::vector<GridPoint> points;
    for (double h : hs) {
        for (int m : ms) {
            for (ArnoldiVariant v : config.variants) points.push_back(GridPoint{h, m, v});
        }
    }

    // Oracle targets per h, computed serially on the ramp-only system.
    const bool use_oracle = system.n_dim <= 2000;
    std::map<double, Vec> targets;
    if (use_oracle) {
        DaeSystem ramp_only = system;
        ramp_only.x0 = Vec::Zero(system.n_dim);
        ramp_only.u0 = Vec::Zero(system.n_dim);
        OracleContext octx = make_oracle_context(ramp_only);
        for (double h : hs) targets[h] = exact_projected(octx, h);
    }

    std::vector<SweepRow> rows(points.size());
    std::atomic<size_t> next{0};
    auto run_worker = [&]() {
        Worker w{&system, &proj, &ramp_seed, {}, nullptr};
        for (size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1)) {
            const GridPoint& pt = points[i];
            double gamma = config.gamma_half_h ? pt.h / 2.0 : config.gamma_fixed;
            SweepRow row;
            row.h = pt.h;
            row.m = pt.m;
            row.variant = pt.variant;
            try {
                Vec approx = route_value(w, pt, gamma, config.phi);
                if (use_oracle) {
                    row.abs_error = (approx - targets.at(pt.h)).norm();
                    row.oracle_used = true;
                } else {
                    ArnoldiOptions aopts;
                    aopts.m_max = pt.m;
                    KrylovDecomposition K = c_arnoldi(w.op_for(gamma), proj, ramp_seed, aopts);
                    Vec q = K.w.transpose() * (system.C * ramp_seed);
                    row.abs_error = std::numeric_limits<double>::quiet_NaN();
                    row.bound =
                        pt.h * pt.h * posterior_bound(K, proj, nullptr, pt.h, q).posterior_bound;
                }
            } catch (const NumericalError&) {
                row.abs_error = std::numeric_limits<double>::infinity();
            }
            rows[i] = row;
        }
    };

    int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
        run_worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(run_worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    bool with_bound = false;
    for (const SweepRow& r : rows) {
        if (!r.oracle_used) with_bound = true;
    }
    std::string body = with_bound ? "h,m,abs_error,bound,variant\n" : "h,m,abs_error,variant\n";
    for (const SweepRow& r : rows) {
        body += format_double(r.h);
        body += ",";
        body += std::to_string(r.m);
        body += ",";
        body += std::isnan(r.abs_error) ? "nan" : format_double(r.abs_error);
        if (with_bound) {
            body += ",";
            body += format_double(r.bound);
        }
        body += ",";
        body += to_string(r.variant);
        body += "\n";
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << body;
}

}  // namespace stiffkrylov
