#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stiffkrylov/bounds.hpp"
#include "stiffkrylov/errors.hpp"
#include "stiffkrylov/io.hpp"
#include "stiffkrylov/mna.hpp"
#include "stiffkrylov/netlist.hpp"
#include "stiffkrylov/oracle.hpp"
#include "stiffkrylov/sweep.hpp"

namespace sk = stiffkrylov;
namespace fs = std::filesystem;

namespace {

int log_level() {
    const char* env = std::getenv("STIFFKRYLOV_LOG");
    if (!env) return 1;  // warn
    std::string v(env);
    if (v == "debug") return 3;
    if (v == "info") return 2;
    if (v == "error") return 0;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[info] " << msg << "\n";
}

sk::DaeSystem load_system(const std::string& netlist_path, bool quiet = false) {
    sk::Netlist nl = sk::read_netlist_file(netlist_path);
    sk::MnaStamp stamp = sk::stamp_mna(nl);
    for (const std::string& w : stamp.warnings) {
        if (!quiet && log_level() >= 1) std::cerr << "[warn] " << w << "\n";
    }
    return std::move(stamp.system);
}

std::string out_file(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

struct CommonFlags {
    std::string netlist;
    std::string out = ".";
    double gamma = 0;
    bool gamma_half_h = false;
    uint64_t seed = 0;
};

int cmd_validate(const std::string& netlist_path) {
    sk::Netlist nl = sk::read_netlist_file(netlist_path);
    sk::MnaStamp stamp = sk::stamp_mna(nl);
    sk::ValidationReport report = sk::validate(stamp.system);
    for (const std::string& w : stamp.warnings) report.warnings.push_back(w);
    std::cout << report.summary() << "\n";
    if (!report.g_definite) {
        std::cout << "note: G positive semi-definite (not definite)\n";
    }
    return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stiff DAE transient solver: shift-and-invert Krylov with a C-weighted "
                 "inner product, error bounds and RLC netlist ingestion"};
    app.set_config("--config");
    app.require_subcommand(1);
    // "--h" is a mandated flag name; keep help reachable as --help only.
    app.set_help_flag("--help", "Print help");

    // validate
    auto* validate = app.add_subcommand("validate", "Check structural assumptions of a netlist");
    std::string v_netlist;
    validate->add_option("--netlist", v_netlist, "Netlist file")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Single-step transient solve");
    simulate->set_help_flag("--help", "Print help");
    CommonFlags sim;
    double sim_h = 0;
    int sim_m = 30;
    std::string sim_format = "json";
    bool sim_literal = false;
    simulate->add_option("--netlist", sim.netlist, "Netlist file")->required();
    simulate->add_option("--h", sim_h, "Step size")->required();
    simulate->add_option("--m", sim_m, "Krylov dimension cap");
    auto* sim_gamma = simulate->add_option("--gamma", sim.gamma, "Shift (positive)");
    simulate->add_flag("--gamma-half-h", sim.gamma_half_h, "Use gamma = h/2")
        ->excludes(sim_gamma);
    simulate->add_option("--format", sim_format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    simulate->add_option("--out", sim.out, "Output directory");
    simulate->add_flag("--literal-assembly", sim_literal,
                       "Use the source vectors directly instead of G^{-1}-preconditioned ones");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Error grid over (h, m) for one phi route");
    sweep->set_help_flag("--help", "Print help");
    CommonFlags sw;
    std::vector<double> sw_h;
    std::vector<int> sw_m;
    int sw_phi = 2;
    int sw_jobs = 1;
    std::vector<std::string> sw_variants{"structured-pruned"};
    sweep->add_option("--netlist", sw.netlist, "Netlist file")->required();
    sweep->add_option("--h", sw_h, "Step sizes")->required();
    sweep->add_option("--m", sw_m, "Krylov dimensions")->required();
    auto* sw_gamma = sweep->add_option("--gamma", sw.gamma, "Fixed shift");
    sweep->add_flag("--gamma-half-h", sw.gamma_half_h, "Use gamma = h/2 per point")
        ->excludes(sw_gamma);
    sweep->add_option("--phi", sw_phi, "Phi route (0, 1 or 2)")->check(CLI::Range(0, 2));
    sweep->add_option("--variant", sw_variants, "Arnoldi variants")
        ->check(CLI::IsMember({"plain", "plain-pruned", "structured-pruned"}));
    sweep->add_option("--jobs", sw_jobs, "Worker threads");
    sweep->add_option("--out", sw.out, "Output directory");

    // numrange
    auto* numrange = app.add_subcommand("numrange", "Sample the weighted numerical range");
    CommonFlags nr;
    int nr_samples = 10000;
    double nr_gamma = 1.0;
    numrange->add_option("--netlist", nr.netlist, "Netlist file")->required();
    numrange->add_option("--samples", nr_samples, "Sample count");
    numrange->add_option("--seed", nr.seed, "RNG seed");
    numrange->add_option("--gamma", nr_gamma, "Shift for the mapped disk summary");
    numrange->add_option("--out", nr.out, "Output directory");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Error-landscape curve and slope report");
    CommonFlags bd;
    double bd_mu1 = 0, bd_mu2 = 0, bd_delta = 1.0;
    int bd_m = 10, bd_k = 0, bd_count = 50;
    double bd_gmin = 1e-6, bd_gmax = 1e2;
    bounds->add_option("--netlist", bd.netlist, "Netlist file (mu bounds from its spectrum)");
    bounds->add_option("--mu1", bd_mu1, "Smallest time constant");
    bounds->add_option("--mu2", bd_mu2, "Largest time constant");
    bounds->add_option("--m", bd_m, "Krylov dimension");
    bounds->add_option("--k", bd_k, "Phi order")->check(CLI::Range(0, 4));
    bounds->add_option("--delta", bd_delta, "h/gamma ratio held fixed on the grid");
    bounds->add_option("--gamma-min", bd_gmin, "Grid start");
    bounds->add_option("--gamma-max", bd_gmax, "Grid end");
    bounds->add_option("--gamma-count", bd_count, "Grid size");
    bounds->add_option("--out", bd.out, "Output directory");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate an RLC mesh netlist");
    std::string gen_out = "mesh.cir";
    std::string gen_preset;
    sk::MeshParams mesh;
    gen->add_option("--rows", mesh.rows, "Grid rows");
    gen->add_option("--cols", mesh.cols, "Grid columns");
    gen->add_option("--cap-fraction", mesh.cap_fraction, "Fraction of nodes with capacitors");
    gen->add_option("--ind-fraction", mesh.ind_fraction, "Fraction of inductive edges");
    gen->add_option("--seed", mesh.seed, "RNG seed");
    gen->add_option("--preset", gen_preset, "Named preset")
        ->check(CLI::IsMember({"paper_like"}));
    gen->add_option("--out", gen_out, "Output netlist file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            return cmd_validate(v_netlist);
        }
        if (simulate->parsed()) {
            sk::DaeSystem sys = load_system(sim.netlist);
            sk::validate(sys);
            sk::SingleStepOptions opts;
            opts.m_max = sim_m;
            opts.gamma = sim.gamma_half_h || sim.gamma <= 0 ? -1.0 : sim.gamma;
            opts.literal_route = sim_literal;
            opts.attach_posterior = sys.n_dim <= 2000;
            log_info("simulate: N=" + std::to_string(sys.n_dim));
            sk::StepResult result = sk::single_step(sys, sim_h, opts);
            sk::write_outputs(result, sim.out,
                              sim_format == "csv" ? sk::OutputFormat::csv
                                                  : sk::OutputFormat::json);
            return 0;
        }
        if (sweep->parsed()) {
            sk::DaeSystem sys = load_system(sw.netlist);
            sk::validate(sys);
            sk::SweepConfig config;
            config.h_grid = sw_h;
            config.m_grid = sw_m;
            config.gamma_half_h = !(sw_gamma->count() > 0);
            config.gamma_fixed = sw.gamma;
            config.phi = sw_phi == 0   ? sk::PhiVariant::phi0
                         : sw_phi == 1 ? sk::PhiVariant::phi1
                                       : sk::PhiVariant::phi2;
            config.variants.clear();
            for (const std::string& v : sw_variants) {
                config.variants.push_back(v == "plain"          ? sk::ArnoldiVariant::plain
                                          : v == "plain-pruned" ? sk::ArnoldiVariant::plain_pruned
                                                : sk::ArnoldiVariant::structured_pruned);
            }
            config.jobs = sw_jobs;
            log_info("sweep: " + std::to_string(config.h_grid.size() * config.m_grid.size() *
                                                config.variants.size()) +
                     " grid points");
            auto rows = sk::run_sweep(sys, config);
            sk::write_sweep_csv(out_file(sw.out, "sweep.csv"), rows);
            return 0;
        }
        if (numrange->parsed()) {
            sk::DaeSystem sys = load_system(nr.netlist);
            sk::validate(sys);
            sk::RangeProjector proj = sk::range_projector(sys.C);
            sk::SparseSolver gsolve(sys.G, "conductance matrix");
            auto action = [&](const sk::Vec& x) {
                return proj.apply(gsolve.solve(sk::Vec(sys.C * x)));
            };
            sk::RangeSample sample = sk::sample_c_numrange(action, sys.C, nr_samples, nr.seed);
            std::string scatter = out_file(nr.out, "numrange.csv");
            {
                std::string body = "re,im\n";
                for (auto z : sample.points) {
                    body += sk::format_double(z.real()) + "," + sk::format_double(z.imag()) +
                            "\n";
                }
                std::ofstream out(scatter);
                out << body;
            }
            nlohmann::json summary{{"samples", sample.count}, {"seed", sample.seed}};
            try {
                sk::SpectralBox box = sk::spectral_box(sys);
                sk::DiskBound disk = sk::covering_disk_from_box(box);
                sk::DiskBound mapped = sk::mapped_disk(disk, nr_gamma);
                summary["covering_disk"] = {{"center", disk.center}, {"radius", disk.radius}};
                summary["mapped_disk"] = {{"center", mapped.center},
                                          {"radius", mapped.radius},
                                          {"gamma", nr_gamma}};
            } catch (const std::runtime_error& e) {
                summary["disk_note"] = e.what();
            }
            sk::write_json_file(out_file(nr.out, "numrange_summary.json"), summary);
            return 0;
        }
        if (bounds->parsed()) {
            double mu1 = bd_mu1, mu2 = bd_mu2;
            if (!bd.netlist.empty()) {
                sk::DaeSystem sys = load_system(bd.netlist);
                sk::validate(sys);
                sk::DiskBound disk = sk::covering_disk_from_box(sk::spectral_box(sys));
                mu1 = disk.center - disk.radius;
                mu2 = disk.center + disk.radius;
            }
            if (!(mu1 > 0) || !(mu2 >= mu1)) {
                throw sk::ValidationError("need 0 < mu1 <= mu2 (flags or netlist)");
            }
            std::vector<double> gammas;
            for (int i = 0; i < bd_count; ++i) {
                double f = bd_count == 1 ? 0.0 : static_cast<double>(i) / (bd_count - 1);
                gammas.push_back(bd_gmin * std::pow(bd_gmax / bd_gmin, f));
            }
            auto curve = sk::e_gamma_curve(mu1, mu2, bd_delta, bd_m, gammas, bd_k);
            std::string body = "gamma,E,slope\n";
            for (const auto& p : curve) {
                body += sk::format_double(p.gamma) + "," + sk::format_double(p.e) + "," +
                        sk::format_double(p.slope) + "\n";
            }
            {
                std::ofstream out(out_file(bd.out, "e_gamma.csv"));
                out << body;
            }
            sk::SlopeReport rep = sk::slope_diagnostics(curve, mu1, mu2, bd_m, bd_delta, bd_k);
            nlohmann::json j{{"mu1", mu1},
                             {"mu2", mu2},
                             {"k", bd_k},
                             {"sign_changes", rep.sign_changes},
                             {"unimodal", rep.unimodal},
                             {"epsilon", rep.epsilon},
                             {"decay_regime_checked", rep.decay_regime_checked},
                             {"decay_ok", rep.decay_ok},
                             {"remark_quantity", rep.remark_quantity},
                             {"remark_ok", rep.remark_ok},
                             {"monotone_increasing", rep.monotone_increasing},
                             {"slope_lower_ok", rep.slope_lower_ok},
                             {"max_fd_defect", rep.max_fd_defect}};
            sk::write_json_file(out_file(bd.out, "slope_report.json"), j);
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (gen->parsed()) {
            sk::Netlist nl = gen_preset == "paper_like" ? sk::gen_paper_like_mesh(mesh.seed)
                                                        : sk::gen_rlc_mesh(mesh);
            sk::write_netlist_file(gen_out, nl);
            log_info("wrote " + gen_out);
            return 0;
        }
    } catch (const sk::ValidationError& e) {
        std::cerr << nlohmann::json{{"error", {{"type", "validation"}, {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 1;
    } catch (const sk::NumericalError& e) {
        std::cerr << nlohmann::json{{"error", {{"type", "numerical"}, {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return 2;
    }
    return 0;
}
