#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stiffkrylov/types.hpp"

namespace stiffkrylov {

/// Current-source waveform; the solver consumes the linearization
/// u(t) = value_at0 + slope_at0 * t of the segment starting at t = 0.
struct SourceSpec {
    enum class Kind { dc, ramp, pwl };
    Kind kind = Kind::dc;
    double dc = 0;
    double i0 = 0, slope = 0;                          // ramp
    std::vector<std::pair<double, double>> points;     // pwl (t, value)

    double value_at0() const;
    double slope_at0() const;
};

struct Element {
    char kind = 'R';  // R, C, L, I
    std::string name;
    std::string node_a, node_b;
    double value = 0;      // ohms, farads, henries (unused for I)
    SourceSpec source;     // I only
    int line = 0;
};

struct Netlist {
    std::string title;
    std::vector<Element> elements;
};

/// SPICE-like grammar: one element per line, `*` comment lines (a leading
/// comment becomes the title), SI suffixes f p n u m k meg g. Sources accept
/// a plain number, DC x, RAMP(i0 slope) or PWL(t1 v1 t2 v2 ...).
Netlist parse_netlist(const std::string& text);
std::string serialize_netlist(const Netlist& netlist);

Netlist read_netlist_file(const std::string& path);
void write_netlist_file(const std::string& path, const Netlist& netlist);

struct MeshParams {
    int rows = 2, cols = 2;
    std::array<double, 2> r_range{1.0, 1.0};
    std::array<double, 2> c_range{1e-9, 1e-9};
    std::array<double, 2> l_range{1e-6, 1e-6};
    double cap_fraction = 1.0;  // nodes carrying a capacitor to ground
    double ind_fraction = 0.0;  // edges realized as R in series with L
    bool with_source = true;
    double source_i0 = 0, source_slope = 1e-3;
    uint64_t seed = 0;
};

/// rows x cols resistor grid with one grounding resistor, optional per-node
/// capacitors and series inductors; element values log-uniform in the given
/// ranges. Byte-deterministic for a fixed seed.
Netlist gen_rlc_mesh(const MeshParams& params);

/// Preset with 260 resistors, 160 capacitors, 160 inductors and 507 unknowns:
/// a 187-node resistive backbone (chain + cross links) carrying 160 inductive
/// stubs, each stub node holding a capacitor; ramp source at the first stub.
Netlist gen_paper_like_mesh(uint64_t seed);

}  // namespace stiffkrylov
