#pragma once

#include <map>
#include <string>
#include <vector>

#include "stiffkrylov/dae_system.hpp"
#include "stiffkrylov/netlist.hpp"

namespace stiffkrylov {

/// Modified nodal analysis: node voltages plus one branch current per
/// inductor (so C stays diagonal PSD and the non-symmetry lands in G).
struct MnaStamp {
    DaeSystem system;
    std::map<std::string, Index> node_index;    // name -> row (ground excluded)
    std::map<std::string, Index> branch_index;  // inductor name -> row
    std::vector<std::string> warnings;
};

MnaStamp stamp_mna(const Netlist& netlist);

}  // namespace stiffkrylov
