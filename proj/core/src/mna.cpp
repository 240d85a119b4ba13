#include "stiffkrylov/mna.hpp"

#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "stiffkrylov/errors.hpp"

namespace stiffkrylov {

MnaStamp stamp_mna(const Netlist& netlist) {
    MnaStamp stamp;
    std::vector<std::string> node_order;
    auto node_row = [&](const std::string& name) -> Index {
        if (name == "0") return -1;
        auto [it, inserted] = stamp.node_index.try_emplace(
            name, static_cast<Index>(stamp.node_index.size()));
        if (inserted) node_order.push_back(name);
        if (inserted) it->second = static_cast<Index>(node_order.size()) - 1;
        return it->second;
    };
    for (const Element& el : netlist.elements) {
        node_row(el.node_a);
        node_row(el.node_b);
    }
    const Index n_nodes = static_cast<Index>(node_order.size());
    Index n_branches = 0;
    for (const Element& el : netlist.elements) {
        if (el.kind == 'L') {
            stamp.branch_index[el.name] = n_nodes + n_branches;
            ++n_branches;
        }
    }
    const Index N = n_nodes + n_branches;
    if (N == 0) throw ValidationError("netlist has no non-ground nodes");

    std::vector<Eigen::Triplet<double>> gt, ct;
    Vec u0 = Vec::Zero(N), u1 = Vec::Zero(N);
    auto sym_stamp = [](std::vector<Eigen::Triplet<double>>& trips, Index a, Index b,
                        double v) {
        if (a >= 0) trips.emplace_back(static_cast<int>(a), static_cast<int>(a), v);
        if (b >= 0) trips.emplace_back(static_cast<int>(b), static_cast<int>(b), v);
        if (a >= 0 && b >= 0) {
            trips.emplace_back(static_cast<int>(a), static_cast<int>(b), -v);
            trips.emplace_back(static_cast<int>(b), static_cast<int>(a), -v);
        }
    };
    for (const Element& el : netlist.elements) {
        Index a = node_row(el.node_a), b = node_row(el.node_b);
        switch (el.kind) {
            case 'R':
                sym_stamp(gt, a, b, 1.0 / el.value);
                break;
            case 'C':
                sym_stamp(ct, a, b, el.value);
                break;
            case 'L': {
                Index br = stamp.branch_index.at(el.name);
                // Branch equation L di/dt - v_a + v_b = 0; KCL carries +-i.
                ct.emplace_back(static_cast<int>(br), static_cast<int>(br), el.value);
                if (a >= 0) {
                    gt.emplace_back(static_cast<int>(br), static_cast<int>(a), -1.0);
                    gt.emplace_back(static_cast<int>(a), static_cast<int>(br), 1.0);
                }
                if (b >= 0) {
                    gt.emplace_back(static_cast<int>(br), static_cast<int>(b), 1.0);
                    gt.emplace_back(static_cast<int>(b), static_cast<int>(br), -1.0);
                }
                break;
            }
            case 'I': {
                // Current flows a -> b through the source: injected at b.
                double v0 = el.source.value_at0(), v1 = el.source.slope_at0();
                if (b >= 0) {
                    u0(b) += v0;
                    u1(b) += v1;
                }
                if (a >= 0) {
                    u0(a) -= v0;
                    u1(a) -= v1;
                }
                break;
            }
        }
    }

    DaeSystem& sys = stamp.system;
    sys.n_dim = N;
    sys.C = SpMat(N, N);
    sys.C.setFromTriplets(ct.begin(), ct.end());
    sys.G = SpMat(N, N);
    sys.G.setFromTriplets(gt.begin(), gt.end());
    sys.C.makeCompressed();
    sys.G.makeCompressed();
    sys.u0 = u0;
    sys.u1 = u1;
    sys.x0 = Vec::Zero(N);

    // Resistive reachability from ground.
    std::unordered_map<std::string, std::vector<std::string>> radj;
    for (const Element& el : netlist.elements) {
        if (el.kind != 'R') continue;
        radj[el.node_a].push_back(el.node_b);
        radj[el.node_b].push_back(el.node_a);
    }
    std::unordered_set<std::string> reached{"0"};
    std::queue<std::string> frontier;
    frontier.push("0");
    while (!frontier.empty()) {
        std::string cur = std::move(frontier.front());
        frontier.pop();
        for (const std::string& next : radj[cur]) {
            if (reached.insert(next).second) frontier.push(next);
        }
    }
    Index unreached = 0;
    for (const std::string& name : node_order) {
        if (!reached.count(name)) ++unreached;
    }
    if (unreached > 0) {
        stamp.warnings.push_back(std::to_string(unreached) +
                                 " node(s) lack a resistive path to ground");
    }
    return stamp;
}

}  // namespace stiffkrylov
