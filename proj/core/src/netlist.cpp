#include "stiffkrylov/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "stiffkrylov/errors.hpp"
#include "stiffkrylov/io.hpp"

namespace stiffkrylov {

double SourceSpec::value_at0() const {
    switch (kind) {
        case Kind::dc: return dc;
        case Kind::ramp: return i0;
        case Kind::pwl: break;
    }
    if (points.empty()) return 0.0;
    if (points.front().first >= 0.0) return points.front().second;
    for (size_t i = 1; i < points.size(); ++i) {
        if (points[i].first >= 0.0) {
            auto [t0, v0] = points[i - 1];
            auto [t1, v1] = points[i];
            return v0 + (v1 - v0) * (0.0 - t0) / (t1 - t0);
        }
    }
    return points.back().second;
}

double SourceSpec::slope_at0() const {
    switch (kind) {
        case Kind::dc: return 0.0;
        case Kind::ramp: return slope;
        case Kind::pwl: break;
    }
    for (size_t i = 1; i < points.size(); ++i) {
        if (points[i].first > 0.0) {
            auto [t0, v0] = points[i - 1];
            auto [t1, v1] = points[i];
            if (t0 <= 0.0) return (v1 - v0) / (t1 - t0);
            break;  // first segment starts after t=0: treat as constant there
        }
    }
    return 0.0;
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw ValidationError("netlist line " + std::to_string(line) + ": " + what);
}

double parse_value(const std::string& tok, int line) {
    size_t pos = 0;
    double v;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        parse_fail(line, "malformed value '" + tok + "'");
    }
    std::string suffix = tok.substr(pos);
    std::transform(suffix.begin(), suffix.end(), suffix.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (suffix.empty()) return v;
    if (suffix.rfind("meg", 0) == 0) return v * 1e6;  // before the 'm' (milli) case
    switch (suffix[0]) {
        case 'f': return v * 1e-15;
        case 'p': return v * 1e-12;
        case 'n': return v * 1e-9;
        case 'u': return v * 1e-6;
        case 'm': return v * 1e-3;
        case 'k': return v * 1e3;
        case 'g': return v * 1e9;
        default: parse_fail(line, "unknown unit suffix '" + suffix + "'");
    }
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

SourceSpec parse_source(const std::vector<std::string>& toks, size_t start, int line) {
    SourceSpec src;
    std::string joined;
    for (size_t i = start; i < toks.size(); ++i) {
        if (i > start) joined += " ";
        joined += toks[i];
    }
    if (joined.empty()) parse_fail(line, "current source needs a value");
    std::string upper = joined;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    auto parse_args = [&](const std::string& inner) {
        std::vector<double> vals;
        for (const std::string& t : tokenize(inner)) vals.push_back(parse_value(t, line));
        return vals;
    };
    auto inner_of = [&](size_t open) {
        size_t close = joined.rfind(')');
        if (close == std::string::npos || close <= open) {
            parse_fail(line, "unbalanced parentheses in source");
        }
        std::string inner = joined.substr(open + 1, close - open - 1);
        std::replace(inner.begin(), inner.end(), ',', ' ');
        return inner;
    };
    if (upper.rfind("RAMP", 0) == 0) {
        auto vals = parse_args(inner_of(joined.find('(')));
        if (vals.size() != 2) parse_fail(line, "RAMP needs (i0 slope)");
        src.kind = SourceSpec::Kind::ramp;
        src.i0 = vals[0];
        src.slope = vals[1];
        return src;
    }
    if (upper.rfind("PWL", 0) == 0) {
        auto vals = parse_args(inner_of(joined.find('(')));
        if (vals.size() < 4 || vals.size() % 2 != 0) {
            parse_fail(line, "PWL needs an even number of (t v) values, at least two pairs");
        }
        src.kind = SourceSpec::Kind::pwl;
        for (size_t i = 0; i < vals.size(); i += 2) {
            if (!src.points.empty() && vals[i] <= src.points.back().first) {
                parse_fail(line, "PWL times must be strictly increasing");
            }
            src.points.emplace_back(vals[i], vals[i + 1]);
        }
        return src;
    }
    if (upper.rfind("DC", 0) == 0) {
        auto vals = parse_args(joined.substr(2));
        if (vals.size() != 1) parse_fail(line, "DC needs one value");
        src.dc = vals[0];
        return src;
    }
    auto vals = parse_args(joined);
    if (vals.size() != 1) parse_fail(line, "current source needs one value");
    src.dc = vals[0];
    return src;
}

}  // namespace

Netlist parse_netlist(const std::string& text) {
    Netlist netlist;
    std::unordered_set<std::string> names;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool seen_element = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '*') {
            if (!seen_element && netlist.title.empty()) {
                size_t start = line.find_first_not_of(" \t", first + 1);
                if (start != std::string::npos) netlist.title = line.substr(start);
            }
            continue;
        }
        auto toks = tokenize(line);
        if (toks.size() < 4) parse_fail(lineno, "expected: name node_a node_b value");
        Element el;
        el.name = toks[0];
        el.kind = static_cast<char>(std::toupper(static_cast<unsigned char>(toks[0][0])));
        if (el.kind != 'R' && el.kind != 'C' && el.kind != 'L' && el.kind != 'I') {
            parse_fail(lineno, "unknown element kind '" + std::string(1, toks[0][0]) + "'");
        }
        if (!names.insert(el.name).second) {
            parse_fail(lineno, "duplicate element name '" + el.name + "'");
        }
        el.node_a = toks[1];
        el.node_b = toks[2];
        el.line = lineno;
        if (el.kind == 'I') {
            el.source = parse_source(toks, 3, lineno);
        } else {
            if (toks.size() != 4) parse_fail(lineno, "expected exactly one value");
            el.value = parse_value(toks[3], lineno);
            if (!(el.value > 0.0)) parse_fail(lineno, "element values must be positive");
        }
        netlist.elements.push_back(std::move(el));
        seen_element = true;
    }
    return netlist;
}

std::string serialize_netlist(const Netlist& netlist) {
    std::ostringstream out;
    if (!netlist.title.empty()) out << "* " << netlist.title << "\n";
    for (const Element& el : netlist.elements) {
        out << el.name << " " << el.node_a << " " << el.node_b << " ";
        if (el.kind != 'I') {
            out << format_double(el.value);
        } else {
            switch (el.source.kind) {
                case SourceSpec::Kind::dc:
                    out << "DC " << format_double(el.source.dc);
                    break;
                case SourceSpec::Kind::ramp:
                    out << "RAMP(" << format_double(el.source.i0) << " "
                        << format_double(el.source.slope) << ")";
                    break;
                case SourceSpec::Kind::pwl: {
                    out << "PWL(";
                    bool first = true;
                    for (auto [t, v] : el.source.points) {
                        if (!first) out << " ";
                        out << format_double(t) << " " << format_double(v);
                        first = false;
                    }
                    out << ")";
                    break;
                }
            }
        }
        out << "\n";
    }
    return out.str();
}

Netlist read_netlist_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_netlist(buf.str());
}

void write_netlist_file(const std::string& path, const Netlist& netlist) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << serialize_netlist(netlist);
}

namespace {

class ValueDraw {
public:
    explicit ValueDraw(uint64_t seed) : rng_(seed) {}
    double log_uniform(const std::array<double, 2>& range) {
        if (!(range[0] > 0.0) || range[1] < range[0]) {
            throw ValidationError("value ranges must satisfy 0 < lo <= hi");
        }
        if (range[0] == range[1]) return range[0];
        std::uniform_real_distribution<double> u(std::log(range[0]), std::log(range[1]));
        return std::exp(u(rng_));
    }
    double uniform01() {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        return u(rng_);
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace

Netlist gen_rlc_mesh(const MeshParams& params) {
    if (params.rows < 2 || params.cols < 2) {
        throw ValidationError("mesh needs at least a 2x2 grid");
    }
    ValueDraw draw(params.seed);
    Netlist netlist;
    netlist.title = "generated rlc mesh " + std::to_string(params.rows) + "x" +
                    std::to_string(params.cols);
    auto node = [&](int r, int c) {
        return "n" + std::to_string(r) + "_" + std::to_string(c);
    };
    int r_count = 0, l_count = 0, c_count = 0, mid_count = 0;
    auto add_edge = [&](const std::string& a, const std::string& b) {
        bool inductive = draw.uniform01() < params.ind_fraction;
        if (!inductive) {
            netlist.elements.push_back(Element{'R', "R" + std::to_string(++r_count), a, b,
                                               draw.log_uniform(params.r_range), {}, 0});
            return;
        }
        std::string mid = "m" + std::to_string(++mid_count);
        netlist.elements.push_back(Element{'R', "R" + std::to_string(++r_count), a, mid,
                                           draw.log_uniform(params.r_range), {}, 0});
        netlist.elements.push_back(Element{'L', "L" + std::to_string(++l_count), mid, b,
                                           draw.log_uniform(params.l_range), {}, 0});
    };
    // Grounding resistor, then the grid edges in row-major order.
    netlist.elements.push_back(Element{'R', "R" + std::to_string(++r_count), node(0, 0), "0",
                                       draw.log_uniform(params.r_range), {}, 0});
    for (int r = 0; r < params.rows; ++r) {
        for (int c = 0; c < params.cols; ++c) {
            if (c + 1 < params.cols) add_edge(node(r, c), node(r, c + 1));
            if (r + 1 < params.rows) add_edge(node(r, c), node(r + 1, c));
        }
    }
    for (int r = 0; r < params.rows; ++r) {
        for (int c = 0; c < params.cols; ++c) {
            if (draw.uniform01() < params.cap_fraction) {
                netlist.elements.push_back(Element{'C', "C" + std::to_string(++c_count),
                                                   node(r, c), "0",
                                                   draw.log_uniform(params.c_range), {}, 0});
            }
        }
    }
    if (params.with_source) {
        Element src{'I', "I1", "0", node(params.rows - 1, params.cols - 1), 0, {}, 0};
        src.source.kind = SourceSpec::Kind::ramp;
        src.source.i0 = params.source_i0;
        src.source.slope = params.source_slope;
        netlist.elements.push_back(std::move(src));
    }
    return netlist;
}

Netlist gen_paper_like_mesh(uint64_t seed) {
    const int backbone = 187, stubs = 160, cross = 73, stride = 8;
    ValueDraw draw(seed);
    std::array<double, 2> r_range{0.5, 2.0};
    std::array<double, 2> c_range{1e-12, 1e-9};
    std::array<double, 2> l_range{1e-10, 1e-8};
    Netlist netlist;
    netlist.title = "pdn-like rlc network";
    int r_count = 0;
    auto add_r = [&](const std::string& a, const std::string& b) {
        netlist.elements.push_back(Element{'R', "R" + std::to_string(++r_count), a, b,
                                           draw.log_uniform(r_range), {}, 0});
    };
    add_r("1", "0");
    for (int i = 1; i < backbone; ++i) add_r(std::to_string(i), std::to_string(i + 1));
    for (int i = 1; i <= cross; ++i) {
        add_r(std::to_string(2 * i - 1), std::to_string(2 * i - 1 + stride));
    }
    for (int j = 1; j <= stubs; ++j) {
        std::string anchor = std::to_string((j - 1) % backbone + 1);
        std::string stub = std::to_string(backbone + j);
        netlist.elements.push_back(Element{'L', "L" + std::to_string(j), anchor, stub,
                                           draw.log_uniform(l_range), {}, 0});
    }
    for (int j = 1; j <= stubs; ++j) {
        std::string stub = std::to_string(backbone + j);
        netlist.elements.push_back(Element{'C', "C" + std::to_string(j), stub, "0",
                                           draw.log_uniform(c_range), {}, 0});
    }
    Element src{'I', "I1", "0", std::to_string(backbone + 1), 0, {}, 0};
    src.source.kind = SourceSpec::Kind::ramp;
    src.source.i0 = 0.0;
    src.source.slope = 1e-3;
    netlist.elements.push_back(std::move(src));
    return netlist;
}

}  // namespace stiffkrylov
