#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stiffkrylov/dae_system.hpp"
#include "stiffkrylov/errors.hpp"
#include "stiffkrylov/mna.hpp"
#include "stiffkrylov/netlist.hpp"

using namespace stiffkrylov;

TEST_CASE("element parsing with SI suffixes") {
    Netlist nl = parse_netlist(
        "* suffix zoo\n"
        "r1 1 0 1k\n"
        "r2 1 2 1meg\n"
        "r3 2 0 2.5m\n"
        "c1 1 0 10p\n"
        "c2 2 0 3n\n"
        "l1 1 2 4u\n"
        "r4 2 3 7g\n"
        "c3 3 0 2f\n");
    CHECK(nl.title == "suffix zoo");
    REQUIRE(nl.elements.size() == 8);
    CHECK(nl.elements[0].value == doctest::Approx(1e3));
    CHECK(nl.elements[1].value == doctest::Approx(1e6));
    CHECK(nl.elements[2].value == doctest::Approx(2.5e-3));
    CHECK(nl.elements[3].value == doctest::Approx(1e-11));
    CHECK(nl.elements[4].value == doctest::Approx(3e-9));
    CHECK(nl.elements[5].value == doctest::Approx(4e-6));
    CHECK(nl.elements[6].value == doctest::Approx(7e9));
    CHECK(nl.elements[7].value == doctest::Approx(2e-15));
}

TEST_CASE("source forms and their linearization at t = 0") {
    Netlist nl = parse_netlist(
        "i1 0 1 2.5\n"
        "i2 0 1 DC 1m\n"
        "i3 0 1 RAMP(0.5 2.0)\n"
        "i4 0 1 PWL(0 1, 1 3, 2 3)\n");
    CHECK(nl.elements[0].source.value_at0() == doctest::Approx(2.5));
    CHECK(nl.elements[0].source.slope_at0() == doctest::Approx(0.0));
    CHECK(nl.elements[1].source.value_at0() == doctest::Approx(1e-3));
    CHECK(nl.elements[2].source.value_at0() == doctest::Approx(0.5));
    CHECK(nl.elements[2].source.slope_at0() == doctest::Approx(2.0));
    CHECK(nl.elements[3].source.value_at0() == doctest::Approx(1.0));
    CHECK(nl.elements[3].source.slope_at0() == doctest::Approx(2.0));
}

TEST_CASE("parse failures carry the offending line") {
    CHECK_THROWS_AS(parse_netlist("r1 1 0\n"), ValidationError);
    CHECK_THROWS_AS(parse_netlist("q1 1 0 5\n"), ValidationError);
    CHECK_THROWS_AS(parse_netlist("r1 1 0 5xx\n"), ValidationError);
    CHECK_THROWS_AS(parse_netlist("r1 1 0 -3\n"), ValidationError);
    CHECK_THROWS_AS(parse_netlist("r1 1 0 1\nr1 2 0 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_netlist("i1 0 1 PWL(1 2 0 3)\n"), ValidationError);
    CHECK_THROWS_AS(parse_netlist("i1 0 1 RAMP(1)\n"), ValidationError);
    try {
        parse_netlist("r1 1 0 1\nbogus\n");
        FAIL("expected a parse error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("serialization round-trips") {
    Netlist nl = parse_netlist(
        "* roundtrip\n"
        "r1 n1 0 1.5k\n"
        "c1 n1 0 2.2n\n"
        "l1 n1 n2 1u\n"
        "i1 0 n2 RAMP(0 1e-3)\n");
    Netlist again = parse_netlist(serialize_netlist(nl));
    REQUIRE(again.elements.size() == nl.elements.size());
    for (size_t i = 0; i < nl.elements.size(); ++i) {
        CHECK(again.elements[i].name == nl.elements[i].name);
        CHECK(again.elements[i].node_a == nl.elements[i].node_a);
        CHECK(again.elements[i].value == nl.elements[i].value);
    }
    CHECK(serialize_netlist(again) == serialize_netlist(nl));
}

TEST_CASE("mesh generator is deterministic and matches the golden fixture") {
    MeshParams p;
    p.rows = 2;
    p.cols = 2;
    p.r_range = {0.5, 2.0};
    p.c_range = {1e-12, 1e-9};
    p.l_range = {1e-10, 1e-8};
    p.cap_fraction = 0.75;
    p.ind_fraction = 0.5;
    p.seed = 42;
    std::string a = serialize_netlist(gen_rlc_mesh(p));
    std::string b = serialize_netlist(gen_rlc_mesh(p));
    CHECK(a == b);
    p.seed = 43;
    CHECK(serialize_netlist(gen_rlc_mesh(p)) != a);

    std::ifstream golden(std::string(TEST_DATA_DIR) + "/mesh_2x2.cir");
    REQUIRE(golden.good());
    std::stringstream buf;
    buf << golden.rdbuf();
    CHECK(a == buf.str());
}

TEST_CASE("preset mesh has the published element counts") {
    Netlist nl = gen_paper_like_mesh(7);
    int nr = 0, nc = 0, nl_count = 0, ni = 0;
    for (const auto& e : nl.elements) {
        if (e.kind == 'R') ++nr;
        if (e.kind == 'C') ++nc;
        if (e.kind == 'L') ++nl_count;
        if (e.kind == 'I') ++ni;
    }
    CHECK(nr == 260);
    CHECK(nc == 160);
    CHECK(nl_count == 160);
    CHECK(ni == 1);
    CHECK(serialize_netlist(gen_paper_like_mesh(7)) == serialize_netlist(nl));

    MnaStamp stamp = stamp_mna(nl);
    CHECK(stamp.system.n_dim == 507);
    auto P = range_projector(stamp.system.C);
    CHECK(P.n == 320);
}

TEST_CASE("MNA stamping of a small circuit") {
    Netlist nl = parse_netlist(
        "r1 1 0 2\n"
        "r2 1 2 4\n"
        "c1 1 0 3\n"
        "l1 2 0 5\n"
        "i1 0 1 DC 1.5\n");
    MnaStamp stamp = stamp_mna(nl);
    const DaeSystem& sys = stamp.system;
    REQUIRE(sys.n_dim == 3);  // two nodes + one inductor current
    const Index n1 = stamp.node_index.at("1");
    const Index n2 = stamp.node_index.at("2");
    const Index br = stamp.branch_index.at("l1");

    Mat g = Mat(sys.G);
    CHECK(g(n1, n1) == doctest::Approx(0.5 + 0.25));
    CHECK(g(n1, n2) == doctest::Approx(-0.25));
    CHECK(g(n2, n2) == doctest::Approx(0.25));
    // Inductor branch row: L di/dt - v(a) + v(b) = 0, current leaves node a.
    CHECK(g(br, n2) == doctest::Approx(-1.0));
    CHECK(g(n2, br) == doctest::Approx(1.0));

    Mat c = Mat(sys.C);
    CHECK(c(n1, n1) == doctest::Approx(3.0));
    CHECK(c(br, br) == doctest::Approx(5.0));
    CHECK(c.diagonal().cwiseAbs().sum() == doctest::Approx(8.0));

    CHECK(sys.u0(n1) == doctest::Approx(1.5));
    CHECK(sys.u1.norm() == 0.0);
    CHECK(stamp.warnings.empty());
}

TEST_CASE("stamping warns about nodes without a resistive path to ground") {
    Netlist nl = parse_netlist(
        "r1 1 0 1\n"
        "c1 2 0 1\n"  // node 2 is only reachable through the capacitor
        "r2 2 3 1\n"
        "c2 3 0 1\n");
    MnaStamp stamp = stamp_mna(nl);
    REQUIRE_FALSE(stamp.warnings.empty());
    CHECK(stamp.warnings[0].find("resistive path") != std::string::npos);
}

TEST_CASE("netlist file io") {
    namespace fs = std::filesystem;
    fs::path p = fs::temp_directory_path() / "stiffkrylov_netlist_io.cir";
    Netlist nl = parse_netlist("* t\nr1 1 0 2\nc1 1 0 1n\n");
    write_netlist_file(p.string(), nl);
    Netlist back = read_netlist_file(p.string());
    CHECK(serialize_netlist(back) == serialize_netlist(nl));
    fs::remove(p);
    CHECK_THROWS_AS(read_netlist_file("/nonexistent/path.cir"), ValidationError);
}
