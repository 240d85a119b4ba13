#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "stiffkrylov/evolve.hpp"
#include "stiffkrylov/io.hpp"
#include "testutil.hpp"

using namespace stiffkrylov;
using namespace testutil;
namespace fs = std::filesystem;

TEST_CASE("shortest round-trip formatting") {
    for (double x : {0.0, 1.0, -2.5, 0.1, 1e-300, 3.14159265358979, 5e-14, -5e-10}) {
        std::string s = format_double(x);
        double back = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(ec == std::errc());
        CHECK(back == x);
    }
    CHECK(format_double(0.1).size() <= 4);  // shortest form, not 0.1000000000000001
}

TEST_CASE("matrix market round-trip, general and symmetric") {
    std::mt19937_64 rng(14);
    fs::path dir = fs::temp_directory_path() / "stiffkrylov_io_test";
    fs::create_directories(dir);

    SpMat a(5, 4);
    a.insert(0, 0) = 1.5;
    a.insert(2, 1) = -2.25;
    a.insert(4, 3) = 1e-12;
    a.makeCompressed();
    write_matrix_market_sparse((dir / "a.mtx").string(), a);
    SpMat back = read_matrix_market((dir / "a.mtx").string());
    CHECK(Mat(back).isApprox(Mat(a), 0.0));

    DaeSystem sys = definite_system(10, 6, 90);
    write_matrix_market_sparse((dir / "c.mtx").string(), sys.C, true);
    SpMat cback = read_matrix_market((dir / "c.mtx").string());
    CHECK(Mat(cback).isApprox(Mat(sys.C), 0.0));

    Mat d = randn_mat(4, rng);
    write_matrix_market_dense((dir / "d.mtx").string(), d);
    SpMat dback = read_matrix_market((dir / "d.mtx").string());
    CHECK(Mat(dback).isApprox(d, 0.0));

    fs::remove_all(dir);
}

TEST_CASE("csv vector and matrix io") {
    fs::path dir = fs::temp_directory_path() / "stiffkrylov_csv_test";
    fs::create_directories(dir);
    std::mt19937_64 rng(8);
    Vec v = randn_vec(7, rng);
    write_vector_csv((dir / "v.csv").string(), v);
    Vec back = read_vector_csv((dir / "v.csv").string());
    CHECK((back - v).norm() == 0.0);
    write_csv_matrix((dir / "m.csv").string(), randn_mat(3, rng));
    CHECK(fs::file_size(dir / "m.csv") > 0);
    fs::remove_all(dir);
}

TEST_CASE("step result export in all three formats") {
    DaeSystem sys = definite_system(12, 8, 44);
    SingleStepOptions opts;
    opts.m_max = 10;
    opts.attach_posterior = true;
    StepResult res = single_step(sys, 0.3, opts);

    fs::path dir = fs::temp_directory_path() / "stiffkrylov_out_test";

    fs::remove_all(dir);
    fs::create_directories(dir / "json");
    write_outputs(res, (dir / "json").string(), OutputFormat::json);
    std::ifstream f(dir / "json" / "solution.json");
    REQUIRE(f.good());
    nlohmann::json j;
    f >> j;
    CHECK(j["x"].size() == 12);
    CHECK(j["t"].get<double>() == 0.3);
    CHECK(j.contains("posterior"));

    fs::create_directories(dir / "csv");
    write_outputs(res, (dir / "csv").string(), OutputFormat::csv);
    Vec x = read_vector_csv((dir / "csv" / "x.csv").string());
    CHECK((x - res.x_full).norm() == 0.0);

    fs::create_directories(dir / "mm");
    write_outputs(res, (dir / "mm").string(), OutputFormat::matrix_market);
    CHECK(fs::exists(dir / "mm" / "x.mtx"));

    // Bit-stable re-export.
    std::stringstream first;
    first << std::ifstream((dir / "json" / "solution.json").string()).rdbuf();
    write_outputs(res, (dir / "json").string(), OutputFormat::json);
    std::stringstream second;
    second << std::ifstream((dir / "json" / "solution.json").string()).rdbuf();
    CHECK(first.str() == second.str());

    fs::remove_all(dir);
}
