#include "stiffkrylov/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "stiffkrylov/errors.hpp"
#include "stiffkrylov/evolve.hpp"

namespace stiffkrylov {

std::string format_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

void write_matrix_market_sparse(const std::string& path, const SpMat& a, bool symmetric) {
    std::ofstream out = open_out(path);
    out << "%%MatrixMarket matrix coordinate real "
        << (symmetric ? "symmetric" : "general") << "\n";
    Index nnz = 0;
    for (int k = 0; k < a.outerSize(); ++k) {
        for (SpMat::InnerIterator it(a, k); it; ++it) {
            if (symmetric && it.row() < it.col()) continue;
            ++nnz;
        }
    }
    out << a.rows() << " " << a.cols() << " " << nnz << "\n";
    for (int k = 0; k < a.outerSize(); ++k) {
        for (SpMat::InnerIterator it(a, k); it; ++it) {
            if (symmetric && it.row() < it.col()) continue;
            out << it.row() + 1 << " " << it.col() + 1 << " " << format_double(it.value())
                << "\n";
        }
    }
}

void write_matrix_market_dense(const std::string& path, const Mat& a) {
    std::ofstream out = open_out(path);
    out << "%%MatrixMarket matrix array real general\n";
    out << a.rows() << " " << a.cols() << "\n";
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            out << format_double(a(i, j)) << "\n";
        }
    }
}

SpMat read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0) {
        throw ValidationError("'" + path + "' is not a Matrix Market file");
    }
    bool symmetric = line.find("symmetric") != std::string::npos;
    bool array = line.find("array") != std::string::npos;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream header(line);
    Index rows = 0, cols = 0;
    long long nnz = 0;
    if (array) {
        header >> rows >> cols;
    } else {
        header >> rows >> cols >> nnz;
    }
    if (rows <= 0 || cols <= 0) {
        throw ValidationError("'" + path + "': bad Matrix Market header");
    }
    std::vector<Eigen::Triplet<double>> trips;
    if (array) {
        for (Index j = 0; j < cols; ++j) {
            for (Index i = 0; i < rows; ++i) {
                double v;
                if (!(in >> v)) throw ValidationError("'" + path + "': truncated data");
                if (v != 0.0) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
            }
        }
    } else {
        for (long long e = 0; e < nnz; ++e) {
            Index i, j;
            double v;
            if (!(in >> i >> j >> v)) throw ValidationError("'" + path + "': truncated data");
            if (i < 1 || i > rows || j < 1 || j > cols) {
                throw ValidationError("'" + path + "': entry index out of range");
            }
            trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
            if (symmetric && i != j) {
                trips.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
            }
        }
    }
    SpMat a(rows, cols);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    return a;
}

Vec read_vector_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    std::vector<double> vals;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            vals.push_back(std::stod(cell));
        }
    }
    Vec v(static_cast<Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v(static_cast<Index>(i)) = vals[i];
    return v;
}

void write_vector_csv(const std::string& path, const Vec& v) {
    std::ofstream out = open_out(path);
    for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << "\n";
}

void write_csv_matrix(const std::string& path, const Mat& a) {
    std::ofstream out = open_out(path);
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            if (j) out << ",";
            out << format_double(a(i, j));
        }
        out << "\n";
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

namespace {

nlohmann::json vec_to_json(const Vec& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

nlohmann::json summary_json(const StepResult& r) {
    return nlohmann::json{
        {"t", r.t},
        {"pruned_count", r.pruned_count},
        {"warning_unconverged", r.warning_unconverged},
        {"posterior",
         {{"bound", r.posterior.posterior_bound},
          {"beta_sup", r.posterior.beta_sup},
          {"residual_direction_norm", r.posterior.residual_direction_norm},
          {"heuristic", r.posterior.heuristic},
          {"cond_k", r.posterior.cond_k},
          {"omega", r.posterior.omega},
          {"omega_choice", r.posterior.omega_choice}}}};
}

}  // namespace

void write_outputs(const StepResult& result, const std::string& dir, OutputFormat format) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };
    switch (format) {
        case OutputFormat::json: {
            nlohmann::json j = summary_json(result);
            j["x"] = vec_to_json(result.x_full);
            j["x_dynamic"] = vec_to_json(result.x_r);
            j["x_algebraic"] = vec_to_json(result.x_n);
            write_json_file(path("solution.json"), j);
            break;
        }
        case OutputFormat::csv: {
            write_vector_csv(path("x.csv"), result.x_full);
            write_vector_csv(path("x_dynamic.csv"), result.x_r);
            write_vector_csv(path("x_algebraic.csv"), result.x_n);
            write_json_file(path("summary.json"), summary_json(result));
            break;
        }
        case OutputFormat::matrix_market: {
            write_matrix_market_dense(path("x.mtx"), result.x_full);
            write_matrix_market_dense(path("x_dynamic.mtx"), result.x_r);
            write_matrix_market_dense(path("x_algebraic.mtx"), result.x_n);
            write_json_file(path("summary.json"), summary_json(result));
            break;
        }
    }
}

}  // namespace stiffkrylov
