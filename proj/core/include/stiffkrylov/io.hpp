#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "stiffkrylov/types.hpp"

namespace stiffkrylov {

struct StepResult;

/// Shortest round-trip decimal representation.
std::string format_double(double x);

void write_matrix_market_sparse(const std::string& path, const SpMat& a,
                                bool symmetric = false);
void write_matrix_market_dense(const std::string& path, const Mat& a);
SpMat read_matrix_market(const std::string& path);

Vec read_vector_csv(const std::string& path);
void write_vector_csv(const std::string& path, const Vec& v);
void write_csv_matrix(const std::string& path, const Mat& a);

void write_json_file(const std::string& path, const nlohmann::json& j);

enum class OutputFormat { csv, json, matrix_market };

/// StepResult files under dir: JSON inline vectors, or CSV/Matrix Market
/// sidecars plus a small JSON summary. Output is bit-stable per input.
void write_outputs(const StepResult& result, const std::string& dir, OutputFormat format);

}  // namespace stiffkrylov
