#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "npde/discretize.hpp"
#include "npde/dynamics.hpp"
#include "npde/field.hpp"
#include "npde/kernels.hpp"
#include "npde/training.hpp"

namespace npde::io {

inline constexpr int schema_version = 1;

using nlohmann::json;

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits, enough to read back the same double.
std::string format_double(double v);

// Fields: CSV with header `q,value`, or JSON.
void write_field_csv(std::ostream& os, const Field& field);
/// Grid spacing and origin are recovered from the q column, which must be uniform.
Field read_field_csv(std::istream& is, Boundary boundary = Boundary::Periodic);
Field read_field_csv(const std::filesystem::path& path, Boundary boundary = Boundary::Periodic);
/// Reads values onto a known grid; the q column must match its nodes.
Field read_field_csv(std::istream& is, const Grid1D& grid);
Field read_field_csv(const std::filesystem::path& path, const Grid1D& grid);

json to_json(const Grid1D& grid);
Grid1D grid_from_json(const json& j);
json to_json(const Field& field);
Field field_from_json(const json& j);

// Dense matrices: row-major CSV without header.
void write_matrix_csv(std::ostream& os, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);
Matrix read_matrix_csv(const std::filesystem::path& path);
/// Loads a square matrix as a kernel on the grid; rejects non-square input.
DenseKernel read_dense_kernel_csv(const std::filesystem::path& path, const Grid1D& grid);
json to_json(const DenseKernel& kernel);

json to_json(const MomentProfile& profile);
json to_json(const ExplainReport& report);

/// Columns `step,node,q,value`.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);
json to_json(const AttractorResult& result);

/// {"U", "D", "R"}: scalars in homogeneous mode, arrays otherwise.
json to_json(const ADRParams& params);
ADRParams params_from_json(const json& j, ParamMode mode, std::size_t nodes, std::size_t layers);
/// Mode, node and layer counts sit beside `params` at the top level.
json to_json(const TrainResult& result);
TrainResult train_result_from_json(const json& j);
/// Columns `iter,loss`.
void write_loss_csv(std::ostream& os, const std::vector<double>& losses);

/// Columns `cluster_id,x1,...,xd` with a header row.
struct ClusterInput {
  std::vector<std::vector<double>> points;
  std::vector<std::size_t> assignments;
};
ClusterInput read_cluster_csv(std::istream& is);
json to_json(const ClusterSet& set);

/// {"kernel": {"shape": [n, n, Q, Q], "data": [...]}, "bias": {"shape": [n, Q], "data": [...]}}
json to_json(const QuadratureSamples& samples);
QuadratureSamples quadrature_samples_from_json(const json& j);

}  // namespace npde::io
