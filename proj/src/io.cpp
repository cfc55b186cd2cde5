#include "npde/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace npde::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw FormatError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

struct FieldRows {
  std::vector<double> q;
  std::vector<double> v;
};

FieldRows read_field_rows(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "q,value") {
    throw FormatError("field CSV must start with the header 'q,value'");
  }
  FieldRows rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 2) throw FormatError("line " + std::to_string(lineno) + ": expected 2 columns");
    rows.q.push_back(parse_double(cells[0], lineno));
    rows.v.push_back(parse_double(cells[1], lineno));
  }
  return rows;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

template <class T>
json array(const std::vector<T>& v) {
  return json(v);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_field_csv(std::ostream& os, const Field& field) {
  os << "q,value\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    os << format_double(field.grid().node(i)) << ',' << format_double(field[i]) << '\n';
  }
}

Field read_field_csv(std::istream& is, Boundary boundary) {
  const auto rows = read_field_rows(is);
  const auto n = rows.q.size();
  if (n < 2) throw FormatError("field CSV needs at least 2 rows");
  const double delta = (rows.q.back() - rows.q.front()) / static_cast<double>(n - 1);
  const Grid1D grid(n, delta, rows.q.front(), boundary);
  for (std::size_t i = 0; i < n; ++i) {
    if (!close(rows.q[i], grid.node(i))) throw FormatError("field CSV q column is not uniform");
  }
  return Field(grid, rows.v);
}

Field read_field_csv(const std::filesystem::path& path, Boundary boundary) {
  auto in = open_input(path);
  return read_field_csv(in, boundary);
}

Field read_field_csv(std::istream& is, const Grid1D& grid) {
  const auto rows = read_field_rows(is);
  if (rows.q.size() != grid.size()) {
    throw FormatError("field CSV has " + std::to_string(rows.q.size()) + " rows, grid has " +
                      std::to_string(grid.size()) + " nodes");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!close(rows.q[i], grid.node(i))) {
      throw FormatError("field CSV node " + std::to_string(i) + " is at q=" +
                        format_double(rows.q[i]) + ", grid expects " + format_double(grid.node(i)));
    }
  }
  return Field(grid, rows.v);
}

Field read_field_csv(const std::filesystem::path& path, const Grid1D& grid) {
  auto in = open_input(path);
  return read_field_csv(in, grid);
}

json to_json(const Grid1D& grid) {
  return {{"n", grid.size()},
          {"delta", grid.delta()},
          {"origin", grid.origin()},
          {"boundary", std::string(to_string(grid.boundary()))}};
}

Grid1D grid_from_json(const json& j) {
  return Grid1D(j.at("n").get<std::size_t>(), j.at("delta").get<double>(),
                j.value("origin", 0.0), parse_boundary(j.value("boundary", std::string("periodic"))));
}

json to_json(const Field& field) {
  return {{"schema_version", schema_version},
          {"grid", to_json(field.grid())},
          {"values", std::vector<double>(field.values().begin(), field.values().end())}};
}

Field field_from_json(const json& j) {
  return Field(grid_from_json(j.at("grid")), j.at("values").get<std::vector<double>>());
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(parse_double(cell, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("line " + std::to_string(lineno) + ": ragged matrix row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("matrix CSV is empty");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_matrix_csv(in);
}

DenseKernel read_dense_kernel_csv(const std::filesystem::path& path, const Grid1D& grid) {
  auto m = read_matrix_csv(path);
  if (m.rows != m.cols) {
    throw FormatError("kernel matrix must be square, got " + std::to_string(m.rows) + "x" +
                      std::to_string(m.cols));
  }
  if (m.rows != grid.size()) {
    throw FormatError("kernel matrix is " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                      " but the grid has " + std::to_string(grid.size()) + " nodes");
  }
  return DenseKernel(grid, std::move(m));
}

json to_json(const DenseKernel& kernel) {
  return {{"schema_version", schema_version},
          {"grid", to_json(kernel.grid)},
          {"rows", kernel.matrix.rows},
          {"cols", kernel.matrix.cols},
          {"data", kernel.matrix.data}};
}

json to_json(const MomentProfile& profile) {
  return {{"schema_version", schema_version},
          {"max_order", profile.max_order},
          {"moments", profile.moments}};
}

json to_json(const ExplainReport& report) {
  json notes = json::array();
  for (const auto& note : report.notes) {
    json tags = json::array();
    for (auto t : note.tags) tags.push_back(std::string(to_string(t)));
    notes.push_back({{"order", note.order}, {"tags", tags}});
  }
  return {{"schema_version", schema_version},
          {"R_hat", report.R_hat},
          {"U_hat", report.U_hat},
          {"D_hat", report.D_hat},
          {"notes", notes}};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  os << "step,node,q,value\n";
  for (std::size_t t = 0; t < trajectory.states.size(); ++t) {
    const auto& s = trajectory.states[t];
    for (std::size_t i = 0; i < s.size(); ++i) {
      os << t << ',' << i << ',' << format_double(s.grid().node(i)) << ',' << format_double(s[i])
         << '\n';
    }
  }
}

json to_json(const AttractorResult& result) {
  return {{"schema_version", schema_version},
          {"residual", result.residual},
          {"iterations", result.iterations},
          {"converged", result.converged},
          {"z_star", to_json(result.z_star)}};
}

json to_json(const ADRParams& params) {
  if (params.mode == ParamMode::Homogeneous) {
    return {{"U", params.U[0]}, {"D", params.D[0]}, {"R", params.R[0]}};
  }
  return {{"U", params.U}, {"D", params.D}, {"R", params.R}};
}

ADRParams params_from_json(const json& j, ParamMode mode, std::size_t nodes, std::size_t layers) {
  if (mode == ParamMode::Homogeneous) {
    return ADRParams::homogeneous(j.at("U").get<double>(), j.at("D").get<double>(),
                                  j.at("R").get<double>());
  }
  ADRParams p{mode,
              nodes,
              mode == ParamMode::OnTheFly ? layers : 1,
              j.at("U").get<std::vector<double>>(),
              j.at("D").get<std::vector<double>>(),
              j.at("R").get<std::vector<double>>()};
  p.validate(nodes, p.layers);
  return p;
}

json to_json(const TrainResult& result) {
  return {{"schema_version", schema_version},
          {"mode", std::string(to_string(result.params.mode))},
          {"nodes", result.params.nodes},
          {"layers", result.params.layers},
          {"params", to_json(result.params)},
          {"loss_history", result.loss_history},
          {"converged", result.converged},
          {"iterations", result.iterations}};
}

TrainResult train_result_from_json(const json& j) {
  TrainResult r;
  r.params = params_from_json(j.at("params"), parse_param_mode(j.at("mode").get<std::string>()),
                              j.at("nodes").get<std::size_t>(), j.at("layers").get<std::size_t>());
  r.loss_history = j.at("loss_history").get<std::vector<double>>();
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<std::size_t>();
  return r;
}

void write_loss_csv(std::ostream& os, const std::vector<double>& losses) {
  os << "iter,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) os << i << ',' << format_double(losses[i]) << '\n';
}

ClusterInput read_cluster_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("cluster CSV is empty");
  const auto header = split(line);
  if (header.size() < 2 || header.front() != "cluster_id") {
    throw FormatError("cluster CSV header must be 'cluster_id,x1,...,xd'");
  }
  const auto dim = header.size() - 1;
  ClusterInput input;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != dim + 1) {
      throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) +
                        " columns");
    }
    const double id = parse_double(cells[0], lineno);
    if (id < 0 || id != std::floor(id)) {
      throw FormatError("line " + std::to_string(lineno) + ": cluster id must be a non-negative integer");
    }
    std::vector<double> point(dim);
    for (std::size_t x = 0; x < dim; ++x) point[x] = parse_double(cells[x + 1], lineno);
    input.points.push_back(std::move(point));
    input.assignments.push_back(static_cast<std::size_t>(id));
  }
  return input;
}

json to_json(const ClusterSet& set) {
  return {{"schema_version", schema_version},
          {"dimension", set.dimension},
          {"volumes", set.volumes},
          {"counts", set.counts},
          {"assignments", set.assignments},
          {"point_weights", set.point_weights}};
}

json to_json(const QuadratureSamples& s) {
  return {{"schema_version", schema_version},
          {"kernel", {{"shape", {s.n, s.n, s.q, s.q}}, {"data", s.kernel}}},
          {"bias", {{"shape", {s.n, s.q}}, {"data", s.bias}}}};
}

QuadratureSamples quadrature_samples_from_json(const json& j) {
  const auto kshape = j.at("kernel").at("shape").get<std::vector<std::size_t>>();
  const auto bshape = j.at("bias").at("shape").get<std::vector<std::size_t>>();
  if (kshape.size() != 4 || kshape[0] != kshape[1] || kshape[2] != kshape[3]) {
    throw FormatError("kernel samples need shape [n, n, Q, Q]");
  }
  if (bshape.size() != 2 || bshape[0] != kshape[0] || bshape[1] != kshape[2]) {
    throw FormatError("bias samples need shape [n, Q] matching the kernel");
  }
  return QuadratureSamples(kshape[0], kshape[2], j.at("kernel").at("data").get<std::vector<double>>(),
                           j.at("bias").at("data").get<std::vector<double>>());
}

}  // namespace npde::io
