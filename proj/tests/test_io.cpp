#include <doctest.h>

#include <sstream>

#include "npde/io.hpp"
#include "oracles.hpp"

using namespace npde;
using oracle::Vec;

TEST_SUITE("io") {

TEST_CASE("doubles round trip through 17 digits") {
  oracle::Rng rng(61);
  for (int rep = 0; rep < 1000; ++rep) {
    const double v = rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-300, 300));
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("field CSV round trip") {
  oracle::Rng rng(62);
  const Grid1D g(9, 0.3, -1.2, Boundary::ZeroPad);
  const Field f(g, rng.vec(9, -1, 1));
  std::stringstream ss;
  io::write_field_csv(ss, f);
  CHECK(ss.str().rfind("q,value\n", 0) == 0);
  const auto text = ss.str();
  std::stringstream a(text), b(text);
  const auto back = io::read_field_csv(a, g);
  CHECK(oracle::to_vec(back) == oracle::to_vec(f));
  const auto inferred = io::read_field_csv(b, Boundary::ZeroPad);
  CHECK(inferred.size() == 9);
  CHECK(inferred.grid().delta() == doctest::Approx(0.3));
  CHECK(inferred.grid().origin() == doctest::Approx(-1.2));
  CHECK(oracle::to_vec(inferred) == oracle::to_vec(f));
}

TEST_CASE("field CSV errors") {
  std::stringstream no_header("1,2\n2,3\n");
  CHECK_THROWS_AS(io::read_field_csv(no_header), io::FormatError);
  std::stringstream ragged("q,value\n0,1\n1,2,3\n");
  CHECK_THROWS_AS(io::read_field_csv(ragged), io::FormatError);
  std::stringstream uneven("q,value\n0,1\n1,2\n3,4\n");
  CHECK_THROWS_AS(io::read_field_csv(uneven), io::FormatError);
  std::stringstream wrong_grid("q,value\n0,1\n1,2\n");
  CHECK_THROWS_AS(io::read_field_csv(wrong_grid, Grid1D(2, 0.5)), io::FormatError);
  std::stringstream junk("q,value\n0,abc\n1,2\n");
  CHECK_THROWS_AS(io::read_field_csv(junk), io::FormatError);
}

TEST_CASE("grid and field JSON") {
  const Grid1D g(3, 0.5, 1.0, Boundary::ZeroPad);
  CHECK(io::grid_from_json(io::to_json(g)) == g);
  const Field f(g, {1, 2, 3});
  const auto j = io::to_json(f);
  CHECK(j.contains("schema_version"));
  CHECK(oracle::to_vec(io::field_from_json(j)) == Vec{1, 2, 3});
}

TEST_CASE("matrix CSV") {
  Matrix m(2, 2);
  m(0, 0) = 1.0 / 3;
  m(1, 0) = -2.5;
  std::stringstream ss;
  io::write_matrix_csv(ss, m);
  const auto back = io::read_matrix_csv(ss);
  CHECK(back.rows == 2);
  CHECK(back.data == m.data);
  std::stringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(io::read_matrix_csv(ragged), io::FormatError);
}

TEST_CASE("trajectory CSV has one row per node and state") {
  const Grid1D g(4, 1.0);
  const auto tr = evolve(Field::constant(g, 0.5), assemble_adr_stencil(0.4, 0.15, 0.0, g), Field::zeros(g),
                         Activation::Tanh, RelaxConfig{1.0, 9, 0.0});
  std::stringstream ss;
  io::write_trajectory_csv(ss, tr);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "step,node,q,value");
  std::size_t rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 10 * 4);
}

TEST_CASE("train result JSON") {
  TrainResult r{ADRParams::homogeneous(0.1, 0.2, 0.3), {1.0, 0.5}, false, 1};
  const auto j = io::to_json(r);
  CHECK(j["params"].size() == 3);
  CHECK(j["mode"] == "homogeneous");
  CHECK(j["schema_version"] == io::schema_version);
  const auto back = io::train_result_from_json(j);
  CHECK(back.params.flatten() == r.params.flatten());
  CHECK(back.loss_history == r.loss_history);

  TrainResult o{ADRParams::zeros(ParamMode::OnTheFly, 3, 2), {2.0}, true, 0};
  const auto bo = io::train_result_from_json(io::to_json(o));
  CHECK(bo.params.mode == ParamMode::OnTheFly);
  CHECK(bo.params.count() == 18);
  CHECK(bo.converged);

  std::stringstream ss;
  io::write_loss_csv(ss, {1.0, 0.5});
  CHECK(ss.str() == "iter,loss\n0,1\n1,0.5\n");
}

TEST_CASE("cluster CSV") {
  std::stringstream ss("cluster_id,x1,x2\n0,0,0\n0,2,1\n1,5,5\n");
  const auto in = io::read_cluster_csv(ss);
  CHECK(in.points.size() == 3);
  CHECK(in.assignments == std::vector<std::size_t>{0, 0, 1});
  const auto set = build_cluster_set(in.points, in.assignments);
  const auto j = io::to_json(set);
  CHECK(j["point_weights"][0] == 1.0);
  std::stringstream bad("cluster_id,x1\n-1,0\n");
  CHECK_THROWS_AS(io::read_cluster_csv(bad), io::FormatError);
}

TEST_CASE("quadrature samples JSON") {
  const Grid1D g(3, 1.0);
  const auto rule = gauss_legendre_rule(2, 1.0);
  const auto s = sample_quadrature([](double q, double p) { return q - p; }, [](double q) { return q; }, g, rule);
  const auto j = io::to_json(s);
  CHECK(j["kernel"]["shape"] == std::vector<std::size_t>{3, 3, 2, 2});
  const auto back = io::quadrature_samples_from_json(j);
  CHECK(back.kernel == s.kernel);
  CHECK(back.bias == s.bias);
}

TEST_CASE("moment and explain JSON") {
  const Grid1D g(4, 0.5);
  const auto m = kernel_moments(assemble_adr_stencil(0.3, 0.1, 0.05, g), 3);
  const auto jm = io::to_json(m);
  CHECK(jm["max_order"] == 3);
  const auto je = io::to_json(explain_kernel(m));
  CHECK(je.contains("U_hat"));
  CHECK(je["schema_version"] == io::schema_version);
}

}
