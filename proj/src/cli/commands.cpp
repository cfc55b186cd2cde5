#include "cli/commands.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "npde/discretize.hpp"
#include "npde/dynamics.hpp"
#include "npde/io.hpp"
#include "npde/kernels.hpp"
#include "npde/training.hpp"
#include "npde/version.hpp"

namespace npde::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Files are staged in a sibling temp directory and moved into place only
// once the whole command has succeeded.
class OutputDir {
public:
  explicit OutputDir(fs::path target) : target_(fs::absolute(std::move(target)).lexically_normal()) {
    if (target_.filename().empty()) target_ = target_.parent_path();
    staging_ = target_.parent_path() /
               ("." + target_.filename().string() + ".tmp-" + std::to_string(::getpid()));
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;
  ~OutputDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  const fs::path& staging() const { return staging_; }

  void commit() {
    if (fs::exists(target_)) fs::remove_all(target_);
    fs::rename(staging_, target_);
    committed_ = true;
  }

private:
  fs::path target_;
  fs::path staging_;
  bool committed_ = false;
};

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

template <class Writer>
void write_stream(const fs::path& path, Writer&& writer) {
  std::ostringstream os;
  writer(os);
  write_file(path, os.str());
}

void write_manifest(const fs::path& dir, const std::string& command, const Config& cfg) {
  json config = json::object();
  for (const auto& [k, v] : cfg.resolved()) config[k] = v;
  write_json(dir / "manifest.json", {{"schema_version", io::schema_version},
                                     {"command", command},
                                     {"library_version", std::string(version)},
                                     {"config", config}});
}

// --- settings readers -------------------------------------------------------

Grid1D read_grid(const Config& cfg) {
  const auto n = cfg.get_count("grid.n", 64);
  if (n < 2) throw ConfigError("grid.n", "needs at least 2 nodes");
  const double delta = cfg.get_positive("grid.delta", 1.0);
  const double origin = cfg.get_double("grid.origin", 0.0);
  const auto boundary = cfg.get_string("grid.boundary", "periodic");
  try {
    return Grid1D(n, delta, origin, parse_boundary(boundary));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grid.boundary", e.what());
  }
}

Activation read_activation(const Config& cfg, const std::string& key) {
  const auto name = cfg.get_string(key, "tanh");
  try {
    return parse_activation(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

RelaxConfig read_relax(const Config& cfg) {
  RelaxConfig rc;
  rc.omega = cfg.get_double("dynamics.omega", 1.0);
  if (!(rc.omega > 0.0 && rc.omega <= 1.0)) throw ConfigError("dynamics.omega", "must lie in (0, 1]");
  rc.steps = cfg.get_count("dynamics.steps", 1);
  if (rc.steps < 1) throw ConfigError("dynamics.steps", "must be at least 1");
  rc.norm_coupling = cfg.get_non_negative("dynamics.norm_coupling", 0.0);
  const auto norm = cfg.get_string("dynamics.norm", "integral");
  if (norm == "integral") {
    rc.norm_kind = NormKind::Integral;
  } else if (norm == "discrete") {
    rc.norm_kind = NormKind::Discrete;
  } else {
    throw ConfigError("dynamics.norm", "expected 'integral' or 'discrete'");
  }
  return rc;
}

Kernel read_kernel(const Config& cfg, const Grid1D& grid) {
  const auto type = cfg.get_string("kernel.type", "adr");
  if (type == "identity") return to_dense(assemble_adr_stencil(0.0, 0.0, 0.0, grid));
  if (type == "adr") {
    return assemble_adr_stencil(cfg.get_double("kernel.U", 0.0), cfg.get_double("kernel.D", 0.0),
                                cfg.get_double("kernel.R", 0.0), grid);
  }
  if (type == "dense") {
    const auto path = cfg.get_path("kernel.matrix");
    try {
      return io::read_dense_kernel_csv(path, grid);
    } catch (const io::FormatError& e) {
      throw ConfigError("kernel.matrix", e.what());
    }
  }
  if (type == "gaussian") {
    const double sigma = cfg.get_positive("kernel.sigma", 1.0);
    const auto kernel = cfg.has("kernel.amplitude")
                            ? make_gaussian_kernel(cfg.get_double("kernel.amplitude"), sigma)
                            : make_normalized_gaussian(sigma);
    return sample_continuum_kernel(kernel, grid);
  }
  if (type == "powerlaw") {
    const auto kernel = make_power_law_kernel(cfg.get_double("kernel.amplitude", 1.0),
                                              cfg.get_positive("kernel.exponent", 2.0),
                                              cfg.get_positive("kernel.cutoff", grid.delta()));
    return sample_continuum_kernel(kernel, grid);
  }
  throw ConfigError("kernel.type", "unknown kernel type '" + type +
                                       "' (identity, adr, dense, gaussian, powerlaw)");
}

// Named profiles; see the README for the formulas.
Field read_profile(const Config& cfg, const std::string& section, const Grid1D& grid,
                   const std::string& fallback) {
  const auto key = [&](const char* name) { return section + "." + name; };
  const auto profile = cfg.get_string(key("profile"), fallback);
  const auto n = grid.size();
  std::vector<double> v(n, 0.0);
  const double mid = grid.node(0) + 0.5 * static_cast<double>(n - 1) * grid.delta();

  if (profile == "zero") {
    // all zeros
  } else if (profile == "constant") {
    std::fill(v.begin(), v.end(), cfg.get_double(key("value")));
  } else if (profile == "gaussian-bump") {
    const double amplitude = cfg.get_double(key("amplitude"), 1.0);
    const double centre = cfg.get_double(key("center"), mid);
    const double width = cfg.get_positive(key("width"), grid.length() / 10.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = grid.node(i) - centre;
      v[i] = amplitude * std::exp(-d * d / (2.0 * width * width));
    }
  } else if (profile == "step") {
    const double amplitude = cfg.get_double(key("amplitude"), 1.0);
    const double low = cfg.get_double(key("low"), 0.0);
    const double centre = cfg.get_double(key("center"), mid);
    for (std::size_t i = 0; i < n; ++i) v[i] = grid.node(i) < centre ? amplitude : low;
  } else if (profile == "file") {
    const auto path = cfg.get_path(key("path"));
    try {
      return io::read_field_csv(path, grid);
    } catch (const std::exception& e) {
      throw ConfigError(key("path"), e.what());
    }
  } else {
    throw ConfigError(key("profile"), "unknown profile '" + profile +
                                          "' (zero, constant, gaussian-bump, step, file)");
  }

  Field field(grid, std::move(v));
  if (profile != "zero" && cfg.get_bool(key("normalize"), false)) {
    const double nrm = norm(field);
    if (nrm == 0.0) throw ConfigError(key("normalize"), "cannot normalize a zero profile");
    std::vector<double> scaled(field.values().begin(), field.values().end());
    for (auto& x : scaled) x /= nrm;
    field = Field(grid, std::move(scaled));
  }
  return field;
}

// Target field: a profile, a file, or a teacher ADR run from the initial state.
Field read_target(const Config& cfg, const Grid1D& grid, const Field& x, Activation f,
                  const RelaxConfig& relax) {
  if (!cfg.has("target.profile")) throw ConfigError("target.profile", "required value is missing");
  if (cfg.get_string("target.profile") == "teacher") {
    const auto kernel = assemble_adr_stencil(cfg.get_double("target.U"), cfg.get_double("target.D"),
                                             cfg.get_double("target.R", 0.0), grid);
    return evolve(x, kernel, Field::zeros(grid), f, relax).final_state();
  }
  return read_profile(cfg, "target", grid, "file");
}

struct TrainSettings {
  Grid1D grid;
  Field x;
  Field target;
  TrainConfig train;
  ADRParams initial;
};

TrainSettings read_train(const Config& cfg) {
  const auto grid = read_grid(cfg);
  const auto relax = read_relax(cfg);
  const auto f = read_activation(cfg, "dynamics.activation");
  auto x = read_profile(cfg, "initial", grid, "gaussian-bump");
  auto target = read_target(cfg, grid, x, f, relax);

  TrainConfig tc;
  tc.omega = relax.omega;
  tc.steps = relax.steps;
  tc.norm_coupling = relax.norm_coupling;
  tc.norm_kind = relax.norm_kind;
  tc.activation = f;
  tc.lr = cfg.get_positive("train.lr", 0.1);
  tc.tolerance = cfg.get_positive("train.tolerance", 1e-6);
  tc.max_iters = cfg.get_count("train.max_iters", 1000);
  if (tc.max_iters < 1) throw ConfigError("train.max_iters", "must be at least 1");
  tc.fd_step = cfg.get_positive("train.fd_step", 1e-6);
  const auto gm = cfg.get_string("train.gradient", "chain-rule");
  if (gm == "chain-rule") {
    tc.gradient_mode = GradientMode::ChainRule;
  } else if (gm == "finite-difference") {
    tc.gradient_mode = GradientMode::FiniteDifference;
  } else {
    throw ConfigError("train.gradient", "expected 'chain-rule' or 'finite-difference'");
  }

  ParamMode mode{};
  try {
    mode = parse_param_mode(cfg.get_string("train.mode", "homogeneous"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("train.mode", e.what());
  }
  auto init = ADRParams::homogeneous(cfg.get_double("train.init_U", 0.0),
                                     cfg.get_double("train.init_D", 0.0),
                                     cfg.get_double("train.init_R", 0.0));
  if (mode == ParamMode::Heterogeneous) init = embed_heterogeneous(init, grid.size());
  if (mode == ParamMode::OnTheFly) init = embed_on_the_fly(init, grid.size(), tc.steps);
  return {grid, std::move(x), std::move(target), tc, std::move(init)};
}

// --- commands ---------------------------------------------------------------

void cmd_evolve(const Config& cfg, const fs::path& dir, std::ostream& out) {
  const auto grid = read_grid(cfg);
  const auto relax = read_relax(cfg);
  const auto f = read_activation(cfg, "dynamics.activation");
  const auto kernel = read_kernel(cfg, grid);
  const auto x = read_profile(cfg, "initial", grid, "gaussian-bump");
  const auto b = read_profile(cfg, "bias", grid, "zero");
  std::optional<Field> target;
  if (cfg.has("target.profile")) target = read_target(cfg, grid, x, f, relax);

  const auto traj = evolve(x, kernel, b, f, relax);

  write_stream(dir / "trajectory.csv", [&](std::ostream& os) { io::write_trajectory_csv(os, traj); });
  write_stream(dir / "initial.csv", [&](std::ostream& os) { io::write_field_csv(os, x); });
  write_stream(dir / "final.csv", [&](std::ostream& os) { io::write_field_csv(os, traj.final_state()); });
  write_json(dir / "final_state.json", io::to_json(traj.final_state()));
  if (target) {
    const auto losses = per_step_loss(traj, *target);
    write_stream(dir / "step_loss.csv", [&](std::ostream& os) {
      os << "step,loss\n";
      for (std::size_t t = 0; t < losses.size(); ++t) os << t << ',' << io::format_double(losses[t]) << '\n';
    });
  }
  write_manifest(dir, "evolve", cfg);
  out << "evolved " << relax.steps << " steps on " << grid.size() << " nodes\n";
}

void cmd_attractor(const Config& cfg, const fs::path& dir, std::ostream& out) {
  const auto grid = read_grid(cfg);
  const auto relax = read_relax(cfg);
  const auto f = read_activation(cfg, "dynamics.activation");
  const auto kernel = read_kernel(cfg, grid);
  const auto x = read_profile(cfg, "initial", grid, "gaussian-bump");
  const auto b = read_profile(cfg, "bias", grid, "zero");
  const double tol = cfg.get_positive("attractor.tol", 1e-10);
  const auto max_iters = cfg.get_count("attractor.max_iters", 10000);

  const auto res = find_attractor(x, kernel, b, f, relax.omega, tol, max_iters);

  write_json(dir / "attractor.json", io::to_json(res));
  write_stream(dir / "z_star.csv", [&](std::ostream& os) { io::write_field_csv(os, res.z_star); });
  write_manifest(dir, "attractor", cfg);
  out << (res.converged ? "converged" : "not converged") << " after " << res.iterations
      << " iterations, residual " << io::format_double(res.residual) << "\n";
}

TrainResult train_into(const Config& cfg, const TrainSettings& s, const fs::path& dir) {
  auto res = fit(s.initial, s.x, s.target, s.train);
  write_json(dir / "train_result.json", io::to_json(res));
  write_stream(dir / "loss.csv", [&](std::ostream& os) { io::write_loss_csv(os, res.loss_history); });
  write_stream(dir / "target.csv", [&](std::ostream& os) { io::write_field_csv(os, s.target); });
  write_manifest(dir, "train", cfg);
  return res;
}

void cmd_train(const Config& cfg, const fs::path& dir, std::ostream& out) {
  const auto settings = read_train(cfg);
  const auto res = train_into(cfg, settings, dir);
  out << (res.converged ? "converged" : "not converged") << " after " << res.iterations
      << " iterations, loss " << io::format_double(res.loss_history.back()) << "\n";
}

void cmd_explain(const Config& cfg, const fs::path& dir, std::ostream& out) {
  const auto grid = read_grid(cfg);
  const auto max_order = cfg.get_count("explain.max_order", 4);
  if (max_order < 2) throw ConfigError("explain.max_order", "must be at least 2");
  const auto path = cfg.get_path("explain.matrix");
  DenseKernel kernel = [&] {
    try {
      return io::read_dense_kernel_csv(path, grid);
    } catch (const io::FormatError& e) {
      throw ConfigError("explain.matrix", e.what());
    }
  }();

  const auto profile = kernel_moments(kernel, max_order);
  const auto report = explain_kernel(profile);

  write_json(dir / "moments.json", io::to_json(profile));
  write_json(dir / "explain.json", io::to_json(report));
  write_manifest(dir, "explain", cfg);
  out << "explained " << grid.size() << "x" << grid.size() << " kernel up to order " << max_order << "\n";
}

void cmd_report(const Config& cfg, const fs::path& dir, std::ostream& out) {
  const auto N = cfg.get_count("report.N", 1000);
  const auto L = cfg.get_count("report.L", 100);
  const auto d = cfg.get_count("report.d", 1);
  if (N < 1) throw ConfigError("report.N", "must be at least 1");
  if (L < 1) throw ConfigError("report.L", "must be at least 1");
  if (d < 1) throw ConfigError("report.d", "must be at least 1");

  const auto cap = capacity_report(N, L);
  json counts = json::object();
  for (auto m : {ParamMode::Homogeneous, ParamMode::Heterogeneous, ParamMode::OnTheFly}) {
    counts[std::string(to_string(m))] = parameter_count(m, N, L, d);
  }
  json rep = {{"schema_version", io::schema_version},
              {"N", N},
              {"L", L},
              {"d", d},
              {"N_W", cap.weights},
              {"log10_N_P", cap.log10_paths},
              {"N_P", cap.paths ? json(*cap.paths) : json(nullptr)},
              {"adr_parameters", counts}};
  if (cfg.has("report.mode")) {
    try {
      const auto m = parse_param_mode(cfg.get_string("report.mode"));
      rep["mode"] = std::string(to_string(m));
      rep["mode_parameters"] = parameter_count(m, N, L, d);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("report.mode", e.what());
    }
  }
  write_json(dir / "report.json", rep);
  write_manifest(dir, "report", cfg);
  out << "N_W = " << cap.weights << ", log10 N_P = " << io::format_double(cap.log10_paths) << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void cmd_sweep(const Config& cfg, const fs::path& dir, std::ostream& out) {
  const auto key = cfg.get_string("sweep.key");
  if (key.find('.') == std::string::npos || key.rfind("sweep.", 0) == 0) {
    throw ConfigError("sweep.key", "must name a section.key outside [sweep]");
  }
  const auto values = split_list(cfg.get_string("sweep.values"));
  if (values.empty()) throw ConfigError("sweep.values", "needs at least one value");
  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  const auto threads = std::max<std::size_t>(1, cfg.get_count("sweep.threads", std::min<std::size_t>(hw, values.size())));

  // Validate every run before any fit starts.
  std::vector<Config> configs;
  std::vector<TrainSettings> settings;
  for (const auto& v : values) {
    Config c = cfg;
    c.set(key, v);
    settings.push_back(read_train(c));
    configs.push_back(std::move(c));
  }

  std::vector<TrainResult> results(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      results[i] = train_into(configs[i], settings[i], dir / ("run_" + std::to_string(i)));
    }
  };
  std::vector<std::future<void>> pool;
  for (std::size_t t = 0; t < std::min(threads, values.size()); ++t) {
    pool.push_back(std::async(std::launch::async, worker));
  }
  for (auto& p : pool) p.get();

  json runs = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    runs.push_back({{"value", values[i]},
                    {"dir", "run_" + std::to_string(i)},
                    {"converged", results[i].converged},
                    {"iterations", results[i].iterations},
                    {"final_loss", results[i].loss_history.back()}});
  }
  write_json(dir / "sweep.json", {{"schema_version", io::schema_version}, {"key", key}, {"runs", runs}});
  write_manifest(dir, "sweep", cfg);
  out << "swept " << key << " over " << values.size() << " values\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relaxation-form neural PDE toolkit: forward evolution, attractors, ADR training, kernel moments"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
  };
  Common common;

  using Handler = void (*)(const Config&, const fs::path&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"evolve", "Run the relaxation dynamics and write the trajectory", cmd_evolve},
      {"attractor", "Relax to a self-consistent steady state", cmd_attractor},
      {"train", "Fit ADR coefficients by steepest descent", cmd_train},
      {"explain", "Moment analysis of a dense kernel from CSV", cmd_explain},
      {"report", "Weight, path and ADR parameter counts", cmd_report},
      {"sweep", "Run independent fits over a list of values for one key", cmd_sweep},
  };
  for (const auto& [name, help, _] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config, "INI config or run manifest (.json)");
    sub->add_option("--out", common.out, "Output directory")->required();
    sub->add_option("--set", common.sets, "Override, section.key=value (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidConfig;
  }

  const auto* chosen = app.get_subcommands().front();
  Handler handler = nullptr;
  for (const auto& [name, help, h] : commands) {
    if (name == chosen->get_name()) handler = h;
  }

  try {
    Config cfg = common.config.empty() ? Config() : Config::load(common.config);
    for (const auto& s : common.sets) cfg.apply_override(s);
    OutputDir dir(common.out);
    handler(cfg, dir.staging(), out);
    dir.commit();
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace npde::cli
