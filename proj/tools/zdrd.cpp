// Command-line harness: model validation, bound curves, end-to-end
// codec simulations, AR(s) augmentation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zdrd/codec.hpp"
#include "zdrd/errors.hpp"
#include "zdrd/io.hpp"
#include "zdrd/model.hpp"
#include "zdrd/nrdf.hpp"

namespace {

constexpr const char* kVersion = "zdrd 0.1.0 (container v1, coder v1)";

constexpr int kExitSolver = 2;
constexpr int kExitConfig = 3;
constexpr int kExitViolation = 4;

std::vector<double> parse_grid(const std::string& text) {
  // "a:b:steps" -> linspace, or a single value
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    try {
      return {std::stod(text)};
    } catch (...) {
      throw zdrd::ConfigError("cannot parse --d-grid value: " + text);
    }
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw zdrd::ConfigError("--d-grid must be a:b:steps");
  double a = 0.0, b = 0.0;
  long steps = 0;
  try {
    a = std::stod(text.substr(0, c1));
    b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    steps = std::stol(text.substr(c2 + 1));
  } catch (...) {
    throw zdrd::ConfigError("cannot parse --d-grid: " + text);
  }
  if (steps < 1) throw zdrd::ConfigError("--d-grid needs at least one step");
  std::vector<double> grid;
  grid.reserve(steps);
  if (steps == 1) {
    grid.push_back(a);
  } else {
    for (long k = 0; k < steps; ++k)
      grid.push_back(a + (b - a) * static_cast<double>(k) / (steps - 1));
  }
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    if (grid[k + 1] <= grid[k])
      throw zdrd::ConfigError("--d-grid must be strictly increasing");
  if (grid.front() <= 0.0)
    throw zdrd::ConfigError("--d-grid values must be positive");
  return grid;
}

struct CommonArgs {
  std::string model_path;
  std::string d_grid_text;
  int n = 200000;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int max_iter = 10000;
  double damping = 0.5;
  std::optional<double> gp;
  std::string out_dir;
  int jobs = 1;
};

zdrd::SolverOptions solver_options(const CommonArgs& args) {
  zdrd::SolverOptions opts;
  opts.tol = args.tol;
  opts.max_iter = args.max_iter;
  opts.damping = args.damping;
  return opts;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw zdrd::ConfigError("cannot write " + path);
  out << content;
}

int cmd_validate(const CommonArgs& args) {
  const zdrd::StateSpaceModel model =
      zdrd::load_model_config(args.model_path).resolve();
  const zdrd::SpectrumReport rep = zdrd::spectrum(model);
  std::cout << "p = " << model.p() << ", q = " << model.q() << "\n";
  std::cout << "eigenvalues:";
  for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) {
    const auto ev = rep.eigenvalues(i);
    std::cout << " (" << zdrd::format_g9(ev.real()) << ", "
              << zdrd::format_g9(ev.imag()) << "i)";
  }
  std::cout << "\nis_stable = " << (rep.is_stable ? "true" : "false")
            << "\nis_stabilizable = " << (rep.is_stabilizable ? "true" : "false")
            << "\nunstable_log_sum_bits = " << zdrd::format_g9(rep.unstable_log_sum)
            << "\n";
  if (rep.has_unit_circle_modes)
    std::cerr << "warning: eigenvalue(s) on the unit circle; asymptotic "
                 "behavior is at the boundary of the supported class\n";
  if (!rep.is_stabilizable) {
    std::cerr << "error: (A, B) is not stabilizable\n";
    return kExitSolver;
  }
  return 0;
}

int cmd_nrdf(const CommonArgs& args) {
  const zdrd::ValidatedModel m =
      zdrd::validate_model(zdrd::load_model_config(args.model_path).resolve());
  const auto grid = parse_grid(args.d_grid_text);
  const auto sweep =
      zdrd::rate_distortion_sweep(m, grid, solver_options(args), args.jobs);

  std::cerr << "unstable floor: " << zdrd::format_g9(m.spectrum.unstable_log_sum)
            << " bits/sample\n";

  std::ostringstream curve;
  zdrd::write_bounds_csv(curve, sweep, args.gp);
  if (args.out_dir.empty()) {
    std::cout << curve.str();
  } else {
    std::filesystem::create_directories(args.out_dir);
    write_file(args.out_dir + "/nrdf_curve.csv", curve.str());
    std::ostringstream solutions;
    zdrd::write_sweep_csv(solutions, sweep, args.gp);
    write_file(args.out_dir + "/nrdf_solutions.csv", solutions.str());
  }
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  const zdrd::ValidatedModel m =
      zdrd::validate_model(zdrd::load_model_config(args.model_path).resolve());
  const auto grid = parse_grid(args.d_grid_text);
  if (args.n < 1000)
    throw zdrd::ConfigError("simulate needs --n >= 1000");

  std::vector<zdrd::SimulationReport> reports;
  bool violated = false;
  for (const double D : grid) {
    zdrd::SimulationReport rep =
        zdrd::run_pipeline(m, D, args.n, args.seed, solver_options(args));
    violated = violated || !rep.violations.empty();
    if (!args.out_dir.empty()) {
      std::filesystem::create_directories(args.out_dir);
      std::ostringstream name;
      name << args.out_dir << "/report_D" << zdrd::format_g9(D) << ".json";
      write_file(name.str(), zdrd::report_to_json(rep));
    } else {
      std::cout << zdrd::report_to_json(rep);
    }
    reports.push_back(std::move(rep));
  }
  std::ostringstream csv;
  zdrd::write_report_csv(csv, reports);
  if (!args.out_dir.empty())
    write_file(args.out_dir + "/simulate.csv", csv.str());
  else
    std::cout << csv.str();

  for (const auto& rep : reports)
    for (const auto& v : rep.violations)
      std::cerr << "violation at D = " << zdrd::format_g9(rep.D) << ": " << v
                << "\n";
  return violated ? kExitViolation : 0;
}

int cmd_augment(const CommonArgs& args) {
  const zdrd::ModelConfig cfg = zdrd::load_model_config(args.model_path);
  if (!cfg.ar)
    throw zdrd::ConfigError("augment needs a config with ar_order/A_list");
  const zdrd::StateSpaceModel m = zdrd::augment_ar(*cfg.ar);
  const std::string text = zdrd::model_config_to_json(m);
  if (args.out_dir.empty()) {
    std::cout << text;
  } else {
    std::filesystem::create_directories(args.out_dir);
    write_file(args.out_dir + "/augmented_model.json", text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-delay rate-distortion bounds and codec for Gauss-Markov sources"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&args](CLI::App* sub, bool needs_grid) {
    sub->add_option("--model", args.model_path, "model config JSON")->required();
    if (needs_grid)
      sub->add_option("--d-grid", args.d_grid_text,
                      "distortion grid a:b:steps (or a single value)")
          ->required();
    sub->add_option("--tol", args.tol, "solver tolerance");
    sub->add_option("--max-iter", args.max_iter, "solver iteration cap");
    sub->add_option("--damping", args.damping, "solver damping in (0,1]");
    sub->add_option("--gp", args.gp, "lattice normalized second moment G_p");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--jobs", args.jobs, "worker threads for sweeps");
  };

  auto* validate = app.add_subcommand("validate", "check a model config");
  validate->add_option("--model", args.model_path, "model config JSON")->required();

  auto* nrdf = app.add_subcommand("nrdf", "bound curve over a distortion grid");
  add_common(nrdf, true);

  auto* simulate = app.add_subcommand("simulate", "run the zero-delay codec");
  add_common(simulate, true);
  simulate->add_option("--n", args.n, "samples per simulation (>= 1000)");
  simulate->add_option("--seed", args.seed, "RNG seed");

  auto* augment = app.add_subcommand("augment", "AR(s) -> AR(1) model rewrite");
  augment->add_option("--model", args.model_path, "AR coefficients JSON")->required();
  augment->add_option("--out", args.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (validate->parsed()) return cmd_validate(args);
    if (nrdf->parsed()) return cmd_nrdf(args);
    if (simulate->parsed()) return cmd_simulate(args);
    if (augment->parsed()) return cmd_augment(args);
  } catch (const zdrd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const zdrd::DimensionMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const zdrd::NotStabilizable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const zdrd::NoConvergence& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const zdrd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
