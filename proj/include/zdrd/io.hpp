#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zdrd/codec.hpp"
#include "zdrd/model.hpp"
#include "zdrd/nrdf.hpp"
#include "zdrd/realization.hpp"

namespace zdrd {

/// Parsed model config file. Either a direct state-space model or AR(s)
/// coefficients (when `ar_order` is present); `resolve()` augments the
/// latter to the equivalent AR(1) form.
struct ModelConfig {
  std::optional<StateSpaceModel> direct;
  std::optional<ArCoefficients> ar;

  StateSpaceModel resolve() const;
};

/// Schema: {"A": [[...]], "B": [[...]], "sigma_x0": [[...]]?} or
/// {"ar_order": s, "A_list": [[[...]],...], "B": [[...]]}. Row-major
/// nested arrays. Throws ConfigError on malformed input.
ModelConfig load_model_config(const std::string& path);
ModelConfig parse_model_config(const std::string& json_text);

void save_model_config(const std::string& path, const StateSpaceModel& m);
std::string model_config_to_json(const StateSpaceModel& m);

/// Floating-point formatting used for every numeric cell we write:
/// 9 significant digits, so reruns diff cleanly.
std::string format_g9(double v);

/// `t,x_1,...,x_p` rows for a simulated trajectory.
void write_trajectory_csv(std::ostream& os,
                          const std::vector<Eigen::VectorXd>& traj);

/// `D,rate_bits,upper_scalar_bits,upper_lattice_bits,iterations,residual`.
void write_sweep_csv(std::ostream& os, const std::vector<NrdfSolution>& sweep,
                     std::optional<double> g_p = {});

/// `D,lower_bits,upper_scalar_bits,upper_lattice_bits` (the bound curve).
void write_bounds_csv(std::ostream& os, const std::vector<NrdfSolution>& sweep,
                      std::optional<double> g_p = {});

/// `t,x_*,y_*,k_*,ktilde_*,sqerr` per simulated step.
void write_trace_csv(std::ostream& os, const RealizationTrace& trace);

std::string report_to_json(const SimulationReport& report);
void write_report_csv(std::ostream& os,
                      const std::vector<SimulationReport>& reports);

}  // namespace zdrd
