#include "zdrd/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "zdrd/errors.hpp"

namespace zdrd {

using nlohmann::json;

namespace {

Eigen::MatrixXd parse_matrix(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw ConfigError(name + " must be a nested array (row-major)");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  if (cols == 0) throw ConfigError(name + " has an empty row");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ConfigError(name + " rows have inconsistent lengths");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number())
        throw ConfigError(name + " entries must be numbers");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

StateSpaceModel ModelConfig::resolve() const {
  if (direct) return *direct;
  if (ar) return augment_ar(*ar);
  throw ConfigError("empty model config");
}

ModelConfig parse_model_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");

  ModelConfig cfg;
  try {
    if (j.contains("ar_order")) {
      ArCoefficients ar;
      if (!j["ar_order"].is_number_integer() || j["ar_order"].get<int>() < 1)
        throw ConfigError("ar_order must be a positive integer");
      ar.order = j["ar_order"].get<int>();
      if (!j.contains("A_list") || !j["A_list"].is_array())
        throw ConfigError("ar_order requires an A_list array");
      if (static_cast<int>(j["A_list"].size()) != ar.order)
        throw ConfigError("A_list length must equal ar_order");
      for (int s = 0; s < ar.order; ++s)
        ar.a.push_back(parse_matrix(j["A_list"][s], "A_list entry"));
      if (!j.contains("B")) throw ConfigError("model config needs B");
      ar.b = parse_matrix(j["B"], "B");
      cfg.ar = std::move(ar);
      return cfg;
    }
    if (!j.contains("A") || !j.contains("B"))
      throw ConfigError("model config needs A and B");
    const Eigen::MatrixXd A = parse_matrix(j["A"], "A");
    const Eigen::MatrixXd B = parse_matrix(j["B"], "B");
    std::optional<Eigen::MatrixXd> sigma;
    if (j.contains("sigma_x0")) sigma = parse_matrix(j["sigma_x0"], "sigma_x0");
    cfg.direct = make_model(A, B, sigma);
  } catch (const DimensionMismatch& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_config(buf.str());
}

std::string model_config_to_json(const StateSpaceModel& m) {
  json j;
  j["A"] = matrix_to_json(m.A);
  j["B"] = matrix_to_json(m.B);
  j["sigma_x0"] = matrix_to_json(m.sigma_x0);
  return j.dump(2) + "\n";
}

void save_model_config(const std::string& path, const StateSpaceModel& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model config: " + path);
  out << model_config_to_json(m);
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os,
                          const std::vector<Eigen::VectorXd>& traj) {
  if (traj.empty()) return;
  const Eigen::Index p = traj.front().size();
  os << "t";
  for (Eigen::Index i = 1; i <= p; ++i) os << ",x_" << i;
  os << "\n";
  for (std::size_t t = 0; t < traj.size(); ++t) {
    os << t;
    for (Eigen::Index i = 0; i < p; ++i) os << "," << format_g9(traj[t](i));
    os << "\n";
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<NrdfSolution>& sweep,
                     std::optional<double> g_p) {
  os << "D,rate_bits,upper_scalar_bits,upper_lattice_bits,iterations,residual\n";
  for (const auto& sol : sweep) {
    const BoundsReport b = bounds(sol, g_p);
    os << format_g9(sol.D) << "," << format_g9(b.lower) << ","
       << format_g9(b.upper_scalar) << ","
       << (b.upper_lattice ? format_g9(*b.upper_lattice) : "nan") << ","
       << sol.iterations << "," << format_g9(sol.residual) << "\n";
  }
}

void write_bounds_csv(std::ostream& os, const std::vector<NrdfSolution>& sweep,
                      std::optional<double> g_p) {
  os << "D,lower_bits,upper_scalar_bits,upper_lattice_bits\n";
  for (const auto& sol : sweep) {
    const BoundsReport b = bounds(sol, g_p);
    os << format_g9(sol.D) << "," << format_g9(b.lower) << ","
       << format_g9(b.upper_scalar) << ","
       << (b.upper_lattice ? format_g9(*b.upper_lattice) : "nan") << "\n";
  }
}

void write_trace_csv(std::ostream& os, const RealizationTrace& trace) {
  const Eigen::Index p = trace.x.rows();
  os << "t";
  for (Eigen::Index i = 1; i <= p; ++i) os << ",x_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",y_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",k_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",ktilde_" << i;
  os << ",sqerr\n";
  for (int t = 0; t < trace.n; ++t) {
    os << t;
    for (Eigen::Index i = 0; i < p; ++i) os << "," << format_g9(trace.x(i, t));
    for (Eigen::Index i = 0; i < p; ++i) os << "," << format_g9(trace.y(i, t));
    for (Eigen::Index i = 0; i < p; ++i) os << "," << format_g9(trace.k(i, t));
    for (Eigen::Index i = 0; i < p; ++i)
      os << "," << format_g9(trace.ktilde(i, t));
    os << ","
       << format_g9((trace.k.col(t) - trace.ktilde.col(t)).squaredNorm())
       << "\n";
  }
}

std::string report_to_json(const SimulationReport& rep) {
  json j;
  j["n"] = rep.n;
  j["p"] = rep.p;
  j["D"] = rep.D;
  j["seed"] = rep.seed;
  j["empirical_rate_bits"] = rep.empirical_rate;
  j["empirical_mse"] = rep.empirical_mse;
  j["total_bits"] = rep.total_bits;
  j["ideal_bits_total"] = rep.ideal_bits_total;
  j["nrdf_rate_bits"] = rep.nrdf_rate;
  j["upper_scalar_bits"] = rep.upper_scalar;
  j["violations"] = rep.violations;
  j["lambda"] = std::vector<double>(rep.lambda.data(),
                                    rep.lambda.data() + rep.lambda.size());
  j["delta"] = std::vector<double>(rep.delta.data(),
                                   rep.delta.data() + rep.delta.size());
  j["solver_iterations"] = rep.solver_iterations;
  j["solver_residual"] = rep.solver_residual;
  j["per_step_lengths"] = rep.per_step_lengths;
  return j.dump(2) + "\n";
}

void write_report_csv(std::ostream& os,
                      const std::vector<SimulationReport>& reports) {
  os << "D,n,empirical_rate_bits,empirical_mse,nrdf_rate_bits,"
        "upper_scalar_bits,total_bits,ok\n";
  for (const auto& r : reports) {
    os << format_g9(r.D) << "," << r.n << "," << format_g9(r.empirical_rate)
       << "," << format_g9(r.empirical_mse) << "," << format_g9(r.nrdf_rate)
       << "," << format_g9(r.upper_scalar) << "," << r.total_bits << ","
       << (r.violations.empty() ? 1 : 0) << "\n";
  }
}

}  // namespace zdrd
