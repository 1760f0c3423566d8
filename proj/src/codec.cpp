#include "zdrd/codec.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "zdrd/errors.hpp"
#include "zdrd/rng.hpp"

namespace zdrd {

CodecConfig make_codec_config(const ValidatedModel& m, const NrdfSolution& sol,
                              std::uint64_t dither_seed) {
  CodecConfig cfg;
  cfg.A = m.model.A;
  cfg.params = derive_channel(sol);
  cfg.quant = step_sizes(cfg.params.sigma_v);
  cfg.alpha_variance.resize(sol.p());
  for (int i = 0; i < sol.p(); ++i) {
    const double phi = cfg.params.phi(i);
    cfg.alpha_variance(i) = phi * phi * sol.lambda(i);
  }
  cfg.dither_seed = dither_seed;
  return cfg;
}

namespace detail {

Endpoint::Endpoint(const CodecConfig& cfg)
    : cfg_(cfg),
      dither_(cfg.dither_seed, cfg.quant.steps),
      y_prev_(Eigen::VectorXd::Zero(cfg.p())) {}

}  // namespace detail

Encoder::InnovationResult Encoder::encode_innovation(const Eigen::VectorXd& k) {
  const int p = cfg_.p();
  const Eigen::VectorXd alpha = cfg_.params.precoder * k;

  BitWriter bw;
  ArithmeticEncoder enc(bw);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ideal = 0.0;
  bool any = false;
  for (int i = 0; i < p; ++i) {
    if (!cfg_.params.active(i)) continue;
    const double r = dither_.at(t_, i);
    const double step = cfg_.quant.steps(i);
    const auto q = quantize_subtractive(alpha(i), step, r);
    const ConditionalPmf pmf =
        conditional_pmf(r, std::sqrt(cfg_.alpha_variance(i)), step);
    ideal += encode_index(enc, pmf, q.index);
    beta(i) = q.reconstruction;
    any = true;
  }
  if (any) enc.finish();

  InnovationResult res;
  res.ktilde = cfg_.params.E.transpose() *
               (cfg_.params.theta.asDiagonal() * beta);
  res.ideal_bits = ideal;
  res.chunk.nbits = bw.nbits();
  res.chunk.bytes = bw.take_bytes();
  ++t_;
  return res;
}

Encoder::StepResult Encoder::encode_step(const Eigen::VectorXd& x) {
  const Eigen::VectorXd xhat = cfg_.A * y_prev_;
  InnovationResult inner = encode_innovation(x - xhat);
  StepResult res;
  res.y = inner.ktilde + xhat;
  res.ideal_bits = inner.ideal_bits;
  res.chunk = std::move(inner.chunk);
  y_prev_ = res.y;
  return res;
}

Eigen::VectorXd Decoder::decode_innovation(const StepChunk& chunk) {
  const int p = cfg_.p();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  bool any = false;
  for (int i = 0; i < p; ++i)
    if (cfg_.params.active(i)) any = true;

  if (any) {
    BitReader br(chunk.bytes.data(), chunk.nbits);
    ArithmeticDecoder dec(br);
    for (int i = 0; i < p; ++i) {
      if (!cfg_.params.active(i)) continue;
      const double r = dither_.at(t_, i);
      const double step = cfg_.quant.steps(i);
      const ConditionalPmf pmf =
          conditional_pmf(r, std::sqrt(cfg_.alpha_variance(i)), step);
      const std::int64_t index = decode_index(dec, pmf);
      beta(i) = static_cast<double>(index) * step - r;
    }
  }
  ++t_;
  return cfg_.params.E.transpose() * (cfg_.params.theta.asDiagonal() * beta);
}

Eigen::VectorXd Decoder::decode_step(const StepChunk& chunk) {
  const Eigen::VectorXd xhat = cfg_.A * y_prev_;
  const Eigen::VectorXd y = decode_innovation(chunk) + xhat;
  y_prev_ = y;
  return y;
}

bool SimulationReport::rate_in_bounds(double slack) const {
  return empirical_rate >= nrdf_rate - slack &&
         empirical_rate <= upper_scalar + slack;
}

bool SimulationReport::mse_within(double rel) const {
  return std::abs(empirical_mse - D) <= rel * D;
}

SimulationReport run_pipeline(const ValidatedModel& m, double D, int n,
                              std::uint64_t seed, const SolverOptions& opts) {
  if (n < 1000) throw NonPositiveInput("simulation needs n >= 1000");

  const NrdfSolution sol = solve_nrdf(m, D, opts);
  const CodecConfig cfg =
      make_codec_config(m, sol, mix64(seed ^ 0x646974686572ULL));

  Encoder enc(cfg);
  Decoder dec(cfg);

  SimulationReport rep;
  rep.n = n;
  rep.p = m.p();
  rep.D = D;
  rep.seed = seed;
  rep.nrdf_rate = sol.rate;
  rep.upper_scalar = bounds(sol).upper_scalar;
  rep.lambda = sol.lambda;
  rep.delta = sol.delta;
  rep.solver_iterations = sol.iterations;
  rep.solver_residual = sol.residual;
  rep.per_step_lengths.reserve(n);

  // The loop runs on the prediction error k_t = x_t - A y_{t-1}
  // (k_{t+1} = A (k_t - ktilde_t) + B w_t), which stays stationary
  // where the raw state of an unstable source would overflow. The
  // source draws match simulate_source(seed) exactly: x_0 first, then
  // one noise column per step.
  GaussianSampler noise(seed);
  Eigen::VectorXd k = psd_sqrt(m.model.sigma_x0) * noise.vector(m.p());

  double mse = 0.0;
  int mismatches = 0;
  for (int t = 0; t < n; ++t) {
    const auto res = enc.encode_innovation(k);
    const Eigen::VectorXd ktilde_dec = dec.decode_innovation(res.chunk);
    if (std::memcmp(res.ktilde.data(), ktilde_dec.data(),
                    sizeof(double) * res.ktilde.size()) != 0)
      ++mismatches;
    const Eigen::VectorXd e = k - res.ktilde;  // equals x_t - y_t
    mse += e.squaredNorm();
    rep.total_bits += res.chunk.nbits;
    rep.per_step_lengths.push_back(res.chunk.nbits);
    rep.ideal_bits_total += res.ideal_bits;
    k = m.model.A * e + m.model.B * noise.vector(m.q());
  }
  if (mismatches > 0) {
    std::ostringstream msg;
    msg << "encoder/decoder reconstructions diverged at " << mismatches
        << " of " << n << " steps";
    rep.violations.push_back(msg.str());
  }
  rep.empirical_rate = static_cast<double>(rep.total_bits) / n;
  rep.empirical_mse = mse / n;
  if (!rep.mse_within(0.05))
    rep.violations.push_back("empirical MSE outside 5% of the target distortion");
  if (!rep.rate_in_bounds(0.05))
    rep.violations.push_back("empirical rate outside the bound sandwich");
  return rep;
}

std::uint64_t model_hash(const StateSpaceModel& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto fnv = [&h](const void* data, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint32_t p = static_cast<std::uint32_t>(m.p());
  const std::uint32_t q = static_cast<std::uint32_t>(m.q());
  fnv(&p, sizeof p);
  fnv(&q, sizeof q);
  const auto feed = [&fnv](const Eigen::MatrixXd& mat) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      for (Eigen::Index j = 0; j < mat.cols(); ++j) {
        const double v = mat(i, j);
        fnv(&v, sizeof v);
      }
  };
  feed(m.A);
  feed(m.B);
  feed(m.sigma_x0);
  return h;
}

namespace {

template <typename T>
void write_le(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!is) throw BitstreamCorrupt("truncated bitstream");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void write_bitstream(std::ostream& os, const BitstreamHeader& header,
                     const std::vector<StepChunk>& chunks) {
  os.write("ZDRD", 4);
  write_le<std::uint16_t>(os, header.container_version);
  write_le<std::uint16_t>(os, header.coder_version);
  write_le<std::uint32_t>(os, header.p);
  write_le<std::uint64_t>(os, header.seed);
  write_le<double>(os, header.D);
  write_le<std::uint64_t>(os, header.model_hash);
  write_le<std::uint64_t>(os, chunks.size());
  for (const auto& c : chunks) {
    write_le<std::uint32_t>(os, c.nbits);
    const std::size_t nbytes = (c.nbits + 7) / 8;
    if (c.bytes.size() < nbytes) throw Error("chunk byte buffer too short");
    os.write(reinterpret_cast<const char*>(c.bytes.data()),
             static_cast<std::streamsize>(nbytes));
  }
}

std::pair<BitstreamHeader, std::vector<StepChunk>> read_bitstream(
    std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "ZDRD", 4) != 0)
    throw BitstreamCorrupt("bad magic");
  BitstreamHeader h;
  h.container_version = read_le<std::uint16_t>(is);
  h.coder_version = read_le<std::uint16_t>(is);
  if (h.container_version != kContainerVersion)
    throw BitstreamCorrupt("unsupported container version");
  h.p = read_le<std::uint32_t>(is);
  h.seed = read_le<std::uint64_t>(is);
  h.D = read_le<double>(is);
  h.model_hash = read_le<std::uint64_t>(is);
  const std::uint64_t n = read_le<std::uint64_t>(is);
  std::vector<StepChunk> chunks(n);
  for (auto& c : chunks) {
    c.nbits = read_le<std::uint32_t>(is);
    const std::size_t nbytes = (c.nbits + 7) / 8;
    c.bytes.resize(nbytes);
    is.read(reinterpret_cast<char*>(c.bytes.data()),
            static_cast<std::streamsize>(nbytes));
    if (!is) throw BitstreamCorrupt("truncated chunk payload");
  }
  return {h, std::move(chunks)};
}

}  // namespace zdrd
