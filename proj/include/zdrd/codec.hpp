#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "zdrd/coder.hpp"
#include "zdrd/ecdq.hpp"
#include "zdrd/model.hpp"
#include "zdrd/nrdf.hpp"
#include "zdrd/realization.hpp"

namespace zdrd {

inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::uint16_t kCoderVersion = 1;

/// Everything the encoder and decoder must agree on. Built once from a
/// solution; the per-component variance of the quantizer input alpha is
/// taken from the solution (phi_i^2 lambda_i), never estimated online.
struct CodecConfig {
  Eigen::MatrixXd A;            ///< source transition, drives the predictor
  RealizationParams params;
  QuantizerConfig quant;
  Eigen::VectorXd alpha_variance;  ///< phi_i^2 lambda_i, 0 for zero-rate
  std::uint64_t dither_seed = 0;

  int p() const { return params.p(); }
};

CodecConfig make_codec_config(const ValidatedModel& m, const NrdfSolution& sol,
                              std::uint64_t dither_seed);

/// One time step's codeword: nbits of payload, zero-padded to bytes.
struct StepChunk {
  std::uint32_t nbits = 0;
  std::vector<std::uint8_t> bytes;
};

namespace detail {
/// State shared (and kept bit-identical) by the two codec endpoints.
class Endpoint {
 public:
  explicit Endpoint(const CodecConfig& cfg);

  const Eigen::VectorXd& y_prev() const { return y_prev_; }
  std::int64_t t() const { return t_; }

  /// Resynchronizes to a known state (reconstruction memory and time
  /// index), e.g. to decode one step in isolation with a fresh endpoint.
  void resync(const Eigen::VectorXd& y_prev, std::int64_t t) {
    y_prev_ = y_prev;
    t_ = t;
  }

 protected:
  const CodecConfig& cfg_;
  DitherStream dither_;
  Eigen::VectorXd y_prev_;
  std::int64_t t_ = 0;
};
}  // namespace detail

/// The encoder codes the prediction error k_t = x_t - A y_{t-1}. The
/// innovation entry points work directly on k_t and never materialize
/// the absolute state; that is what makes multi-hundred-thousand-step
/// runs of unstable sources possible (x_t itself leaves double range
/// after a few thousand steps when rho(A) > 1, while k_t is stationary).
class Encoder : public detail::Endpoint {
 public:
  explicit Encoder(const CodecConfig& cfg) : Endpoint(cfg) {}

  struct InnovationResult {
    StepChunk chunk;
    Eigen::VectorXd ktilde;  ///< reconstructed innovation E^T theta beta
    double ideal_bits;       ///< sum of -log2 P(index | r) over components
  };

  struct StepResult {
    StepChunk chunk;
    Eigen::VectorXd y;  ///< local reconstruction, equals the decoder's
    double ideal_bits;
  };

  /// Quantizes and entropy-codes one innovation vector.
  InnovationResult encode_innovation(const Eigen::VectorXd& k);

  /// Raw-state entry point: forms k from x and the reconstruction
  /// memory, then updates the memory.
  StepResult encode_step(const Eigen::VectorXd& x);
};

class Decoder : public detail::Endpoint {
 public:
  explicit Decoder(const CodecConfig& cfg) : Endpoint(cfg) {}

  /// Decodes one innovation vector; needs only the chunk and the
  /// shared dither at the current time index.
  Eigen::VectorXd decode_innovation(const StepChunk& chunk);

  Eigen::VectorXd decode_step(const StepChunk& chunk);
};

struct SimulationReport {
  int n = 0;
  int p = 0;
  double D = 0.0;
  std::uint64_t seed = 0;
  double empirical_rate = 0.0;  ///< total payload bits / n
  double empirical_mse = 0.0;   ///< mean |x_t - y_t|^2
  std::vector<std::uint32_t> per_step_lengths;
  std::uint64_t total_bits = 0;
  double ideal_bits_total = 0.0;
  double nrdf_rate = 0.0;
  double upper_scalar = 0.0;
  std::vector<std::string> violations;  ///< sync or bound diagnostics
  // solution audit, so a bounds run and a simulation run can be diffed
  Eigen::VectorXd lambda, delta;
  int solver_iterations = 0;
  double solver_residual = 0.0;

  bool rate_in_bounds(double slack = 0.05) const;
  bool mse_within(double rel = 0.05) const;
};

/// Solves the allocation at D, derives the channel, and runs a paired
/// encoder/decoder over a fresh source trajectory of n samples.
/// Encoder- and decoder-side reconstructions are compared at every step;
/// any mismatch is recorded in violations.
SimulationReport run_pipeline(const ValidatedModel& m, double D, int n,
                              std::uint64_t seed,
                              const SolverOptions& opts = {});

/// 64-bit FNV-1a over dimensions and raw matrix bytes; identifies the
/// model a bitstream was produced for.
std::uint64_t model_hash(const StateSpaceModel& m);

struct BitstreamHeader {
  std::uint16_t container_version = kContainerVersion;
  std::uint16_t coder_version = kCoderVersion;
  std::uint32_t p = 0;
  std::uint64_t seed = 0;
  double D = 0.0;
  std::uint64_t model_hash = 0;
};

/// Container layout (little-endian):
///   magic "ZDRD", u16 container_version, u16 coder_version, u32 p,
///   u64 seed, f64 D, u64 model_hash, u64 n_steps,
///   then per step: u32 nbits followed by ceil(nbits/8) payload bytes.
void write_bitstream(std::ostream& os, const BitstreamHeader& header,
                     const std::vector<StepChunk>& chunks);

std::pair<BitstreamHeader, std::vector<StepChunk>> read_bitstream(std::istream& is);

}  // namespace zdrd
