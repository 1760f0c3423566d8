#pragma once

#include <cstdint>
#include <vector>

namespace zdrd {

/// Conditional PMF of the quantizer index given the dither value r:
///   P(index = j | r) = Phi((j*step + step/2 - r)/sigma)
///                    - Phi((j*step - step/2 - r)/sigma)
/// over a support covering +-8 sigma, renormalized to total mass
/// 1 - p_escape; indices outside the support go through the escape
/// symbol. The quantized frequency table drives the arithmetic coder;
/// every symbol keeps frequency >= 1 out of 2^24.
struct ConditionalPmf {
  std::int64_t i_min = 0;
  std::int64_t i_max = 0;
  std::vector<double> probabilities;  ///< sums to 1 - p_escape
  double p_escape = 0.0;

  std::vector<std::uint32_t> cum;  ///< cumulative freqs, size n_symbols+1
  std::uint32_t total = 0;         ///< cum.back() == kFreqTotal

  int n_support() const { return static_cast<int>(probabilities.size()); }
  int escape_symbol() const { return n_support(); }
  bool contains(std::int64_t j) const { return j >= i_min && j <= i_max; }
};

inline constexpr std::uint32_t kFreqTotalBits = 24;
inline constexpr std::uint32_t kFreqTotal = 1u << kFreqTotalBits;
inline constexpr std::uint32_t kEscapeFreq = 16;  // 2^-20 of total

/// Throws NonPositiveSigma. Zero-rate components never reach this call.
ConditionalPmf conditional_pmf(double r, double sigma, double step);

/// Ideal codelength -log2 P(index | r) in bits. Indices outside the
/// support are accounted through the escape path (escape mass, side bit
/// and unary magnitude).
double shannon_length_check(const ConditionalPmf& pmf, std::int64_t index);

class BitWriter {
 public:
  void put(int bit) {
    if ((nbits_ & 7) == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (nbits_ & 7));
    ++nbits_;
  }
  std::uint32_t nbits() const { return static_cast<std::uint32_t>(nbits_); }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take_bytes() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t nbits_ = 0;
};

/// Reads bits MSB-first; past the end it returns zeros, which is the
/// padding convention the encoder's termination relies on.
class BitReader {
 public:
  BitReader(const std::uint8_t* data, std::uint32_t nbits)
      : data_(data), nbits_(nbits) {}

  int get() {
    if (pos_ >= nbits_) return 0;
    const int bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return bit;
  }

 private:
  const std::uint8_t* data_;
  std::uint32_t nbits_;
  std::uint32_t pos_ = 0;
};

/// Binary arithmetic coder, 32-bit registers, bit-at-a-time
/// renormalization with underflow (pending-bit) handling. A chunk is
/// terminated by a single disambiguating bit; decoding a chunk requires
/// knowing where it ends (the containers carry explicit lengths) and
/// zero-pads past the end.
class ArithmeticEncoder {
 public:
  explicit ArithmeticEncoder(BitWriter& out) : out_(out) {}

  /// Narrows to the symbol with cumulative range [cum_lo, cum_hi) out of
  /// total. Requires total <= 2^24 and cum_lo < cum_hi.
  void encode(std::uint32_t cum_lo, std::uint32_t cum_hi, std::uint32_t total);

  /// Emits one bit with probability 1/2 (used by escape payloads).
  void encode_raw_bit(int bit) { encode(bit ? 1u : 0u, bit ? 2u : 1u, 2u); }

  void finish();

 private:
  void emit(int bit);

  BitWriter& out_;
  std::uint32_t low_ = 0;
  std::uint32_t high_ = 0xffffffffu;
  std::uint64_t pending_ = 0;
};

class ArithmeticDecoder {
 public:
  explicit ArithmeticDecoder(BitReader& in);

  /// Returns a value in [0, total); the caller locates the symbol whose
  /// cumulative range contains it and confirms with decode_update.
  std::uint32_t decode_target(std::uint32_t total) const;

  void decode_update(std::uint32_t cum_lo, std::uint32_t cum_hi,
                     std::uint32_t total);

  int decode_raw_bit();

 private:
  BitReader& in_;
  std::uint32_t low_ = 0;
  std::uint32_t high_ = 0xffffffffu;
  std::uint32_t code_ = 0;
};

/// Encodes one quantizer index under the PMF (escape path for indices
/// outside the support). Returns the ideal codelength for the index.
double encode_index(ArithmeticEncoder& enc, const ConditionalPmf& pmf,
                    std::int64_t index);

/// Decodes one quantizer index. Throws BitstreamCorrupt if an escape
/// magnitude exceeds the sanity cap.
std::int64_t decode_index(ArithmeticDecoder& dec, const ConditionalPmf& pmf);

}  // namespace zdrd
