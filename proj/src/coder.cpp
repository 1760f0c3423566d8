#include "zdrd/coder.hpp"

#include <algorithm>
#include <cmath>

#include "zdrd/errors.hpp"
#include "zdrd/rng.hpp"

namespace zdrd {

namespace {

constexpr double kSupportSigmas = 8.0;
constexpr std::int64_t kEscapeMagnitudeCap = 1 << 20;

std::int64_t round_half_away(double v) {
  return static_cast<std::int64_t>(std::round(v));
}

// Phi(b) - Phi(a) for a <= b, stable in both tails.
double normal_mass(double a, double b) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  if (a >= 0.0)
    return 0.5 * (std::erfc(a * inv_sqrt2) - std::erfc(b * inv_sqrt2));
  if (b <= 0.0)
    return 0.5 * (std::erfc(-b * inv_sqrt2) - std::erfc(-a * inv_sqrt2));
  return normal_cdf(b) - normal_cdf(a);
}

}  // namespace

ConditionalPmf conditional_pmf(double r, double sigma, double step) {
  if (sigma <= 0.0) throw NonPositiveSigma("alpha std dev must be positive");
  if (step <= 0.0) throw NonPositiveVariance("quantizer step must be positive");

  ConditionalPmf pmf;
  pmf.i_min = round_half_away((r - kSupportSigmas * sigma) / step);
  pmf.i_max = round_half_away((r + kSupportSigmas * sigma) / step);
  const int n = static_cast<int>(pmf.i_max - pmf.i_min + 1);

  std::vector<double> raw(n);
  double raw_total = 0.0;
  for (int s = 0; s < n; ++s) {
    const double j = static_cast<double>(pmf.i_min + s);
    const double a = (j * step - 0.5 * step - r) / sigma;
    const double b = (j * step + 0.5 * step - r) / sigma;
    raw[s] = normal_mass(a, b);
    raw_total += raw[s];
  }

  // quantize to integer frequencies; every support symbol keeps >= 1
  const std::uint32_t budget = kFreqTotal - kEscapeFreq;
  std::vector<std::uint32_t> freq(n);
  std::int64_t sum = 0;
  for (int s = 0; s < n; ++s) {
    const double share = raw_total > 0.0 ? raw[s] / raw_total : 1.0 / n;
    freq[s] = static_cast<std::uint32_t>(
        std::max<std::int64_t>(1, std::llround(share * budget)));
    sum += freq[s];
  }
  std::int64_t diff = static_cast<std::int64_t>(budget) - sum;
  while (diff != 0) {
    int arg = 0;
    for (int s = 1; s < n; ++s)
      if (freq[s] > freq[arg]) arg = s;
    if (diff > 0) {
      freq[arg] += static_cast<std::uint32_t>(diff);
      diff = 0;
    } else {
      const std::int64_t take =
          std::min<std::int64_t>(-diff, static_cast<std::int64_t>(freq[arg]) - 1);
      freq[arg] -= static_cast<std::uint32_t>(take);
      diff += take;
      if (take == 0) throw Error("frequency table cannot absorb the deficit");
    }
  }

  pmf.p_escape = static_cast<double>(kEscapeFreq) / kFreqTotal;
  pmf.probabilities.resize(n);
  for (int s = 0; s < n; ++s)
    pmf.probabilities[s] = static_cast<double>(freq[s]) / kFreqTotal;

  pmf.cum.resize(n + 2);
  pmf.cum[0] = 0;
  for (int s = 0; s < n; ++s) pmf.cum[s + 1] = pmf.cum[s] + freq[s];
  pmf.cum[n + 1] = pmf.cum[n] + kEscapeFreq;
  pmf.total = pmf.cum[n + 1];
  return pmf;
}

double shannon_length_check(const ConditionalPmf& pmf, std::int64_t index) {
  if (pmf.contains(index)) {
    const int s = static_cast<int>(index - pmf.i_min);
    const double p = static_cast<double>(pmf.cum[s + 1] - pmf.cum[s]) / pmf.total;
    return -std::log2(p);
  }
  // escape path: escape mass, side bit, unary magnitude
  const std::int64_t e =
      index > pmf.i_max ? index - pmf.i_max : pmf.i_min - index;
  return -std::log2(pmf.p_escape) + 1.0 + static_cast<double>(e);
}

namespace {
constexpr std::uint32_t kHalf = 0x80000000u;
constexpr std::uint32_t kQuarter = 0x40000000u;
constexpr std::uint32_t kThreeQuarters = 0xc0000000u;
}  // namespace

void ArithmeticEncoder::emit(int bit) {
  out_.put(bit);
  for (; pending_ > 0; --pending_) out_.put(!bit);
}

void ArithmeticEncoder::encode(std::uint32_t cum_lo, std::uint32_t cum_hi,
                               std::uint32_t total) {
  const std::uint64_t range =
      static_cast<std::uint64_t>(high_ - low_) + 1;
  high_ = low_ + static_cast<std::uint32_t>(range * cum_hi / total) - 1;
  low_ = low_ + static_cast<std::uint32_t>(range * cum_lo / total);
  for (;;) {
    if (high_ < kHalf) {
      emit(0);
    } else if (low_ >= kHalf) {
      emit(1);
      low_ -= kHalf;
      high_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      ++pending_;
      low_ -= kQuarter;
      high_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
  }
}

void ArithmeticEncoder::finish() {
  // after renormalization low < HALF <= high, so the value
  // 0.1{pending zeros}000... always identifies the final interval
  emit(1);
}

ArithmeticDecoder::ArithmeticDecoder(BitReader& in) : in_(in) {
  for (int i = 0; i < 32; ++i) code_ = (code_ << 1) | in_.get();
}

std::uint32_t ArithmeticDecoder::decode_target(std::uint32_t total) const {
  const std::uint64_t range =
      static_cast<std::uint64_t>(high_ - low_) + 1;
  return static_cast<std::uint32_t>(
      ((static_cast<std::uint64_t>(code_ - low_) + 1) * total - 1) / range);
}

void ArithmeticDecoder::decode_update(std::uint32_t cum_lo, std::uint32_t cum_hi,
                                      std::uint32_t total) {
  const std::uint64_t range =
      static_cast<std::uint64_t>(high_ - low_) + 1;
  high_ = low_ + static_cast<std::uint32_t>(range * cum_hi / total) - 1;
  low_ = low_ + static_cast<std::uint32_t>(range * cum_lo / total);
  for (;;) {
    if (high_ < kHalf) {
      // nothing to subtract
    } else if (low_ >= kHalf) {
      low_ -= kHalf;
      high_ -= kHalf;
      code_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      low_ -= kQuarter;
      high_ -= kQuarter;
      code_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
    code_ = (code_ << 1) | in_.get();
  }
}

int ArithmeticDecoder::decode_raw_bit() {
  const std::uint32_t target = decode_target(2);
  const int bit = target >= 1 ? 1 : 0;
  decode_update(bit ? 1u : 0u, bit ? 2u : 1u, 2u);
  return bit;
}

double encode_index(ArithmeticEncoder& enc, const ConditionalPmf& pmf,
                    std::int64_t index) {
  const double ideal = shannon_length_check(pmf, index);
  if (pmf.contains(index)) {
    const int s = static_cast<int>(index - pmf.i_min);
    enc.encode(pmf.cum[s], pmf.cum[s + 1], pmf.total);
    return ideal;
  }
  const int esc = pmf.n_support();
  enc.encode(pmf.cum[esc], pmf.cum[esc + 1], pmf.total);
  const bool below = index < pmf.i_min;
  enc.encode_raw_bit(below ? 1 : 0);
  std::int64_t e = below ? pmf.i_min - index : index - pmf.i_max;
  for (std::int64_t k = 1; k < e; ++k) enc.encode_raw_bit(1);
  enc.encode_raw_bit(0);
  return ideal;
}

std::int64_t decode_index(ArithmeticDecoder& dec, const ConditionalPmf& pmf) {
  const std::uint32_t target = dec.decode_target(pmf.total);
  // cum is sorted; find the symbol whose range holds the target
  const auto it =
      std::upper_bound(pmf.cum.begin(), pmf.cum.end(), target) - 1;
  const int s = static_cast<int>(it - pmf.cum.begin());
  dec.decode_update(pmf.cum[s], pmf.cum[s + 1], pmf.total);
  if (s < pmf.n_support()) return pmf.i_min + s;

  const int below = dec.decode_raw_bit();
  std::int64_t e = 1;
  while (dec.decode_raw_bit() == 1) {
    if (++e > kEscapeMagnitudeCap)
      throw BitstreamCorrupt("escape magnitude exceeds sanity cap");
  }
  return below ? pmf.i_min - e : pmf.i_max + e;
}

}  // namespace zdrd
