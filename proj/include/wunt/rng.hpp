#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "wunt/common.hpp"

namespace wunt::rng {

//! Philox4x32-10 counter-based generator. Every draw is a pure function
//! of (seed, stream, index), which keeps parallel simulation and
//! prefix-nested sampling deterministic.
struct Philox4x32 {
  static constexpr std::uint32_t mult_a = 0xD2511F53u;
  static constexpr std::uint32_t mult_b = 0xCD9E8D57u;
  static constexpr std::uint32_t weyl_a = 0x9E3779B9u;
  static constexpr std::uint32_t weyl_b = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key)
  {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(mult_a) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(mult_b) * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = { hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0 };
      key[0] += weyl_a;
      key[1] += weyl_b;
    }
    return ctr;
  }
};

//! 64 random bits at a (seed, stream, index) coordinate.
inline std::uint64_t bits64(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t index)
{
  const std::array<std::uint32_t, 4> ctr = {
    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)
  };
  const std::array<std::uint32_t, 2> key = {
    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)
  };
  const auto out = Philox4x32::block(ctr, key);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

//! Uniform draw strictly inside (0, 1): (k + 0.5) * 2^-53 on 53 bits.
inline double uniform01(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t index)
{
  const std::uint64_t k = bits64(seed, stream, index) >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

//! Inverse standard normal CDF, Wichura's AS 241 (PPND16).
inline double normal_icdf(double p)
{
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) {
      return -std::numeric_limits<double>::infinity();
    }
    if (p == 1.0) {
      return std::numeric_limits<double>::infinity();
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
      (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
            6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
          1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
        1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
      (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
            3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
          5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
        4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
      (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
            2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
          3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
        4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
      (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
            1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
          6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
        2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
      (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
            1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
          2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
        5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
      (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
            1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
          1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
        5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

inline double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

//! Standard normal draw by inverse CDF (one uniform per normal).
inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index)
{
  return normal_icdf(uniform01(seed, stream, index));
}

inline bool bernoulli(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t index, double p)
{
  return uniform01(seed, stream, index) < p;
}

} // namespace wunt::rng
