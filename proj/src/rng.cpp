#include "harnack/rng.hpp"

#include <cmath>

namespace harnack {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
  hi = std::uint32_t(p >> 32);
  lo = std::uint32_t(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((std::uint64_t(hi) << 32) | lo) >> 11;
  return (double(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

double inverse_normal_cdf(double p) noexcept {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
             45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608);
    const double den =
        (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
             21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
             1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
             0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
             0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
             7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (unsigned char ch : tag) h = splitmix64(h ^ ch);
  return h;
}

std::array<double, 2> NoisePlan::uniform_pair(std::size_t path, std::size_t step,
                                              std::size_t pair_index) const noexcept {
  const std::uint64_t p = std::uint64_t(path) + first_;
  const PhiloxCounter ctr{std::uint32_t(pair_index), std::uint32_t(step), std::uint32_t(p), std::uint32_t(p >> 32)};
  const PhiloxKey key{std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
  const auto out = philox4x32_10(ctr, key);
  return {to_open_unit(out[0], out[1]), to_open_unit(out[2], out[3])};
}

double NoisePlan::uniform(std::size_t path, std::size_t step, std::size_t mode) const noexcept {
  return uniform_pair(path, step, mode / 2)[mode % 2];
}

double NoisePlan::normal(std::size_t path, std::size_t step, std::size_t mode) const noexcept {
  return inverse_normal_cdf(uniform(path, step, mode));
}

void NoisePlan::fill_uniforms(std::size_t path, std::size_t step, std::span<double> out) const noexcept {
  const std::size_t n = out.size();
  for (std::size_t j = 0; 2 * j < n; ++j) {
    const auto u = uniform_pair(path, step, j);
    out[2 * j] = u[0];
    if (2 * j + 1 < n) out[2 * j + 1] = u[1];
  }
}

void NoisePlan::fill_normals(std::size_t path, std::size_t step, std::span<double> out) const noexcept {
  fill_uniforms(path, step, out);
  for (double& v : out) v = inverse_normal_cdf(v);
}

}  // namespace harnack
