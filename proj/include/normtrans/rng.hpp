#ifndef NORMTRANS_RNG_HPP
#define NORMTRANS_RNG_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace normtrans {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `stream` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0xbb67ae8584caa73bULL * (stream + 1));
  return splitmix64(s);
}

/// mt19937_64 stream whose seed derives from (master seed, stream index)
/// through SplitMix64, so independent streams are reproducible bit for bit.
class Rng {
 public:
  static constexpr const char* algorithm = "mt19937_64/splitmix64";

  explicit Rng(std::uint64_t master, std::uint64_t stream = 0) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL * (stream + 1));
    splitmix64(s);
    engine_.seed(splitmix64(s));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Index drawn from a cumulative table (last entry is the total mass).
  std::size_t categorical(const std::vector<double>& cdf) {
    const double u = uniform01() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::size_t>(it - cdf.begin());
  }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = (s += p[i]);
  return c;
}

}  // namespace normtrans

#endif  // NORMTRANS_RNG_HPP
