#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace aadt {

// Deterministic pseudo-random stream (xoshiro256** seeded through
// splitmix64). The standard <random> distributions are implementation
// defined, so uniform/normal draws are derived here from raw 64-bit output
// to keep artifacts byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Substream keyed by (seed, name, index); used for the named streams
  // "split", "init", "folds", "synth", ... so components stay independently
  // reproducible.
  static Rng substream(std::uint64_t seed, std::string_view name,
                       std::uint64_t index = 0);

  std::uint64_t next_u64();
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  std::uint64_t below(std::uint64_t n);    // [0, n), unbiased
  double normal();                         // standard normal (Box-Muller)
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& x);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace aadt
