#ifndef PARAFORGE_RNG_H_
#define PARAFORGE_RNG_H_

#include <cstdint>
#include <string_view>
#include <vector>

namespace paraforge {

// 64-bit FNV-1a over raw bytes. Used to derive stream keys from labels.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

// SplitMix64 (Steele, Lea & Flood 2014). Every stochastic step in the
// toolkit draws from this generator so outputs are identical across
// compilers and standard libraries; std:: distributions are not.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  // Child stream keyed by (seed, label). Adding a new label never shifts
  // another label's stream.
  static SplitMix64 keyed(std::uint64_t seed, std::string_view label);

  std::uint64_t next();

  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double unit();

 private:
  std::uint64_t state_;
};

// Chooses `count` distinct indices from [0, population) by a partial
// Fisher-Yates pass and returns them in ascending order.
std::vector<std::size_t> choose_sorted(SplitMix64& rng, std::size_t population,
                                       std::size_t count);

template <typename T>
void shuffle(SplitMix64& rng, std::vector<T>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace paraforge

#endif  // PARAFORGE_RNG_H_
