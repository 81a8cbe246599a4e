#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ciro/geo.hpp"

namespace ciro {

// splitmix64 step; used to derive independent substream seeds.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled value mappings: the standard pins the engine
// output but not the distributions, and reproducibility across library
// versions matters more here than distribution pedigree.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t u64() { return eng_(); }

    // Unbiased enough for simulation purposes; deterministic everywhere.
    uint64_t below(uint64_t n) { return n ? eng_() % n : 0; }

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller without caching the second variate.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
        return mean + stddev * z;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace ciro
