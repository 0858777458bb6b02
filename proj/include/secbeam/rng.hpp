#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "secbeam/common.hpp"

namespace secbeam {

// Seed derivation: every random stream is keyed by (master seed, stream tag,
// index) so adding a consumer never shifts the draws of another.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t substream_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t idx = 0) {
    return splitmix64(master ^ fnv1a64(tag) ^
                      splitmix64(idx * 0x9e3779b97f4a7c15ull));
}

// mt19937_64 is bit-exact across platforms; the distributions wrapped here
// avoid std::normal_distribution, whose output is implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // (0, 1)
        const std::uint64_t u = eng_() >> 11;  // 53 bits
        return (static_cast<double>(u) + 0.5) * 0x1.0p-53;
    }

    double gaussian() {  // Box-Muller, one value per pair of uniforms
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    cplx cn01() {  // circularly symmetric, unit variance
        const double re = gaussian();
        const double im = gaussian();
        return cplx(re * M_SQRT1_2, im * M_SQRT1_2);
    }

    cvec cn01_vec(int n) {
        cvec v(n);
        for (int i = 0; i < n; ++i) v(i) = cn01();
        return v;
    }

    // Uniform over the complex ball of given radius: Gaussian direction
    // scaled by radius * u^(1/(2N)).
    cvec uniform_ball(int n, double radius) {
        cvec d = cn01_vec(n);
        const double nrm = d.norm();
        if (nrm == 0.0 || radius == 0.0) return cvec::Zero(n);
        const double scale =
            radius * std::pow(uniform(), 1.0 / (2.0 * n)) / nrm;
        return d * scale;
    }

    std::uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace secbeam
