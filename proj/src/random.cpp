#include "copra/random.hpp"

#include <cmath>
#include <numbers>

namespace copra {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
    return mix64(mix64(master_seed) ^ (trial_index * 0xd1b54a32d192ed03ULL));
}

double RandomStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RandomStream::normal() {
    // Box-Muller, cosine branch only.
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::complex<double> RandomStream::complex_normal() {
    // |z|^2 ~ Exp(1) with uniform phase gives CN(0, 1).
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::polar(std::sqrt(-std::log(u1)), 2.0 * std::numbers::pi * u2);
}

}  // namespace copra
