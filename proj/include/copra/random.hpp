#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace copra {

// SplitMix64 finalizer; a fixed bijective mixer used to derive substreams.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed of the independent stream for `trial_index` under `master_seed`.
// Depends only on the pair, never on execution order.
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept;

/// Deterministic random stream.
///
/// Built on std::mt19937_64, whose output sequence is fixed by the standard.
/// The variate transforms are written out here rather than taken from
/// <random> distributions, whose algorithms differ between standard
/// libraries; a seed therefore reproduces bit-identically on any platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    // Standard normal N(0, 1).
    double normal();
    // Circular complex Gaussian CN(0, 1): real and imaginary parts N(0, 1/2).
    std::complex<double> complex_normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace copra
