#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ipose/geometry.hpp"

namespace ipose {

/// Seeded random source with explicitly coded transforms so that streams are
/// bit-identical across compilers and standard libraries (std::*_distribution
/// is implementation-defined and would break reproducible output files).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// splitmix64 mix of a base seed and a stream index, for derived per-trial seeds.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
        std::uint64_t v = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
        v ^= v >> 30;
        v *= 0xbf58476d1ce4e5b9ULL;
        v ^= v >> 27;
        v *= 0x94d049bb133111ebULL;
        v ^= v >> 31;
        return v;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes exactly two draws per call.
    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

    /// Poisson-distributed count (Knuth); intended for small rates.
    int poisson(double lambda) {
        if (lambda <= 0.0) {
            return 0;
        }
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    /// Uniform integer in [0, n).
    std::uint64_t integer(std::uint64_t n) {
        // Rejection-free modulo is biased for large n; all uses here have n << 2^32.
        return engine_() % n;
    }

    Vec3 gaussian_vec3(double sigma) {
        const double a = gaussian(0.0, sigma);
        const double b = gaussian(0.0, sigma);
        const double c = gaussian(0.0, sigma);
        return {a, b, c};
    }

    /// Uniformly distributed rotation (normalized 4-dimensional gaussian).
    UnitQuaternion rotation() {
        const double a = gaussian();
        const double b = gaussian();
        const double c = gaussian();
        const double d = gaussian();
        return UnitQuaternion{a, b, c, d}.normalized();
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ipose
