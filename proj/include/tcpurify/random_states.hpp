#pragma once

// Seeded random states for property checks. The samplers map raw
// mt19937_64 output themselves so a seed reproduces the same states on every
// standard library.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "tcpurify/hilbert.hpp"

namespace tcpurify {

class StateSampler {
public:
    explicit StateSampler(std::uint64_t seed) : rng_(seed) {}

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    double gaussian() {
        // Box-Muller; 1 - u keeps the log argument in (0, 1].
        const double u = 1.0 - uniform();
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
    }

    Complex complex_gaussian() { return {gaussian(), gaussian()}; }

    // Haar-random pure state on the whole space.
    StateVector pure_state(const CompositeSpace& space) {
        std::vector<std::size_t> all(space.dim());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return pure_state(space, all);
    }

    // Random pure state supported on the listed basis indices.
    StateVector pure_state(const CompositeSpace& space, const std::vector<std::size_t>& support) {
        Vector amps = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
        for (std::size_t i : support) amps(static_cast<Eigen::Index>(i)) = complex_gaussian();
        return StateVector{space, std::move(amps)}.normalized();
    }

    // Ginibre-ensemble mixed state G G^+ / Tr supported on the listed indices.
    DensityMatrix mixed_state(const CompositeSpace& space, const std::vector<std::size_t>& support) {
        const auto d = static_cast<Eigen::Index>(space.dim());
        Matrix g = Matrix::Zero(d, d);
        for (std::size_t r : support)
            for (std::size_t c : support)
                g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = complex_gaussian();
        Matrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        return {space, 0.5 * (rho + rho.adjoint())};
    }

private:
    std::mt19937_64 rng_;
};

} // namespace tcpurify
