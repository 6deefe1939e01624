#pragma once

// Target and reference emitter states: singlet, W, GHZ, the antisymmetric
// T-type states of three emitters, and product configurations.

#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcpurify/errors.hpp"
#include "tcpurify/hilbert.hpp"

namespace tcpurify {

struct NamedState {
    std::string label;
    std::size_t n_emitters = 0;
    StateVector state;
};

namespace detail {

// Sum of (coefficient, bitstring) terms on the emitter space, normalized.
inline StateVector superpose(const CompositeSpace& emitters,
                             std::initializer_list<std::pair<double, std::string_view>> terms) {
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(emitters.dim()));
    for (const auto& [c, bits] : terms)
        amps(static_cast<Eigen::Index>(emitters.index({emitters.parse_bitstring(bits), 0}))) += c;
    return StateVector{emitters, std::move(amps)}.normalized();
}

inline void require_emitters(std::string_view label, std::size_t n, std::size_t expected) {
    if (n != expected)
        throw InputError("state '" + std::string(label) + "' needs " + std::to_string(expected) +
                         " emitters, got " + std::to_string(n));
}

} // namespace detail

// Labels: singlet (n=2); w, w2, ghz, t1..t4 (n=3); product:<bits> or a bare
// bitstring such as "100" (any n).
inline NamedState make_named_state(std::string_view label, std::size_t n_emitters) {
    const CompositeSpace emitters = build_space(n_emitters, 0);
    auto named = [&](StateVector v) {
        return NamedState{std::string(label), n_emitters, std::move(v)};
    };
    using detail::superpose;

    if (label == "singlet") {
        detail::require_emitters(label, n_emitters, 2);
        return named(superpose(emitters, {{1.0, "eg"}, {-1.0, "ge"}}));
    }
    if (label == "w" || label == "w2" || label == "ghz" || label == "t1" || label == "t2" ||
        label == "t3" || label == "t4") {
        detail::require_emitters(label, n_emitters, 3);
        if (label == "w") return named(superpose(emitters, {{1, "egg"}, {1, "geg"}, {1, "gge"}}));
        if (label == "w2") return named(superpose(emitters, {{1, "gee"}, {1, "ege"}, {1, "eeg"}}));
        if (label == "ghz") return named(superpose(emitters, {{1, "ggg"}, {-1, "eee"}}));
        if (label == "t1") return named(superpose(emitters, {{1, "egg"}, {-1, "gge"}}));
        if (label == "t2") return named(superpose(emitters, {{1, "egg"}, {-2, "geg"}, {1, "gge"}}));
        if (label == "t3") return named(superpose(emitters, {{1, "gee"}, {-1, "eeg"}}));
        return named(superpose(emitters, {{1, "gee"}, {-2, "ege"}, {1, "eeg"}}));
    }
    std::string_view bits = label;
    if (bits.starts_with("product:")) bits.remove_prefix(8);
    if (!bits.empty() && bits.find_first_not_of("01ge") == std::string_view::npos)
        return named(basis_state(emitters, bits, 0));
    throw InputError("unknown state label '" + std::string(label) + "'");
}

// <target| rho |target>, clamped into [0, 1] against round-off.
inline double fidelity(const DensityMatrix& rho, const NamedState& target) {
    require_same_space(rho.space(), target.state.space());
    const Vector& v = target.state.amplitudes();
    const double f = v.dot(rho.matrix() * v).real();
    constexpr double slack = 1e-12;
    if (f < -slack || f > 1.0 + slack)
        throw NumericError("fidelity " + std::to_string(f) + " outside [0, 1]");
    return std::clamp(f, 0.0, 1.0);
}

} // namespace tcpurify
