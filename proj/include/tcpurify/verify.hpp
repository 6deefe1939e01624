#pragma once

// Property suite run by `tcpurify verify`: structural invariants of the model
// plus agreement between simulation and the closed-form laws.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "tcpurify/closed_form.hpp"
#include "tcpurify/conditional.hpp"
#include "tcpurify/dynamics.hpp"
#include "tcpurify/named_states.hpp"
#include "tcpurify/protocol.hpp"
#include "tcpurify/random_states.hpp"

namespace tcpurify {

struct VerifyOptions {
    std::uint64_t seed = 20040101;
    std::size_t random_cases = 64;
    // Applied to every two- or three-emitter model whose size matches.
    std::vector<double> coupling_multipliers;
    FormulaVariant formula;
};

struct PropertyResult {
    std::string name;
    bool passed = false;
    double residual = 0.0;
    double tolerance = 0.0;
};

// gamma*tau = 0.1, 0.2, ..., 3.0
inline std::vector<double> standard_gamma_tau_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 30; ++i) g.push_back(0.1 * i);
    return g;
}

// Values of gamma*tau where none of the two- or three-emitter conditional
// amplitudes reaches magnitude 1.
inline std::vector<double> generic_gamma_tau_points() {
    return {0.37, 0.53, 0.71, 0.89, 1.13, 1.37, 1.61, 1.87, 2.37, 2.71};
}

namespace detail {

inline std::vector<double> multipliers_for(const VerifyOptions& o, std::size_t n) {
    return o.coupling_multipliers.size() == n ? o.coupling_multipliers : std::vector<double>{};
}

inline PropertyResult make_result(std::string name, double residual, double tol) {
    return {std::move(name), residual <= tol, residual, tol};
}

inline OperatorMatrix random_hamiltonian(StateSampler& s, std::size_t& n_out) {
    const std::size_t n = 1 + s.index(3);
    const std::size_t cutoff = s.index(4);
    std::vector<double> mult(n);
    for (double& m : mult) m = s.uniform(0.5, 1.5);
    n_out = n;
    return build_tc_hamiltonian({build_space(n, cutoff), s.uniform(0.2, 2.0), mult});
}

} // namespace detail

inline PropertyResult check_excitation_conservation(const VerifyOptions& o) {
    StateSampler s(o.seed);
    double worst = 0.0;
    for (std::size_t c = 0; c < o.random_cases; ++c) {
        std::size_t n = 0;
        const OperatorMatrix h = detail::random_hamiltonian(s, n);
        const Matrix n_tot = total_excitation_operator(h.space()).matrix();
        worst = std::max(worst, max_abs(h.matrix() * n_tot - n_tot * h.matrix()));
    }
    return detail::make_result("hamiltonian_conserves_excitations", worst, 1e-12);
}

inline PropertyResult check_propagator_unitarity(const VerifyOptions& o) {
    StateSampler s(o.seed + 1);
    double worst = 0.0;
    for (std::size_t c = 0; c < o.random_cases; ++c) {
        std::size_t n = 0;
        const OperatorMatrix h = detail::random_hamiltonian(s, n);
        const Matrix u = SpectralEvolver{h}.unitary(s.uniform(0.0, 10.0));
        worst = std::max(worst, max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())));
    }
    return detail::make_result("propagator_unitarity", worst, 1e-10);
}

inline PropertyResult check_propagator_group_law(const VerifyOptions& o) {
    StateSampler s(o.seed + 2);
    double worst = 0.0;
    for (std::size_t c = 0; c < o.random_cases; ++c) {
        std::size_t n = 0;
        const SpectralEvolver ev{detail::random_hamiltonian(s, n)};
        const double t1 = s.uniform(0.0, 5.0), t2 = s.uniform(0.0, 5.0);
        worst = std::max(worst, max_abs(ev.unitary(t1) * ev.unitary(t2) - ev.unitary(t1 + t2)));
    }
    return detail::make_result("propagator_group_law", worst, 1e-10);
}

inline PropertyResult check_sector_block_structure(const VerifyOptions& o) {
    StateSampler s(o.seed + 3);
    double worst = 0.0;
    for (std::size_t c = 0; c < o.random_cases; ++c) {
        std::size_t n = 0;
        const OperatorMatrix h = detail::random_hamiltonian(s, n);
        const Matrix u = SpectralEvolver{h}.unitary(s.uniform(0.0, 10.0));
        const CompositeSpace& sp = h.space();
        for (std::size_t i = 0; i < sp.dim(); ++i)
            for (std::size_t j = 0; j < sp.dim(); ++j)
                if (sp.quanta(i) != sp.quanta(j))
                    worst = std::max(worst, std::abs(u(static_cast<Eigen::Index>(i),
                                                       static_cast<Eigen::Index>(j))));
    }
    return detail::make_result("propagator_sector_block_diagonal", worst, 1e-12);
}

inline PropertyResult check_channel_contraction(const VerifyOptions& o) {
    StateSampler s(o.seed + 4);
    double worst = 0.0;
    for (std::size_t c = 0; c < o.random_cases; ++c) {
        const std::size_t n = 1 + s.index(3);
        const ConditionalChannel ch =
            conditional_channel(n, s.uniform(0.0, 4.0), s.index(4), detail::multipliers_for(o, n));
        for (Complex l : channel_spectrum(ch).eigenvalues)
            worst = std::max(worst, std::abs(l) - 1.0);
    }
    return detail::make_result("channel_contraction", std::max(worst, 0.0), 1e-10);
}

// sum_k |<k| U |k0> v|^2 = 1 for pure emitter states v.
inline PropertyResult check_probability_completeness(const VerifyOptions& o) {
    StateSampler s(o.seed + 5);
    double worst = 0.0;
    for (std::size_t c = 0; c < o.random_cases; ++c) {
        const std::size_t n = 1 + s.index(3);
        const std::size_t k0 = s.index(4);
        const CompositeSpace space = build_space(n, n + k0);
        const SpectralEvolver ev{
            build_tc_hamiltonian({space, 1.0, detail::multipliers_for(o, n)})};
        const double tau = s.uniform(0.0, 4.0);
        const StateVector v = s.pure_state(space.emitter_space());
        double total = 0.0;
        for (std::size_t k = 0; k <= space.photon_cutoff(); ++k)
            total += (measurement_operator(ev, tau, k0, k) * v.amplitudes()).squaredNorm();
        worst = std::max(worst, std::abs(total - 1.0));
    }
    return detail::make_result("probability_completeness", worst, 1e-10);
}

inline PropertyResult check_singlet_trapping(const VerifyOptions& o) {
    const StateVector singlet = make_named_state("singlet", 2).state;
    double worst = 0.0;
    for (std::size_t k = 1; k <= 3; ++k) {
        for (double gt : standard_gamma_tau_grid()) {
            const ConditionalChannel ch = conditional_channel(2, gt, k, detail::multipliers_for(o, 2));
            const Vector out = ch.matrix() * singlet.amplitudes();
            // Best phase: e^{i theta} = <s|out>/|<s|out>|.
            const Complex ov = singlet.amplitudes().dot(out);
            const Complex phase = std::abs(ov) > 0 ? ov / std::abs(ov) : Complex{1.0, 0.0};
            worst = std::max(worst, (out - phase * singlet.amplitudes()).norm());
        }
    }
    return detail::make_result("singlet_trapping", worst, 1e-10);
}

inline PropertyResult check_two_emitter_probability(const VerifyOptions& o) {
    const NamedState target = make_named_state("singlet", 2);
    const DensityMatrix init = DensityMatrix::from_pure(make_named_state("10", 2).state);
    double worst = 0.0;
    for (double gt : standard_gamma_tau_grid()) {
        const ProtocolResult r =
            run_purification(init, conditional_channel(2, gt, 1, detail::multipliers_for(o, 2)), 20, target);
        for (const StepRecord& rec : r.records) {
            const double p = closed_form_two_emitter(gt, rec.step, 1, o.formula.frequency).probability.value;
            worst = std::max(worst, std::abs(rec.p_cumulative - p));
        }
    }
    return detail::make_result("two_emitter_probability_law", worst, 1e-10);
}

inline PropertyResult check_two_emitter_fidelity(const VerifyOptions& o) {
    const NamedState target = make_named_state("singlet", 2);
    const DensityMatrix init = DensityMatrix::from_pure(make_named_state("10", 2).state);
    double worst = 0.0;
    for (double gt : standard_gamma_tau_grid()) {
        const ProtocolResult r =
            run_purification(init, conditional_channel(2, gt, 1, detail::multipliers_for(o, 2)), 20, target);
        for (const StepRecord& rec : r.records) {
            const TwoEmitterPrediction p = closed_form_two_emitter(gt, rec.step, 1, o.formula.frequency);
            const ClosedFormPrediction& f = o.formula.fidelity == FidelityForm::corrected
                                                ? p.fidelity_corrected
                                                : p.fidelity_as_printed;
            const double dev = f.valid ? std::abs(rec.fidelity - f.value)
                                       : std::numeric_limits<double>::infinity();
            worst = std::max(worst, dev);
        }
    }
    return detail::make_result("two_emitter_fidelity_law", worst, 1e-10);
}

inline PropertyResult check_three_emitter_laws(const VerifyOptions& o) {
    const NamedState target = make_named_state("w", 3);
    const DensityMatrix init = DensityMatrix::from_pure(make_named_state("100", 3).state);
    double worst = 0.0;
    for (double gt : standard_gamma_tau_grid()) {
        const ProtocolResult r =
            run_purification(init, conditional_channel(3, gt, 1, detail::multipliers_for(o, 3)), 20, target);
        for (const StepRecord& rec : r.records) {
            const ThreeEmitterPrediction p = closed_form_three_emitter(gt, rec.step);
            worst = std::max({worst, std::abs(rec.p_cumulative - p.probability.value),
                              std::abs(rec.fidelity - p.fidelity.value)});
        }
    }
    return detail::make_result("three_emitter_laws", worst, 1e-10);
}

// Residual: largest GHZ overlap with any persisting eigenvector.
inline PropertyResult check_ghz_non_preservation(const VerifyOptions& o) {
    double worst = 0.0;
    for (double gt : generic_gamma_tau_points()) {
        const GhzReport r = ghz_preservation_check(conditional_channel(3, gt, 1, detail::multipliers_for(o, 3)));
        worst = std::max(worst, r.preserved ? 1.0 : r.max_persisting_overlap);
    }
    return detail::make_result("ghz_non_preservation", worst, 1e-3);
}

// Residual: number of generic points where the spectrum is not exactly two
// 2-fold groups plus four singletons.
inline PropertyResult check_three_emitter_degeneracy(const VerifyOptions& o) {
    double misses = 0.0;
    for (double gt : generic_gamma_tau_points()) {
        const ChannelSpectrum sp = channel_spectrum(conditional_channel(3, gt, 1, detail::multipliers_for(o, 3)));
        auto sizes = sp.group_sizes();
        std::sort(sizes.begin(), sizes.end());
        if (sizes != std::vector<std::size_t>{1, 1, 1, 1, 2, 2}) misses += 1.0;
    }
    return detail::make_result("three_emitter_degeneracy", misses, 0.0);
}

inline std::vector<PropertyResult> run_verification(const VerifyOptions& o = {}) {
    return {check_excitation_conservation(o), check_propagator_unitarity(o),
            check_propagator_group_law(o),    check_sector_block_structure(o),
            check_channel_contraction(o),     check_probability_completeness(o),
            check_singlet_trapping(o),        check_two_emitter_probability(o),
            check_two_emitter_fidelity(o),    check_three_emitter_laws(o),
            check_ghz_non_preservation(o),    check_three_emitter_degeneracy(o)};
}

} // namespace tcpurify
