#pragma once

// Resonant Tavis-Cummings interaction and exact unitary evolution.
// Units: hbar = 1; times enter only through the product gamma * t.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tcpurify/errors.hpp"
#include "tcpurify/hilbert.hpp"

namespace tcpurify {

struct HamiltonianSpec {
    CompositeSpace space;
    double gamma = 1.0;
    // Per-emitter coupling multipliers; empty means all 1.
    std::vector<double> coupling_multipliers;

    double multiplier(std::size_t emitter_index) const {
        return coupling_multipliers.empty() ? 1.0 : coupling_multipliers.at(emitter_index - 1);
    }

    void validate() const {
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw InputError("coupling gamma must be positive and finite");
        if (!coupling_multipliers.empty() &&
            coupling_multipliers.size() != space.n_emitters())
            throw InputError("expected " + std::to_string(space.n_emitters()) +
                             " coupling multipliers, got " +
                             std::to_string(coupling_multipliers.size()));
        for (double m : coupling_multipliers)
            if (!std::isfinite(m)) throw InputError("coupling multiplier is not finite");
    }

    friend bool operator==(const HamiltonianSpec&, const HamiltonianSpec&) = default;
};

// H = gamma * sum_n m_n (a sigma_n^+ + a^+ sigma_n^-)
inline OperatorMatrix build_tc_hamiltonian(const HamiltonianSpec& spec) {
    spec.validate();
    const CompositeSpace& space = spec.space;
    const auto [a, a_dag] = ladder_operators(space);
    const auto d = static_cast<Eigen::Index>(space.dim());
    Matrix h = Matrix::Zero(d, d);
    for (std::size_t n = 1; n <= space.n_emitters(); ++n) {
        const Matrix lower = emitter_lowering(space, n).matrix();
        const Matrix raise = lower.adjoint();
        h += spec.gamma * spec.multiplier(n) * (a.matrix() * raise + a_dag.matrix() * lower);
    }
    OperatorMatrix op{space, std::move(h)};
    if (!op.attest_hermitian()) throw NumericError("Tavis-Cummings Hamiltonian is not Hermitian");
    return op;
}

// Hermitian eigendecomposition H = V diag(lambda) V^+, reusable for any t.
class SpectralEvolver {
public:
    explicit SpectralEvolver(const OperatorMatrix& hamiltonian) : space_(hamiltonian.space()) {
        if (!hamiltonian.is_hermitian())
            throw InputError("propagator requires a Hamiltonian attested Hermitian");
        Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian.matrix());
        if (es.info() != Eigen::Success)
            throw NumericError("Hermitian eigendecomposition failed");
        energies_ = es.eigenvalues();
        vectors_ = es.eigenvectors();
    }

    const CompositeSpace& space() const noexcept { return space_; }
    const Eigen::VectorXd& energies() const noexcept { return energies_; }

    Matrix unitary(double t) const {
        Vector phases(energies_.size());
        for (Eigen::Index i = 0; i < energies_.size(); ++i)
            phases(i) = std::exp(Complex{0.0, -energies_(i) * t});
        return vectors_ * phases.asDiagonal() * vectors_.adjoint();
    }

private:
    CompositeSpace space_;
    Eigen::VectorXd energies_;
    Matrix vectors_;
};

struct Propagator {
    OperatorMatrix unitary;
    double time = 0.0;
};

inline Propagator propagator(const SpectralEvolver& evolver, double t) {
    OperatorMatrix u{evolver.space(), evolver.unitary(t)};
    if (!u.attest_unitary())
        throw NumericError("propagator failed the unitarity check at t = " + std::to_string(t));
    return {std::move(u), t};
}

inline Propagator propagator(const OperatorMatrix& hamiltonian, double t) {
    return propagator(SpectralEvolver{hamiltonian}, t);
}

inline StateVector evolve(const StateVector& state, const OperatorMatrix& hamiltonian, double t) {
    require_same_space(state.space(), hamiltonian.space());
    return propagator(hamiltonian, t).unitary.apply(state);
}

} // namespace tcpurify
