#pragma once

// Composite Hilbert space of N two-level emitters and one truncated cavity
// mode, with states and elementary operators over it.
//
// Basis ordering: the photon number is the slow index and the emitter
// configuration the fast one. Emitter i (1-based) is bit i-1 of the
// configuration; a set bit means the emitter is excited (e), a clear bit
// means ground (g):
//
//     index = photons * 2^N + emitter_bits
//
// Bitstrings are written emitter 1 first, so "100" is |e g g>.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcpurify/errors.hpp"

namespace tcpurify {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

struct BasisLabel {
    std::uint64_t emitter_bits = 0;
    std::size_t photons = 0;

    friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

class CompositeSpace {
public:
    static constexpr std::size_t default_max_dim = std::size_t{1} << 20;

    CompositeSpace() = default;

    std::size_t n_emitters() const noexcept { return n_emitters_; }
    std::size_t photon_cutoff() const noexcept { return photon_cutoff_; }
    std::size_t emitter_dim() const noexcept { return std::size_t{1} << n_emitters_; }
    std::size_t dim() const noexcept { return emitter_dim() * (photon_cutoff_ + 1); }

    // Highest total excitation number representable in this space.
    std::size_t max_quanta() const noexcept { return n_emitters_ + photon_cutoff_; }

    // The emitter factor alone, i.e. the same space with a vacuum-only cavity.
    CompositeSpace emitter_space() const {
        CompositeSpace s = *this;
        s.photon_cutoff_ = 0;
        return s;
    }

    std::size_t index(BasisLabel label) const {
        if (label.emitter_bits >= emitter_dim())
            throw InputError("emitter configuration out of range");
        if (label.photons > photon_cutoff_)
            throw InputError("photon number " + std::to_string(label.photons) +
                             " exceeds cutoff " + std::to_string(photon_cutoff_));
        return label.photons * emitter_dim() + static_cast<std::size_t>(label.emitter_bits);
    }

    BasisLabel label(std::size_t index) const {
        if (index >= dim()) throw InputError("basis index out of range");
        return {index % emitter_dim(), index / emitter_dim()};
    }

    std::size_t quanta(std::size_t index) const {
        const BasisLabel l = label(index);
        return static_cast<std::size_t>(std::popcount(l.emitter_bits)) + l.photons;
    }

    // All basis indices with exactly `m` total quanta, in ascending order.
    std::vector<std::size_t> sector(std::size_t m) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < dim(); ++i)
            if (quanta(i) == m) out.push_back(i);
        return out;
    }

    // "100" -> bits with emitter 1 set. Accepts 0/1 or g/e characters.
    std::uint64_t parse_bitstring(std::string_view bits) const {
        if (bits.size() != n_emitters_)
            throw InputError("bitstring '" + std::string(bits) + "' has length " +
                             std::to_string(bits.size()) + ", expected " +
                             std::to_string(n_emitters_));
        std::uint64_t out = 0;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            switch (bits[i]) {
            case '1':
            case 'e': out |= std::uint64_t{1} << i; break;
            case '0':
            case 'g': break;
            default: throw InputError("invalid bitstring character in '" + std::string(bits) + "'");
            }
        }
        return out;
    }

    // Physical label of an emitter configuration, e.g. "egg".
    std::string emitter_label(std::uint64_t bits) const {
        std::string s(n_emitters_, 'g');
        for (std::size_t i = 0; i < n_emitters_; ++i)
            if ((bits >> i) & 1u) s[i] = 'e';
        return s;
    }

    friend bool operator==(const CompositeSpace&, const CompositeSpace&) = default;

private:
    friend CompositeSpace build_space(std::size_t, std::size_t, std::size_t);

    std::size_t n_emitters_ = 1;
    std::size_t photon_cutoff_ = 0;
};

inline CompositeSpace build_space(std::size_t n_emitters, std::size_t photon_cutoff,
                                  std::size_t max_dim = CompositeSpace::default_max_dim) {
    if (n_emitters < 1) throw InputError("need at least one emitter");
    if (n_emitters >= 40 || photon_cutoff >= max_dim ||
        (std::size_t{1} << n_emitters) > max_dim / (photon_cutoff + 1))
        throw ConfigError("space with " + std::to_string(n_emitters) + " emitters and cutoff " +
                          std::to_string(photon_cutoff) + " exceeds dimension limit " +
                          std::to_string(max_dim));
    CompositeSpace s;
    s.n_emitters_ = n_emitters;
    s.photon_cutoff_ = photon_cutoff;
    return s;
}

inline void require_same_space(const CompositeSpace& a, const CompositeSpace& b) {
    if (!(a == b)) throw InputError("operands live in different spaces");
}

class StateVector {
public:
    StateVector(CompositeSpace space, Vector amplitudes)
        : space_(space), amplitudes_(std::move(amplitudes)) {
        if (static_cast<std::size_t>(amplitudes_.size()) != space_.dim())
            throw InputError("amplitude vector size does not match space dimension");
    }

    static StateVector zero(const CompositeSpace& space) {
        return {space, Vector::Zero(static_cast<Eigen::Index>(space.dim()))};
    }

    const CompositeSpace& space() const noexcept { return space_; }
    const Vector& amplitudes() const noexcept { return amplitudes_; }
    Complex amplitude(std::size_t index) const {
        return amplitudes_(static_cast<Eigen::Index>(index));
    }

    double norm() const { return amplitudes_.norm(); }

    StateVector normalized() const {
        const double n = norm();
        if (!(n > 0.0)) throw NumericError("cannot normalize a zero vector");
        return {space_, amplitudes_ / n};
    }

    Complex inner(const StateVector& other) const {
        require_same_space(space_, other.space_);
        return amplitudes_.dot(other.amplitudes_);
    }

private:
    CompositeSpace space_;
    Vector amplitudes_;
};

inline StateVector basis_state(const CompositeSpace& space, std::string_view emitter_bits,
                               std::size_t photons) {
    const std::uint64_t bits = space.parse_bitstring(emitter_bits);
    StateVector v = StateVector::zero(space);
    Vector amps = v.amplitudes();
    amps(static_cast<Eigen::Index>(space.index({bits, photons}))) = 1.0;
    return {space, std::move(amps)};
}

struct DensityCheck {
    double hermitian_residual = 0.0;
    double trace_residual = 0.0;
    double min_eigenvalue = 0.0;

    bool ok(double herm_tol = 1e-12, double trace_tol = 1e-12, double eig_tol = 1e-10) const {
        return hermitian_residual <= herm_tol && trace_residual <= trace_tol &&
               min_eigenvalue >= -eig_tol;
    }
};

class DensityMatrix {
public:
    DensityMatrix(CompositeSpace space, Matrix rho) : space_(space), rho_(std::move(rho)) {
        const auto d = static_cast<Eigen::Index>(space_.dim());
        if (rho_.rows() != d || rho_.cols() != d)
            throw InputError("density matrix shape does not match space dimension");
    }

    static DensityMatrix from_pure(const StateVector& psi) {
        const StateVector u = psi.normalized();
        return {u.space(), u.amplitudes() * u.amplitudes().adjoint()};
    }

    static DensityMatrix maximally_mixed(const CompositeSpace& space) {
        const auto d = static_cast<Eigen::Index>(space.dim());
        return {space, Matrix::Identity(d, d) / static_cast<double>(d)};
    }

    const CompositeSpace& space() const noexcept { return space_; }
    const Matrix& matrix() const noexcept { return rho_; }
    double trace() const { return rho_.trace().real(); }

    DensityCheck check() const {
        DensityCheck c;
        c.hermitian_residual = max_abs(rho_ - rho_.adjoint());
        c.trace_residual = std::abs(rho_.trace() - Complex{1.0, 0.0});
        const Matrix h = 0.5 * (rho_ + rho_.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
        c.min_eigenvalue = es.eigenvalues().minCoeff();
        return c;
    }

    // Throws InputError naming the violated property.
    void require_valid(double herm_tol = 1e-12, double trace_tol = 1e-12,
                       double eig_tol = 1e-10) const {
        const DensityCheck c = check();
        if (c.hermitian_residual > herm_tol)
            throw InputError("density matrix is not Hermitian (residual " +
                             std::to_string(c.hermitian_residual) + ")");
        if (c.trace_residual > trace_tol)
            throw InputError("density matrix trace differs from 1 by " +
                             std::to_string(c.trace_residual));
        if (c.min_eigenvalue < -eig_tol)
            throw InputError("density matrix has negative eigenvalue " +
                             std::to_string(c.min_eigenvalue));
    }

private:
    CompositeSpace space_;
    Matrix rho_;
};

// Dense operator with hermitian/unitary flags that are only ever set after a
// numerical check passes.
class OperatorMatrix {
public:
    static constexpr double hermitian_tol = 1e-12;
    static constexpr double unitary_tol = 1e-10;

    OperatorMatrix(CompositeSpace space, Matrix m) : space_(space), m_(std::move(m)) {
        const auto d = static_cast<Eigen::Index>(space_.dim());
        if (m_.rows() != d || m_.cols() != d)
            throw InputError("operator shape does not match space dimension");
    }

    const CompositeSpace& space() const noexcept { return space_; }
    const Matrix& matrix() const noexcept { return m_; }
    bool is_hermitian() const noexcept { return hermitian_; }
    bool is_unitary() const noexcept { return unitary_; }

    bool attest_hermitian() {
        hermitian_ = max_abs(m_ - m_.adjoint()) <= hermitian_tol;
        return hermitian_;
    }

    bool attest_unitary() {
        const auto d = m_.rows();
        unitary_ = max_abs(m_.adjoint() * m_ - Matrix::Identity(d, d)) <= unitary_tol;
        return unitary_;
    }

    OperatorMatrix adjoint() const {
        OperatorMatrix out{space_, m_.adjoint()};
        out.hermitian_ = hermitian_;
        out.unitary_ = unitary_;
        return out;
    }

    StateVector apply(const StateVector& v) const {
        require_same_space(space_, v.space());
        return {space_, m_ * v.amplitudes()};
    }

    Complex expectation(const StateVector& v) const { return v.inner(apply(v)); }

    friend OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
        require_same_space(lhs.space_, rhs.space_);
        return {lhs.space_, lhs.m_ * rhs.m_};
    }

private:
    CompositeSpace space_;
    Matrix m_;
    bool hermitian_ = false;
    bool unitary_ = false;
};

struct LadderOperators {
    OperatorMatrix a;
    OperatorMatrix a_dagger;
};

// Cavity annihilation/creation operators. a_dagger annihilates the top Fock
// level of the truncated mode.
inline LadderOperators ladder_operators(const CompositeSpace& space) {
    const auto d = static_cast<Eigen::Index>(space.dim());
    Matrix a = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const BasisLabel l = space.label(i);
        if (l.photons == 0) continue;
        const std::size_t j = space.index({l.emitter_bits, l.photons - 1});
        a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            std::sqrt(static_cast<double>(l.photons));
    }
    Matrix ad = a.adjoint();
    return {OperatorMatrix{space, std::move(a)}, OperatorMatrix{space, std::move(ad)}};
}

// sigma^- on emitter `emitter_index` (1-based): |e> -> |g>, identity elsewhere.
inline OperatorMatrix emitter_lowering(const CompositeSpace& space, std::size_t emitter_index) {
    if (emitter_index < 1 || emitter_index > space.n_emitters())
        throw InputError("emitter index " + std::to_string(emitter_index) + " out of range");
    const std::uint64_t mask = std::uint64_t{1} << (emitter_index - 1);
    const auto d = static_cast<Eigen::Index>(space.dim());
    Matrix s = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const BasisLabel l = space.label(i);
        if (!(l.emitter_bits & mask)) continue;
        const std::size_t j = space.index({l.emitter_bits & ~mask, l.photons});
        s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
    }
    return {space, std::move(s)};
}

inline OperatorMatrix emitter_raising(const CompositeSpace& space, std::size_t emitter_index) {
    return emitter_lowering(space, emitter_index).adjoint();
}

// N_tot = a^+ a + sum_n sigma_n^+ sigma_n^-, diagonal in the product basis.
inline OperatorMatrix total_excitation_operator(const CompositeSpace& space) {
    const auto d = static_cast<Eigen::Index>(space.dim());
    Matrix n = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < space.dim(); ++i)
        n(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
            static_cast<double>(space.quanta(i));
    OperatorMatrix op{space, std::move(n)};
    op.attest_hermitian();
    return op;
}

// <photons|_c applied to a composite state: the (unnormalized) emitter-space
// vector left after finding the cavity in that Fock state.
inline StateVector project_cavity(const StateVector& state, std::size_t photons) {
    const CompositeSpace& space = state.space();
    if (photons > space.photon_cutoff())
        throw InputError("photon number " + std::to_string(photons) + " exceeds cutoff");
    const auto ed = static_cast<Eigen::Index>(space.emitter_dim());
    return {space.emitter_space(),
            state.amplitudes().segment(static_cast<Eigen::Index>(photons) * ed, ed)};
}

// emitter_state (x) |photons>_c inside `space`.
inline StateVector embed_with_photons(const StateVector& emitter_state, std::size_t photons,
                                      const CompositeSpace& space) {
    require_same_space(emitter_state.space(), space.emitter_space());
    if (photons > space.photon_cutoff())
        throw InputError("photon number " + std::to_string(photons) + " exceeds cutoff");
    StateVector out = StateVector::zero(space);
    Vector amps = out.amplitudes();
    const auto ed = static_cast<Eigen::Index>(space.emitter_dim());
    amps.segment(static_cast<Eigen::Index>(photons) * ed, ed) = emitter_state.amplitudes();
    return {space, std::move(amps)};
}

} // namespace tcpurify
