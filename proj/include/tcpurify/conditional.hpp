#pragma once

// Conditional channel K = <k| U(tau) |k>: evolve emitters (x) |k>_c for an
// interval tau, then keep only the branch where the cavity is found in |k>
// again. K is a contraction on the emitter space; its eigenvectors with
// |lambda| = 1 are the photon-trapping states that repeated conditioning
// distils.

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tcpurify/dynamics.hpp"
#include "tcpurify/errors.hpp"
#include "tcpurify/hilbert.hpp"
#include "tcpurify/named_states.hpp"

namespace tcpurify {

inline constexpr double default_trapping_tol = 1e-9;
inline constexpr double default_degeneracy_tol = 1e-8;
inline constexpr double default_failure_threshold = 1e-14;

// <measured| U(tau) |prepared>, as an operator on the emitter factor.
// Exact only when the cutoff holds every state reachable from
// (any emitter configuration) (x) |prepared>, i.e. cutoff >= N + prepared.
inline Matrix measurement_operator(const SpectralEvolver& evolver, double tau,
                                   std::size_t prepared, std::size_t measured) {
    const CompositeSpace& space = evolver.space();
    if (space.photon_cutoff() < space.n_emitters() + prepared)
        throw ConfigError("photon cutoff " + std::to_string(space.photon_cutoff()) +
                          " cannot hold the sectors reachable from " +
                          std::to_string(prepared) + " photon(s) with " +
                          std::to_string(space.n_emitters()) + " emitters; need cutoff >= " +
                          std::to_string(space.n_emitters() + prepared));
    if (measured > space.photon_cutoff())
        throw InputError("measured photon number exceeds cutoff");
    const auto ed = static_cast<Eigen::Index>(space.emitter_dim());
    return evolver.unitary(tau).block(static_cast<Eigen::Index>(measured) * ed,
                                      static_cast<Eigen::Index>(prepared) * ed, ed, ed);
}

class ConditionalChannel {
public:
    ConditionalChannel(HamiltonianSpec spec, double tau, std::size_t kept_photons, Matrix k)
        : spec_(std::move(spec)), tau_(tau), kept_(kept_photons), k_(std::move(k)) {}

    const HamiltonianSpec& spec() const noexcept { return spec_; }
    CompositeSpace emitter_space() const { return spec_.space.emitter_space(); }
    std::size_t n_emitters() const noexcept { return spec_.space.n_emitters(); }
    double tau() const noexcept { return tau_; }
    double gamma_tau() const noexcept { return spec_.gamma * tau_; }
    std::size_t kept_photons() const noexcept { return kept_; }
    const Matrix& matrix() const noexcept { return k_; }

    StateVector apply(const StateVector& emitter_state) const {
        require_same_space(emitter_state.space(), emitter_space());
        return {emitter_space(), k_ * emitter_state.amplitudes()};
    }

private:
    HamiltonianSpec spec_;
    double tau_;
    std::size_t kept_;
    Matrix k_;
};

inline ConditionalChannel conditional_channel(const HamiltonianSpec& spec, double tau,
                                              std::size_t kept_photons) {
    const SpectralEvolver evolver{build_tc_hamiltonian(spec)};
    return {spec, tau, kept_photons, measurement_operator(evolver, tau, kept_photons, kept_photons)};
}

// Dimensionless form: gamma = 1, tau = gamma_tau, smallest exact cutoff.
inline ConditionalChannel conditional_channel(std::size_t n_emitters, double gamma_tau,
                                              std::size_t kept_photons,
                                              std::vector<double> coupling_multipliers = {}) {
    HamiltonianSpec spec{build_space(n_emitters, n_emitters + kept_photons), 1.0,
                         std::move(coupling_multipliers)};
    return conditional_channel(spec, gamma_tau, kept_photons);
}

struct ChannelSpectrum {
    // Sorted by descending magnitude.
    std::vector<Complex> eigenvalues;
    std::vector<StateVector> eigenvectors;
    // Degeneracy group id per eigenpair, numbered in order of first appearance.
    std::vector<std::size_t> group;
    std::size_t group_count = 0;
    // Set when the eigenvectors do not span the space; schur_form then holds
    // the upper-triangular Schur factor of K.
    bool defective = false;
    Matrix schur_form;

    std::vector<std::size_t> group_sizes() const {
        std::vector<std::size_t> sizes(group_count, 0);
        for (std::size_t g : group) ++sizes[g];
        return sizes;
    }
};

namespace detail {

// Fix the global phase so the first largest-magnitude entry is real positive.
inline Vector canonical_phase(Vector v) {
    const double top = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= top - 1e-12) {
            v *= std::conj(v(i)) / std::abs(v(i));
            break;
        }
    }
    return v;
}

} // namespace detail

inline ChannelSpectrum channel_spectrum(const ConditionalChannel& channel,
                                        double degeneracy_tol = default_degeneracy_tol) {
    const Matrix& k = channel.matrix();
    Eigen::ComplexEigenSolver<Matrix> es(k);
    if (es.info() != Eigen::Success) throw NumericError("channel eigendecomposition failed");

    const auto n = static_cast<std::size_t>(k.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const Vector& vals = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(vals(static_cast<Eigen::Index>(a))) >
               std::abs(vals(static_cast<Eigen::Index>(b)));
    });

    ChannelSpectrum out;
    Matrix vecs(k.rows(), k.cols());
    for (std::size_t i = 0; i < n; ++i) {
        const auto src = static_cast<Eigen::Index>(order[i]);
        out.eigenvalues.push_back(vals(src));
        vecs.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(src).normalized();
    }

    // Union-find on |lambda_i - lambda_j| <= tol.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(out.eigenvalues[i] - out.eigenvalues[j]) <= degeneracy_tol)
                parent[find(j)] = find(i);
    std::map<std::size_t, std::size_t> ids;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [it, inserted] = ids.try_emplace(find(i), ids.size());
        out.group.push_back(it->second);
    }
    out.group_count = ids.size();

    // Orthonormal basis inside each degenerate group (modified Gram-Schmidt).
    for (std::size_t g = 0; g < out.group_count; ++g) {
        std::vector<Eigen::Index> members;
        for (std::size_t i = 0; i < n; ++i)
            if (out.group[i] == g) members.push_back(static_cast<Eigen::Index>(i));
        if (members.size() < 2) continue;
        for (std::size_t a = 0; a < members.size(); ++a) {
            Vector v = vecs.col(members[a]);
            for (std::size_t b = 0; b < a; ++b) {
                const Vector u = vecs.col(members[b]);
                v -= u.dot(v) * u;
            }
            const double norm = v.norm();
            if (norm < 1e-8) {
                out.defective = true;
                break;
            }
            vecs.col(members[a]) = v / norm;
        }
    }

    Eigen::JacobiSVD<Matrix> svd(vecs);
    const auto& sv = svd.singularValues();
    if (sv.size() > 0 && sv(sv.size() - 1) < 1e-10 * sv(0)) out.defective = true;
    if (out.defective) out.schur_form = Eigen::ComplexSchur<Matrix>(k).matrixT();

    const CompositeSpace emitters = channel.emitter_space();
    for (std::size_t i = 0; i < n; ++i)
        out.eigenvectors.emplace_back(
            emitters, detail::canonical_phase(vecs.col(static_cast<Eigen::Index>(i))));
    return out;
}

inline void require_trapping_tol(double tol) {
    if (!(tol > 0.0 && tol <= 1e-3)) throw InputError("trapping tolerance must lie in (0, 1e-3]");
}

// Eigenvectors whose eigenvalue magnitude is at least 1 - tol.
inline std::vector<StateVector> find_trapping_states(const ChannelSpectrum& spectrum,
                                                     double tol = default_trapping_tol) {
    require_trapping_tol(tol);
    std::vector<StateVector> out;
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i)
        if (std::abs(spectrum.eigenvalues[i]) >= 1.0 - tol)
            out.push_back(spectrum.eigenvectors[i]);
    return out;
}

inline std::vector<StateVector> find_trapping_states(const ConditionalChannel& channel,
                                                     double tol = default_trapping_tol) {
    require_trapping_tol(tol);
    return find_trapping_states(channel_spectrum(channel), tol);
}

struct ConditionalStep {
    DensityMatrix state;
    double probability;
};

// One measurement interval: rho -> K rho K^+ / p with p = Tr(K rho K^+).
// Throws ProtocolFailure when p <= threshold.
inline ConditionalStep conditional_step(const DensityMatrix& rho, const ConditionalChannel& channel,
                                        double threshold = default_failure_threshold) {
    require_same_space(rho.space(), channel.emitter_space());
    const Matrix& k = channel.matrix();
    const Matrix next = k * rho.matrix() * k.adjoint();
    const double p = next.trace().real();
    if (!(p > threshold))
        throw ProtocolFailure("conditional branch probability " + std::to_string(p) +
                                  " is below threshold; the run must restart",
                              p);
    return {DensityMatrix{rho.space(), 0.5 * (next + next.adjoint()) / p}, p};
}

struct GhzReport {
    bool inconclusive = false;
    // GHZ = sum_i coefficients[i] * eigenvectors[i].
    std::vector<Complex> coefficients;
    std::vector<Complex> eigenvalues;
    // Largest |<v|GHZ>|^2 over eigenvectors with |lambda| >= 1 - tol.
    double max_persisting_overlap = 0.0;
    // Largest |c_i| among components that persist under repetition.
    double dominant_persisting_coefficient = 0.0;
    // GHZ is (up to phase) within 1e-6 of a persisting eigenvector.
    bool preserved = false;
    std::string summary;
};

inline GhzReport ghz_preservation_check(const ConditionalChannel& channel,
                                        double trapping_tol = default_trapping_tol) {
    if (channel.n_emitters() != 3) throw InputError("GHZ check needs a three-emitter channel");
    const StateVector ghz = make_named_state("ghz", 3).state;
    const ChannelSpectrum spec = channel_spectrum(channel);

    GhzReport r;
    r.eigenvalues = spec.eigenvalues;
    Matrix v(ghz.amplitudes().size(), static_cast<Eigen::Index>(spec.eigenvectors.size()));
    for (std::size_t i = 0; i < spec.eigenvectors.size(); ++i)
        v.col(static_cast<Eigen::Index>(i)) = spec.eigenvectors[i].amplitudes();
    const Vector c = v.colPivHouseholderQr().solve(ghz.amplitudes());
    for (Eigen::Index i = 0; i < c.size(); ++i) r.coefficients.push_back(c(i));

    std::size_t persisting = 0;
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
        if (std::abs(spec.eigenvalues[i]) < 1.0 - trapping_tol) continue;
        ++persisting;
        const double overlap = std::norm(spec.eigenvectors[i].inner(ghz));
        r.max_persisting_overlap = std::max(r.max_persisting_overlap, overlap);
        r.dominant_persisting_coefficient =
            std::max(r.dominant_persisting_coefficient, std::abs(r.coefficients[i]));
        // |GHZ - e^{i theta} v|^2 = 2 - 2|<v|GHZ>|
        if (std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(overlap))) <= 1e-6) r.preserved = true;
    }
    r.inconclusive = persisting == spec.eigenvalues.size();

    std::ostringstream os;
    os.precision(6);
    if (r.inconclusive)
        os << "inconclusive at gamma*tau = " << channel.gamma_tau()
           << ": every eigenvalue has magnitude 1 (identity-like channel)";
    else if (r.preserved)
        os << "GHZ is a persisting eigenvector at gamma*tau = " << channel.gamma_tau();
    else
        os << "GHZ not preserved at gamma*tau = " << channel.gamma_tau() << ": " << persisting
           << " persisting eigenvector(s), max overlap " << r.max_persisting_overlap;
    r.summary = os.str();
    return r;
}

// Thread-safe memo of channels keyed by their exact inputs.
class ChannelCache {
public:
    std::shared_ptr<const ConditionalChannel> get(const HamiltonianSpec& spec, double tau,
                                                  std::size_t kept_photons) {
        Key key{spec.space.n_emitters(), spec.space.photon_cutoff(), spec.gamma,
                spec.coupling_multipliers, tau, kept_photons};
        {
            std::lock_guard lock(mutex_);
            if (auto it = entries_.find(key); it != entries_.end()) return it->second;
        }
        auto channel =
            std::make_shared<const ConditionalChannel>(conditional_channel(spec, tau, kept_photons));
        std::lock_guard lock(mutex_);
        return entries_.try_emplace(std::move(key), std::move(channel)).first->second;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    struct Key {
        std::size_t n_emitters;
        std::size_t cutoff;
        double gamma;
        std::vector<double> multipliers;
        double tau;
        std::size_t kept;
        auto operator<=>(const Key&) const = default;
    };

    mutable std::mutex mutex_;
    std::map<Key, std::shared_ptr<const ConditionalChannel>> entries_;
};

} // namespace tcpurify
