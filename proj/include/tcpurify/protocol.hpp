#pragma once

// Repeated conditional measurement: the deterministic conditional-branch
// calculation of success probability, fidelity and yield, plus a seeded
// Monte-Carlo sampler of the same branch.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tcpurify/conditional.hpp"
#include "tcpurify/errors.hpp"
#include "tcpurify/hilbert.hpp"
#include "tcpurify/named_states.hpp"

namespace tcpurify {

struct StepRecord {
    int step = 0;
    // Probability of success of this measurement alone (1 at step 0).
    double p_step = 1.0;
    // Probability that all measurements up to this one succeeded.
    double p_cumulative = 1.0;
    double fidelity = 0.0;
    // prod_{i=0..N} P_i, the product of cumulative probabilities.
    double yield_product = 1.0;
    // Surviving fraction, equal to P_N.
    double yield_survival = 1.0;
};

struct ProtocolConfigEcho {
    std::size_t n_emitters = 0;
    std::size_t kept_photons = 0;
    double gamma_tau = 0.0;
    std::string initial;
    std::string target;
};

struct ProtocolResult {
    ProtocolConfigEcho config;
    std::vector<StepRecord> records;
    // Set when a step hit the failure threshold; records stop before it.
    bool truncated = false;
    double failed_probability = 0.0;
};

inline ProtocolResult run_purification(const DensityMatrix& initial,
                                       const ConditionalChannel& channel, int max_steps,
                                       const NamedState& target,
                                       std::string initial_descriptor = "custom",
                                       double threshold = default_failure_threshold) {
    if (max_steps < 0) throw InputError("max_steps must be non-negative");
    require_same_space(initial.space(), channel.emitter_space());
    require_same_space(target.state.space(), channel.emitter_space());

    ProtocolResult result;
    result.config = {channel.n_emitters(), channel.kept_photons(), channel.gamma_tau(),
                     std::move(initial_descriptor), target.label};
    result.records.reserve(static_cast<std::size_t>(max_steps) + 1);

    StepRecord rec;
    rec.fidelity = fidelity(initial, target);
    result.records.push_back(rec);

    DensityMatrix rho = initial;
    for (int n = 1; n <= max_steps; ++n) {
        try {
            ConditionalStep s = conditional_step(rho, channel, threshold);
            rho = std::move(s.state);
            rec.step = n;
            rec.p_step = s.probability;
            rec.p_cumulative *= s.probability;
            rec.fidelity = fidelity(rho, target);
            rec.yield_product *= rec.p_cumulative;
            rec.yield_survival = rec.p_cumulative;
            result.records.push_back(rec);
        } catch (const ProtocolFailure& f) {
            result.truncated = true;
            result.failed_probability = f.probability();
            break;
        }
    }
    return result;
}

struct YieldPoint {
    int step = 0;
    double product = 1.0;    // prod_{i=0..N} P_i
    double survival = 1.0; // P_N
};

inline std::vector<YieldPoint> yield_curve(const ProtocolResult& result) {
    std::vector<YieldPoint> out;
    out.reserve(result.records.size());
    for (const StepRecord& r : result.records)
        out.push_back({r.step, r.yield_product, r.yield_survival});
    return out;
}

// Samples `trajectories` independent runs of the protocol: at each step the
// measurement succeeds with the conditional-branch probability, and a failed
// run stops. Returns the surviving fraction after each step 0..N. Uses its own
// uniform mapping so results are identical across standard libraries.
inline std::vector<double> sample_survival(const ProtocolResult& result, std::size_t trajectories,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<std::size_t> alive(result.records.size(), 0);
    for (std::size_t t = 0; t < trajectories; ++t) {
        ++alive[0];
        for (std::size_t n = 1; n < result.records.size(); ++n) {
            if (uniform() >= result.records[n].p_step) break;
            ++alive[n];
        }
    }
    std::vector<double> out;
    out.reserve(alive.size());
    for (std::size_t a : alive)
        out.push_back(trajectories == 0 ? 0.0
                                        : static_cast<double>(a) / static_cast<double>(trajectories));
    return out;
}

} // namespace tcpurify
