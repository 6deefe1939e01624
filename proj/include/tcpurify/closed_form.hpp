#pragma once

// Closed-form success probabilities and fidelities for the two- and
// three-emitter protocols, from the initial states |e g> (x) |k> and
// |e g g> (x) |1>.
//
// Two emitters, k photons kept: the symmetric state |psi+> (x) |k> couples to
// |g g; k+1> with strength sqrt(2(k+1)) and to |e e; k-1> with strength
// sqrt(2k), so its conditional amplitude is cos(sqrt(4k+2) * gamma*tau). The
// singlet is dark. Starting from |e g> = (|psi+> + |psi->)/sqrt(2):
//
//     P_N = (1 + c^{2N}) / 2,      F_N = 1 / (1 + c^{2N}).
//
// The "as printed" variants keep the frequency sqrt(2(k+1)) and the fidelity
// 1 / (2 c^{2N}); the latter exceeds 1 whenever c^{2N} < 1/2 and is flagged.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "tcpurify/errors.hpp"

namespace tcpurify {

enum class FormulaId {
    eq7,            // two emitters, one photon kept: (1 + cos(sqrt6 gt)^{2N}) / 2
    eq8_as_printed, // 1 / (2 cos(sqrt6 gt)^{2N})
    eq8_corrected,  // 1 / (1 + cos(sqrt6 gt)^{2N})
    eq9,            // k photons kept, frequency sqrt(2(k+1))
    eq9_corrected,  // k photons kept, frequency sqrt(4k+2)
    eq10,           // 1 / (2 cos(sqrt(2(k+1)) gt)^{2N})
    eq10_corrected, // 1 / (1 + cos(sqrt(4k+2) gt)^{2N})
    eq15,           // three emitters: probability
    eq16,           // three emitters: fidelity to W
};

inline std::string_view to_string(FormulaId id) {
    switch (id) {
    case FormulaId::eq7: return "eq7";
    case FormulaId::eq8_as_printed: return "eq8_as_printed";
    case FormulaId::eq8_corrected: return "eq8_corrected";
    case FormulaId::eq9: return "eq9";
    case FormulaId::eq9_corrected: return "eq9_corrected";
    case FormulaId::eq10: return "eq10";
    case FormulaId::eq10_corrected: return "eq10_corrected";
    case FormulaId::eq15: return "eq15";
    case FormulaId::eq16: return "eq16";
    }
    return "unknown";
}

struct ClosedFormPrediction {
    FormulaId id;
    double gamma_tau = 0.0;
    int steps = 0;
    int kept_photons = 1;
    double value = 0.0;
    // False where the expression leaves [0, 1] or is undefined (0/0, 1/0).
    bool valid = true;
};

// Which frequency / fidelity expression the two-emitter predictions use.
enum class FrequencyForm { corrected, as_printed };
enum class FidelityForm { corrected, as_printed };

struct FormulaVariant {
    FrequencyForm frequency = FrequencyForm::corrected;
    FidelityForm fidelity = FidelityForm::corrected;

    friend bool operator==(const FormulaVariant&, const FormulaVariant&) = default;
};

// Accepts "corrected", "as_printed", or a single formula id that overrides one knob.
inline std::optional<FormulaVariant> parse_formula_variant(std::string_view s) {
    FormulaVariant v;
    if (s == "corrected" || s == "default") return v;
    if (s == "as_printed") return FormulaVariant{FrequencyForm::as_printed, FidelityForm::as_printed};
    if (s == "eq8_as_printed" || s == "eq10") v.fidelity = FidelityForm::as_printed;
    else if (s == "eq9") v.frequency = FrequencyForm::as_printed;
    else if (s != "eq8_corrected" && s != "eq10_corrected" && s != "eq9_corrected" && s != "eq7")
        return std::nullopt;
    return v;
}

inline double two_emitter_frequency(int kept_photons, FrequencyForm form) {
    const double k = kept_photons;
    return form == FrequencyForm::corrected ? std::sqrt(4.0 * k + 2.0) : std::sqrt(2.0 * (k + 1.0));
}

namespace detail {

inline double pow2n(double c, int steps) { return std::pow(c * c, steps); }

inline void require_steps(int steps) {
    if (steps < 0) throw InputError("number of repetitions must be non-negative");
}

} // namespace detail

struct TwoEmitterPrediction {
    ClosedFormPrediction probability;
    ClosedFormPrediction fidelity_as_printed;
    ClosedFormPrediction fidelity_corrected;
};

inline TwoEmitterPrediction closed_form_two_emitter(double gamma_tau, int steps, int kept_photons,
                                                    FrequencyForm frequency = FrequencyForm::corrected) {
    detail::require_steps(steps);
    if (kept_photons < 1) throw InputError("closed forms need at least one kept photon");
    const bool one = kept_photons == 1;
    const double c2n =
        detail::pow2n(std::cos(two_emitter_frequency(kept_photons, frequency) * gamma_tau), steps);

    TwoEmitterPrediction out{};
    const FormulaId p_id = one ? FormulaId::eq7
                               : (frequency == FrequencyForm::corrected ? FormulaId::eq9_corrected
                                                                        : FormulaId::eq9);
    out.probability = {p_id, gamma_tau, steps, kept_photons, 0.5 * (1.0 + c2n), true};

    const double printed = c2n == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (2.0 * c2n);
    out.fidelity_as_printed = {one ? FormulaId::eq8_as_printed : FormulaId::eq10, gamma_tau, steps,
                               kept_photons, printed, std::isfinite(printed) && printed <= 1.0 + 1e-12};
    out.fidelity_corrected = {one ? FormulaId::eq8_corrected : FormulaId::eq10_corrected, gamma_tau,
                              steps, kept_photons, 1.0 / (1.0 + c2n), true};
    return out;
}

struct ThreeEmitterPrediction {
    ClosedFormPrediction probability;
    ClosedFormPrediction fidelity;
};

// P_N = (c10^{2N} + 2 c1^{2N}) / 3,  F_N = c10^{2N} / (c10^{2N} + 2 c1^{2N}),
// with c10 = cos(sqrt10 gt) (W) and c1 = cos(gt) (antisymmetric pair).
inline ThreeEmitterPrediction closed_form_three_emitter(double gamma_tau, int steps) {
    detail::require_steps(steps);
    const double w = detail::pow2n(std::cos(std::sqrt(10.0) * gamma_tau), steps);
    const double t = detail::pow2n(std::cos(gamma_tau), steps);
    const double denom = w + 2.0 * t;

    ThreeEmitterPrediction out{};
    out.probability = {FormulaId::eq15, gamma_tau, steps, 1, denom / 3.0, true};
    if (denom == 0.0)
        out.fidelity = {FormulaId::eq16, gamma_tau, steps, 1,
                        std::numeric_limits<double>::quiet_NaN(), false};
    else
        out.fidelity = {FormulaId::eq16, gamma_tau, steps, 1, w / denom, true};
    return out;
}

} // namespace tcpurify
