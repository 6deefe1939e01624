#pragma once

// The protocol / spectrum / sweep / verify subcommands. Each renders its
// whole output into a string so identical configurations give identical bytes.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"
#include "cli/output.hpp"
#include "tcpurify/tcpurify.hpp"

namespace tcpurify::cli {

enum ExitCode : int { exit_ok = 0, exit_verify_failed = 1, exit_config = 2, exit_numeric = 3 };

namespace detail {

inline double require_gamma_tau(const RunConfig& c) {
    if (!c.gamma_tau)
        throw ConfigError("field 'gamma-tau': required for " + std::to_string(c.n_emitters) +
                          " emitters (no default)");
    return *c.gamma_tau;
}

inline std::size_t require_single_kept(const RunConfig& c) {
    if (c.kept_photons.size() != 1)
        throw ConfigError("field 'kept-photons': this command takes a single value");
    return c.kept();
}

inline std::vector<double> model_multipliers(const RunConfig& c) {
    if (!c.coupling_multipliers.empty() && c.coupling_multipliers.size() != c.n_emitters)
        throw ConfigError("field 'coupling-multipliers': need " + std::to_string(c.n_emitters) +
                          " values");
    return c.coupling_multipliers;
}

inline ConditionalChannel make_channel(const RunConfig& c, double gamma_tau, std::size_t kept) {
    try {
        return conditional_channel(c.n_emitters, gamma_tau, kept, model_multipliers(c));
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
}

struct ClosedFormPair {
    double probability;
    double fidelity;
    bool valid;
};

// Closed forms exist for two emitters (any kept photon number >= 1) from |e g>
// and for three emitters with one kept photon from |e g g>.
inline std::optional<ClosedFormPair> closed_form(const RunConfig& c, double gt, int step, std::size_t kept) {
    if (c.n_emitters == 2 && kept >= 1) {
        const auto p = closed_form_two_emitter(gt, step, static_cast<int>(kept), c.formula.frequency);
        const auto& f = c.formula.fidelity == FidelityForm::corrected ? p.fidelity_corrected
                                                                      : p.fidelity_as_printed;
        return ClosedFormPair{p.probability.value, f.value, f.valid};
    }
    if (c.n_emitters == 3 && kept == 1) {
        const auto p = closed_form_three_emitter(gt, step);
        return ClosedFormPair{p.probability.value, p.fidelity.value, p.fidelity.valid};
    }
    return std::nullopt;
}

inline nlohmann::json config_json(const RunConfig& c) {
    nlohmann::json j;
    j["emitters"] = c.n_emitters;
    j["kept_photons"] = c.kept_photons;
    if (c.gamma_tau) j["gamma_tau"] = *c.gamma_tau;
    j["steps"] = c.steps;
    j["initial"] = c.initial;
    j["target"] = c.target;
    j["formula_variant"] = c.formula_name;
    if (!c.coupling_multipliers.empty()) j["coupling_multipliers"] = c.coupling_multipliers;
    if (c.seed) {
        j["seed"] = *c.seed;
        j["trajectories"] = c.trajectories;
    }
    return j;
}

} // namespace detail

inline Table protocol_table(const RunConfig& c) {
    const double gt = detail::require_gamma_tau(c);
    const std::size_t kept = detail::require_single_kept(c);
    const ConditionalChannel channel = detail::make_channel(c, gt, kept);
    const DensityMatrix initial = resolve_initial(c.initial, c.n_emitters);
    const NamedState target = resolve_target(c.target, c.n_emitters);
    const ProtocolResult result = run_purification(initial, channel, c.steps, target, c.initial);

    std::vector<std::string> cols{"N", "p_step", "P_cumulative", "F", "Y_paper", "Y_survival"};
    const bool with_closed = detail::closed_form(c, gt, 0, kept).has_value();
    if (with_closed) {
        cols.push_back("P_closed_form");
        cols.push_back("F_closed_form");
    }
    std::vector<double> mc;
    if (c.seed) {
        cols.push_back("P_monte_carlo");
        mc = sample_survival(result, c.trajectories, *c.seed);
    }

    Table t{cols};
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const StepRecord& r = result.records[i];
        std::vector<Cell> row{Cell::integer(r.step), r.p_step,       r.p_cumulative,
                              r.fidelity,             r.yield_product, r.yield_survival};
        if (with_closed) {
            const auto cf = *detail::closed_form(c, gt, r.step, kept);
            row.emplace_back(cf.probability);
            row.push_back(cf.valid ? Cell{cf.fidelity} : Cell{"invalid"});
        }
        if (c.seed) row.emplace_back(mc[i]);
        t.add(std::move(row));
    }
    if (result.truncated)
        std::cerr << "warning: run truncated after step " << result.records.back().step
                  << " (branch probability " << result.failed_probability << ")\n";
    return t;
}

inline std::string cmd_protocol(const RunConfig& c) {
    const Table t = protocol_table(c);
    if (c.format == OutputFormat::csv) return t.to_csv();
    nlohmann::json j;
    j["command"] = "protocol";
    j["config"] = detail::config_json(c);
    j["columns"] = t.columns();
    j["rows"] = t.to_json_rows();
    return j.dump(2) + "\n";
}

inline std::string cmd_spectrum(const RunConfig& c) {
    const double gt = detail::require_gamma_tau(c);
    const std::size_t kept = detail::require_single_kept(c);
    const ConditionalChannel channel = detail::make_channel(c, gt, kept);
    const ChannelSpectrum sp = channel_spectrum(channel);
    const CompositeSpace emitters = channel.emitter_space();

    std::vector<std::string> cols{"index", "re", "im", "magnitude", "group", "trapping"};
    for (std::size_t b = 0; b < emitters.dim(); ++b) {
        const std::string label = emitters.emitter_label(b);
        cols.push_back("amp_" + label + "_re");
        cols.push_back("amp_" + label + "_im");
    }
    Table t{cols};
    for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) {
        const Complex l = sp.eigenvalues[i];
        const bool trapping = std::abs(l) >= 1.0 - default_trapping_tol;
        std::vector<Cell> row{Cell::integer(static_cast<long long>(i)), l.real(), l.imag(), std::abs(l),
                              Cell::integer(static_cast<long long>(sp.group[i])),
                              Cell{trapping ? "1" : "0"}};
        for (std::size_t b = 0; b < emitters.dim(); ++b) {
            const Complex a = sp.eigenvectors[i].amplitude(b);
            row.emplace_back(a.real());
            row.emplace_back(a.imag());
        }
        t.add(std::move(row));
    }
    if (sp.defective) std::cerr << "warning: channel is defective; eigenvectors do not span the space\n";
    if (c.format == OutputFormat::csv) return t.to_csv();

    nlohmann::json j;
    j["command"] = "spectrum";
    j["config"] = detail::config_json(c);
    j["defective"] = sp.defective;
    j["group_sizes"] = sp.group_sizes();
    j["columns"] = t.columns();
    j["rows"] = t.to_json_rows();
    if (c.n_emitters == 3) j["ghz"] = ghz_preservation_check(channel).summary;
    return j.dump(2) + "\n";
}

inline std::string cmd_sweep(const RunConfig& c) {
    std::vector<double> grid;
    if (c.grid) grid = c.grid->points();
    else grid = {detail::require_gamma_tau(c)};
    const std::size_t total = grid.size() * c.kept_photons.size();
    if (total > c.max_grid_points)
        throw ConfigError("field 'grid': " + std::to_string(total) + " points exceed the cap of " +
                          std::to_string(c.max_grid_points));

    const DensityMatrix initial = resolve_initial(c.initial, c.n_emitters);
    const NamedState target = resolve_target(c.target, c.n_emitters);
    detail::model_multipliers(c);

    struct Point {
        std::size_t kept;
        double gamma_tau;
    };
    std::vector<Point> points;
    for (std::size_t k : c.kept_photons)
        for (double g : grid) points.push_back({k, g});

    std::vector<std::optional<ProtocolResult>> results(points.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                const ConditionalChannel ch = detail::make_channel(c, points[i].gamma_tau, points[i].kept);
                results[i] = run_purification(initial, ch, c.steps, target, c.initial);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t jobs = std::min(c.jobs, std::max<std::size_t>(points.size(), 1));
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);

    Table t{{"emitters", "kept_photons", "gamma_tau", "steps", "P", "F", "Y_paper", "Y_survival",
             "truncated", "P_closed_form", "F_closed_form"}};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const ProtocolResult& r = *results[i];
        const StepRecord& last = r.records.back();
        std::vector<Cell> row{Cell::integer(static_cast<long long>(c.n_emitters)),
                              Cell::integer(static_cast<long long>(points[i].kept)),
                              points[i].gamma_tau,
                              Cell::integer(last.step),
                              last.p_cumulative,
                              last.fidelity,
                              last.yield_product,
                              last.yield_survival,
                              Cell{r.truncated ? "1" : "0"}};
        if (auto cf = detail::closed_form(c, points[i].gamma_tau, last.step, points[i].kept)) {
            row.emplace_back(cf->probability);
            row.push_back(cf->valid ? Cell{cf->fidelity} : Cell{"invalid"});
        } else {
            row.push_back(Cell::empty());
            row.push_back(Cell::empty());
        }
        t.add(std::move(row));
    }
    if (c.format == OutputFormat::csv) return t.to_csv();
    nlohmann::json j;
    j["command"] = "sweep";
    j["config"] = detail::config_json(c);
    j["columns"] = t.columns();
    j["rows"] = t.to_json_rows();
    return j.dump(2) + "\n";
}

struct VerifyReport {
    std::string text;
    bool passed = true;
};

inline VerifyReport cmd_verify(const RunConfig& c) {
    VerifyOptions o;
    if (c.seed) o.seed = *c.seed;
    o.coupling_multipliers = c.coupling_multipliers;
    o.formula = c.formula;

    VerifyReport rep;
    std::ostringstream os;
    std::size_t failures = 0;
    for (const PropertyResult& r : run_verification(o)) {
        os << (r.passed ? "PASS " : "FAIL ") << r.name << " residual=" << format_real(r.residual)
           << " tolerance=" << format_real(r.tolerance) << '\n';
        if (!r.passed) ++failures;
    }
    os << (failures == 0 ? "all properties passed" : std::to_string(failures) + " propert" +
                                                          (failures == 1 ? "y" : "ies") + " failed")
       << '\n';
    rep.text = os.str();
    rep.passed = failures == 0;
    return rep;
}

} // namespace tcpurify::cli
