// tcpurify: conditional-measurement purification in the Tavis-Cummings model.
//
//   tcpurify protocol --emitters 3 --gamma-tau "pi/sqrt(6)" --steps 12
//   tcpurify spectrum --emitters 2 --kept-photons 1 --gamma-tau 0.7
//   tcpurify sweep    --emitters 2 --grid 0.1:3.0:30 --steps 10 --jobs 4
//   tcpurify verify
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 numeric error.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/output.hpp"

namespace cli = tcpurify::cli;

namespace {

struct FlagSet {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config_path;
};

void add_flags(CLI::App* cmd, FlagSet& flags) {
    const std::map<std::string, std::string> help = {
        {"emitters", "number of two-level emitters"},
        {"kept-photons", "cavity photon number kept at each measurement (sweep: comma list)"},
        {"gamma-tau", "dimensionless interval gamma*tau; accepts e.g. pi/(2*sqrt(6))"},
        {"gamma", "coupling constant (with --tau)"},
        {"tau", "measurement interval (with --gamma)"},
        {"steps", "number of conditional measurements N"},
        {"initial", "initial emitter state: label, bitstring, or file:<path>"},
        {"target", "target state label for the fidelity"},
        {"formula-variant", "closed-form variant: corrected, as_printed, eq8_as_printed, eq9, ..."},
        {"grid", "gamma*tau grid min:max:steps"},
        {"output", "output path (default: standard output)"},
        {"format", "csv or json"},
        {"jobs", "parallel workers for sweeps"},
        {"seed", "seed for Monte-Carlo sampling / randomized checks"},
        {"trajectories", "Monte-Carlo trajectories per run"},
        {"coupling-multipliers", "comma list of per-emitter coupling multipliers"},
        {"max-grid-points", "cap on sweep size"},
    };
    for (const std::string& key : cli::known_keys())
        flags.options[key] = cmd->add_option("--" + key, flags.values[key], help.at(key));
    cmd->add_option("--config", flags.config_path, "key=value configuration file (flags override)");
}

cli::RunConfig build_config(const FlagSet& flags) {
    cli::RawConfig raw;
    if (!flags.config_path.empty()) raw = cli::load_config_file(flags.config_path);
    cli::RawConfig from_flags;
    for (const auto& [key, opt] : flags.options)
        if (opt->count() > 0) from_flags[key] = {flags.values.at(key), "--" + key};
    return cli::validate(cli::merge(std::move(raw), from_flags));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional-measurement entanglement purification in the Tavis-Cummings model"};
    app.require_subcommand(1);

    FlagSet protocol_flags, spectrum_flags, sweep_flags, verify_flags;
    auto* protocol = app.add_subcommand("protocol", "run the purification protocol and emit per-step curves");
    auto* spectrum = app.add_subcommand("spectrum", "eigen-analysis of the conditional channel");
    auto* sweep = app.add_subcommand("sweep", "final P, F, Y over a gamma*tau grid");
    auto* verify = app.add_subcommand("verify", "run the invariant and closed-form property suite");
    add_flags(protocol, protocol_flags);
    add_flags(spectrum, spectrum_flags);
    add_flags(sweep, sweep_flags);
    add_flags(verify, verify_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::exit_config;
    }

    try {
        if (protocol->parsed()) {
            const auto c = build_config(protocol_flags);
            cli::emit(c.output, cli::cmd_protocol(c));
        } else if (spectrum->parsed()) {
            const auto c = build_config(spectrum_flags);
            cli::emit(c.output, cli::cmd_spectrum(c));
        } else if (sweep->parsed()) {
            const auto c = build_config(sweep_flags);
            cli::emit(c.output, cli::cmd_sweep(c));
        } else if (verify->parsed()) {
            const auto c = build_config(verify_flags);
            const cli::VerifyReport rep = cli::cmd_verify(c);
            cli::emit(c.output, rep.text);
            return rep.passed ? cli::exit_ok : cli::exit_verify_failed;
        }
    } catch (const tcpurify::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return cli::exit_config;
    } catch (const tcpurify::InputError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return cli::exit_config;
    } catch (const tcpurify::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return cli::exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return cli::exit_numeric;
    }
    return cli::exit_ok;
}
