#pragma once

// Run configuration for the tcpurify command line: raw key=value settings
// from a config file and from flags, merged (flags win) and validated into a
// RunConfig before any computation starts.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tcpurify/closed_form.hpp"
#include "tcpurify/errors.hpp"
#include "tcpurify/hilbert.hpp"
#include "tcpurify/named_states.hpp"

namespace tcpurify::cli {

// Every key accepted in a config file; flags use the same names with "--".
inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "emitters", "kept-photons", "gamma-tau", "gamma",  "tau",   "steps",
        "initial",  "target",       "formula-variant",     "grid",  "output",
        "format",   "jobs",         "seed",   "trajectories", "coupling-multipliers",
        "max-grid-points"};
    return keys;
}

struct RawValue {
    std::string value;
    std::string origin; // "--steps" or "config line 4"
};

using RawConfig = std::map<std::string, RawValue>;

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

inline RawConfig parse_config_text(std::string_view text, std::string_view source = "config") {
    RawConfig out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        const std::string where = std::string(source) + " line " + std::to_string(lineno);
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key=value, got '" + body + "'");
        const std::string key = normalize_key(trim(body.substr(0, eq)));
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(where + ": unknown key '" + key + "'");
        out[key] = {trim(body.substr(eq + 1)), where};
    }
    return out;
}

inline RawConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

// Entries of `overrides` replace those of `base`.
inline RawConfig merge(RawConfig base, const RawConfig& overrides) {
    for (const auto& [k, v] : overrides) base[k] = v;
    return base;
}

// Arithmetic over numbers, pi, sqrt(), + - * / and parentheses, so values
// such as "pi/(2*sqrt(6))" can be given exactly.
class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view text) : s_(text) {}

    double parse() {
        const double v = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_)) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("bad expression '" + std::string(s_) + "': " + why);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool eat_word(std::string_view w) {
        skip();
        if (s_.substr(pos_, w.size()) == w) {
            pos_ += w.size();
            return true;
        }
        return false;
    }
    double sum() {
        double v = product();
        for (;;) {
            if (eat('+')) v += product();
            else if (eat('-')) v -= product();
            else return v;
        }
    }
    double product() {
        double v = unary();
        for (;;) {
            if (eat('*')) v *= unary();
            else if (eat('/')) v /= unary();
            else return v;
        }
    }
    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return atom();
    }
    double atom() {
        if (eat('(')) {
            const double v = sum();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (eat_word("pi")) return std::numbers::pi;
        if (eat_word("sqrt")) {
            if (!eat('(')) fail("expected '(' after sqrt");
            const double v = sum();
            if (!eat(')')) fail("missing ')'");
            if (v < 0) fail("sqrt of a negative number");
            return std::sqrt(v);
        }
        skip();
        double v = 0.0;
        const char* first = s_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
        if (ec != std::errc{} || ptr == first) fail("expected a number at position " + std::to_string(pos_));
        pos_ += static_cast<std::size_t>(ptr - first);
        return v;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline double parse_expression(std::string_view text) { return ExpressionParser{text}.parse(); }

struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    std::size_t steps = 0;

    // `steps` evenly spaced points including both ends.
    std::vector<double> points() const {
        std::vector<double> out;
        if (steps == 0) return out;
        if (steps == 1) return {min};
        for (std::size_t i = 0; i < steps; ++i)
            out.push_back(min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1));
        return out;
    }
};

enum class OutputFormat { csv, json };

struct RunConfig {
    std::size_t n_emitters = 2;
    std::vector<std::size_t> kept_photons{1};
    std::optional<double> gamma_tau;
    std::optional<GridSpec> grid;
    int steps = 10;
    std::string initial;
    std::string target;
    std::string formula_name = "corrected";
    FormulaVariant formula;
    std::string output;
    OutputFormat format = OutputFormat::csv;
    std::size_t jobs = 1;
    std::optional<std::uint64_t> seed;
    std::size_t trajectories = 1000;
    std::vector<double> coupling_multipliers;
    std::size_t max_grid_points = 100000;

    std::size_t kept() const { return kept_photons.front(); }
};

namespace detail {

[[noreturn]] inline void field_error(const RawValue& v, std::string_view field, std::string_view why) {
    throw ConfigError(v.origin + ": field '" + std::string(field) + "': " + std::string(why) +
                      " (got '" + v.value + "')");
}

template <class Int>
Int parse_int(const RawValue& v, std::string_view field, Int lo, Int hi) {
    Int out{};
    const std::string s = trim(v.value);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        field_error(v, field, "expected an integer");
    if (out < lo || out > hi)
        field_error(v, field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return out;
}

inline double parse_real(const RawValue& v, std::string_view field) {
    try {
        const double x = parse_expression(v.value);
        if (!std::isfinite(x)) field_error(v, field, "value is not finite");
        return x;
    } catch (const ConfigError& e) {
        if (std::string_view(e.what()).find("field '") != std::string_view::npos) throw;
        field_error(v, field, e.what());
    }
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto p = s.find(sep, start);
        out.push_back(trim(s.substr(start, p == std::string_view::npos ? p : p - start)));
        if (p == std::string_view::npos) return out;
        start = p + 1;
    }
}

} // namespace detail

inline GridSpec parse_grid(const RawValue& v) {
    const auto parts = detail::split(v.value, ':');
    if (parts.size() != 3) detail::field_error(v, "grid", "expected min:max:steps");
    GridSpec g;
    g.min = detail::parse_real({parts[0], v.origin}, "grid");
    g.max = detail::parse_real({parts[1], v.origin}, "grid");
    g.steps = detail::parse_int<std::size_t>({parts[2], v.origin}, "grid", 0, 100000000);
    if (g.min < 0 || g.max < g.min) detail::field_error(v, "grid", "need 0 <= min <= max");
    return g;
}

// Validates every field; throws ConfigError naming the field and its origin.
inline RunConfig validate(const RawConfig& raw) {
    RunConfig c;
    auto get = [&](const char* key) -> const RawValue* {
        auto it = raw.find(key);
        return it == raw.end() ? nullptr : &it->second;
    };

    if (auto v = get("emitters")) c.n_emitters = detail::parse_int<std::size_t>(*v, "emitters", 1, 12);
    if (auto v = get("kept-photons")) {
        c.kept_photons.clear();
        for (const std::string& part : detail::split(v->value, ','))
            c.kept_photons.push_back(
                detail::parse_int<std::size_t>({part, v->origin}, "kept-photons", 0, 64));
    }
    if (auto v = get("steps")) c.steps = detail::parse_int<int>(*v, "steps", 0, 1000000);

    const RawValue* gt = get("gamma-tau");
    const RawValue* gamma = get("gamma");
    const RawValue* tau = get("tau");
    if (gt && (gamma || tau))
        detail::field_error(*gt, "gamma-tau", "give either gamma-tau or the gamma/tau pair, not both");
    if (gamma || tau) {
        if (!gamma || !tau)
            detail::field_error(gamma ? *gamma : *tau, gamma ? "gamma" : "tau",
                                "gamma and tau must be given together");
        const double g = detail::parse_real(*gamma, "gamma");
        const double t = detail::parse_real(*tau, "tau");
        if (!(g > 0)) detail::field_error(*gamma, "gamma", "must be positive");
        if (t < 0) detail::field_error(*tau, "tau", "must be non-negative");
        c.gamma_tau = g * t;
    } else if (gt) {
        c.gamma_tau = detail::parse_real(*gt, "gamma-tau");
        if (*c.gamma_tau < 0) detail::field_error(*gt, "gamma-tau", "must be non-negative");
    }
    if (auto v = get("grid")) c.grid = parse_grid(*v);

    if (auto v = get("initial")) c.initial = trim(v->value);
    if (auto v = get("target")) c.target = trim(v->value);
    if (auto v = get("formula-variant")) {
        const auto f = parse_formula_variant(trim(v->value));
        if (!f) detail::field_error(*v, "formula-variant", "unknown formula variant");
        c.formula = *f;
        c.formula_name = trim(v->value);
    }
    if (auto v = get("output")) c.output = trim(v->value);
    if (auto v = get("format")) {
        if (trim(v->value) == "csv") c.format = OutputFormat::csv;
        else if (trim(v->value) == "json") c.format = OutputFormat::json;
        else detail::field_error(*v, "format", "expected csv or json");
    }
    if (auto v = get("jobs")) c.jobs = detail::parse_int<std::size_t>(*v, "jobs", 1, 256);
    if (auto v = get("seed")) c.seed = detail::parse_int<std::uint64_t>(*v, "seed", 0, UINT64_MAX);
    if (auto v = get("trajectories"))
        c.trajectories = detail::parse_int<std::size_t>(*v, "trajectories", 1, 100000000);
    if (auto v = get("max-grid-points"))
        c.max_grid_points = detail::parse_int<std::size_t>(*v, "max-grid-points", 1, 100000000);
    if (auto v = get("coupling-multipliers")) {
        for (const std::string& part : detail::split(v->value, ','))
            c.coupling_multipliers.push_back(detail::parse_real({part, v->origin}, "coupling-multipliers"));
        if (c.coupling_multipliers.size() != c.n_emitters && c.coupling_multipliers.size() != 2 &&
            c.coupling_multipliers.size() != 3)
            detail::field_error(*v, "coupling-multipliers", "need one multiplier per emitter");
    }

    // Defaults that depend on the emitter count.
    if (c.initial.empty()) c.initial = "1" + std::string(c.n_emitters - 1, '0');
    if (c.target.empty()) {
        if (c.n_emitters == 2) c.target = "singlet";
        else if (c.n_emitters == 3) c.target = "w";
    }
    if (!c.gamma_tau) {
        if (c.n_emitters == 2) c.gamma_tau = std::numbers::pi / (2.0 * std::sqrt(6.0));
        else if (c.n_emitters == 3) c.gamma_tau = std::numbers::pi / std::sqrt(6.0);
    }
    return c;
}

// Reads a density matrix: a line holding the dimension, then dim*dim complex
// entries in row-major order, each written as "re im". '#' starts a comment.
inline DensityMatrix read_density_matrix(std::istream& in, const CompositeSpace& emitters,
                                         const std::string& source) {
    std::string text, line;
    while (std::getline(in, line)) text += line.substr(0, line.find('#')) + '\n';
    std::istringstream tokens(text);
    std::vector<double> values;
    std::string tok;
    while (tokens >> tok) {
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
            throw ConfigError(source + ": invalid number '" + tok + "'");
        values.push_back(x);
    }
    if (values.empty()) throw ConfigError(source + ": empty density-matrix file");
    const double header = values.front();
    if (header != std::floor(header) || header < 1)
        throw ConfigError(source + ": first entry must be the matrix dimension");
    const auto dim = static_cast<std::size_t>(header);
    if (dim != emitters.dim())
        throw ConfigError(source + ": dimension " + std::to_string(dim) + " does not match " +
                          std::to_string(emitters.n_emitters()) + " emitters (expected " +
                          std::to_string(emitters.dim()) + ")");
    if (values.size() != 1 + 2 * dim * dim)
        throw ConfigError(source + ": expected " + std::to_string(2 * dim * dim) +
                          " numbers after the header, found " + std::to_string(values.size() - 1));
    Matrix rho(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) {
            const std::size_t at = 1 + 2 * (r * dim + c);
            rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = {values[at], values[at + 1]};
        }
    DensityMatrix out{emitters, std::move(rho)};
    try {
        out.require_valid(1e-10, 1e-10, 1e-10);
    } catch (const InputError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return out;
}

// "file:<path>" reads a mixed state; anything else is a state label.
inline DensityMatrix resolve_initial(const std::string& descriptor, std::size_t n_emitters) {
    const CompositeSpace emitters = build_space(n_emitters, 0);
    if (descriptor.starts_with("file:")) {
        const std::string path = descriptor.substr(5);
        std::ifstream in(path);
        if (!in) throw ConfigError("field 'initial': cannot open '" + path + "'");
        return read_density_matrix(in, emitters, path);
    }
    try {
        return DensityMatrix::from_pure(make_named_state(descriptor, n_emitters).state);
    } catch (const InputError& e) {
        throw ConfigError(std::string("field 'initial': ") + e.what());
    }
}

inline NamedState resolve_target(const std::string& label, std::size_t n_emitters) {
    if (label.empty())
        throw ConfigError("field 'target': no default target for " + std::to_string(n_emitters) +
                          " emitters; pass --target");
    try {
        return make_named_state(label, n_emitters);
    } catch (const InputError& e) {
        throw ConfigError(std::string("field 'target': ") + e.what());
    }
}

} // namespace tcpurify::cli
