#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "bpc/almgren_chriss.hpp"
#include "bpc/errors.hpp"
#include "bpc/market.hpp"
#include "bpc/merton.hpp"
#include "bpc/simulator.hpp"

// Flat key-value experiment configs with [section] headers, mirroring how the
// desk presets are usually written down: a `problem` line plus market, prior,
// objective, execution, and sim blocks.

namespace bpc::cfg {

/// Raised on any config syntax or validation problem (CLI exit code 2).
struct ConfigError : DomainError {
    using DomainError::DomainError;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace detail

/// Section -> key -> value, as read from the file. Top-level keys live in the
/// "" section.
class RawConfig {
public:
    static RawConfig parse(std::istream& in) {
        RawConfig raw;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": unterminated section header");
                section = detail::lower(detail::trim(line.substr(1, line.size() - 2)));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = detail::lower(detail::trim(line.substr(0, eq)));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
            raw.values_[section][key] = value;
        }
        return raw;
    }

    static RawConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        return parse(in);
    }

    bool has_section(const std::string& section) const { return values_.count(section) > 0; }

    std::optional<std::string> find(const std::string& section, const std::string& key) const {
        const auto sit = values_.find(section);
        if (sit == values_.end()) return std::nullopt;
        const auto kit = sit->second.find(key);
        if (kit == sit->second.end()) return std::nullopt;
        return kit->second;
    }

    std::string require(const std::string& section, const std::string& key) const {
        const auto v = find(section, key);
        if (!v) {
            const std::string where = section.empty() ? "top level" : "[" + section + "]";
            throw ConfigError("missing config key '" + key + "' in " + where);
        }
        return *v;
    }

    double number(const std::string& section, const std::string& key) const {
        return to_number(require(section, key), section, key);
    }

    double number_or(const std::string& section, const std::string& key, double fallback) const {
        const auto v = find(section, key);
        return v ? to_number(*v, section, key) : fallback;
    }

    long long integer_or(const std::string& section, const std::string& key,
                         long long fallback) const {
        const auto v = find(section, key);
        if (!v) return fallback;
        const double x = to_number(*v, section, key);
        const auto n = static_cast<long long>(x);
        if (static_cast<double>(n) != x)
            throw ConfigError("config key '" + key + "' must be an integer, got " + *v);
        return n;
    }

    bool flag_or(const std::string& section, const std::string& key, bool fallback) const {
        const auto v = find(section, key);
        if (!v) return fallback;
        const std::string s = detail::lower(*v);
        if (s == "true" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "no" || s == "0") return false;
        throw ConfigError("config key '" + key + "' must be a boolean, got " + *v);
    }

private:
    static double to_number(const std::string& s, const std::string& section,
                            const std::string& key) {
        std::size_t pos = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size())
            throw ConfigError("config key '" + key + "'" +
                              (section.empty() ? "" : " in [" + section + "]") +
                              ": not a number: " + s);
        return x;
    }

    std::map<std::string, std::map<std::string, std::string>> values_;
};

enum class Problem { Choice, Liquidation, Transition, FrictionlessCara, FrictionlessCrra };

inline bool is_execution_problem(Problem p) {
    return p == Problem::Choice || p == Problem::Liquidation || p == Problem::Transition;
}

struct ExperimentConfig {
    Problem problem = Problem::FrictionlessCara;
    MarketModel market;
    filter::PriorBelief1D prior;
    merton::UtilitySpec utility;
    ac::ExecutionSpec exec;  // valid only for execution problems
    double q0 = 0.0;         // initial inventory (execution problems)
    double v0 = 1.0;         // initial wealth (frictionless problems)
    double x0 = 0.0;         // initial cash (execution problems)
    bool has_sim = false;
    sim::SimConfig sim_cfg;
    int dump_paths = 3;  // trajectories written out by the CLI
};

inline Problem parse_problem(const std::string& name) {
    const std::string s = detail::lower(name);
    if (s == "choice") return Problem::Choice;
    if (s == "liquidation") return Problem::Liquidation;
    if (s == "transition") return Problem::Transition;
    if (s == "frictionless-cara") return Problem::FrictionlessCara;
    if (s == "frictionless-crra") return Problem::FrictionlessCrra;
    throw ConfigError("unknown problem: " + name +
                      " (expected choice | liquidation | transition | frictionless-cara | "
                      "frictionless-crra)");
}

inline ExperimentConfig load_experiment(const RawConfig& raw) {
    ExperimentConfig ec;
    ec.problem = parse_problem(raw.require("", "problem"));

    {
        const std::string dyn = detail::lower(
            raw.find("market", "dynamics").value_or("lognormal"));
        Dynamics kind;
        if (dyn == "lognormal") kind = Dynamics::LogNormal;
        else if (dyn == "bachelier") kind = Dynamics::Bachelier;
        else throw ConfigError("unknown market dynamics: " + dyn);
        try {
            ec.market = MarketModel::one_asset(kind, raw.number("market", "sigma"),
                                               raw.number_or("market", "r", 0.0),
                                               raw.number("market", "s0"));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("[market]: ") + e.what());
        }
    }

    try {
        const double nu0 = raw.number("prior", "nu0");
        ec.prior = filter::PriorBelief1D(raw.number("prior", "beta0"), nu0 * nu0);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("[prior]: ") + e.what());
    }

    {
        const std::string kind = detail::lower(
            raw.find("objective", "utility").value_or("cara"));
        const double T = raw.number("objective", "t");
        try {
            if (kind == "cara") {
                ec.utility = merton::UtilitySpec::cara(raw.number("objective", "gamma"), T);
            } else if (kind == "crra") {
                ec.utility = merton::UtilitySpec::crra(
                    raw.number("objective", "gamma"), T,
                    raw.flag_or("objective", "acknowledge_blowup", false));
            } else if (kind == "log") {
                ec.utility = merton::UtilitySpec::log_utility(T);
            } else {
                throw ConfigError("unknown utility kind: " + kind);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const DomainError& e) {
            throw ConfigError(std::string("[objective]: ") + e.what());
        }
    }

    if (is_execution_problem(ec.problem)) {
        if (!raw.has_section("execution"))
            throw ConfigError("problem requires an [execution] section");
        if (ec.utility.kind != merton::UtilitySpec::Kind::Cara)
            throw ConfigError("execution problems require utility = cara");
        ec.exec.eta = raw.number("execution", "eta");
        ec.exec.volume = ac::VolumeCurve::constant(raw.number("execution", "volume"));
        switch (ec.problem) {
            case Problem::Choice:
                ec.exec.penalty = ac::Penalty::none();
                break;
            case Problem::Liquidation:
                ec.exec.penalty = ac::Penalty::liquidation(raw.number("execution", "k"));
                break;
            case Problem::Transition:
                ec.exec.penalty = ac::Penalty::transition(raw.number("execution", "k"),
                                                          raw.number("execution", "q_target"));
                break;
            default:
                break;
        }
        ec.q0 = raw.number_or("execution", "q0", 0.0);
        ec.x0 = raw.number_or("execution", "x0", 0.0);
        try {
            ec.exec.validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("[execution]: ") + e.what());
        }
    } else if (raw.has_section("execution")) {
        throw ConfigError("frictionless problems must not have an [execution] section");
    } else {
        ec.v0 = raw.number_or("objective", "v0", 1.0);
        if (ec.problem == Problem::FrictionlessCrra && !(ec.v0 > 0.0))
            throw ConfigError("frictionless-crra requires v0 > 0");
    }

    if (raw.has_section("sim")) {
        ec.has_sim = true;
        ec.sim_cfg.n_paths = static_cast<int>(raw.integer_or("sim", "n_paths", 100000));
        ec.sim_cfg.n_steps = static_cast<int>(raw.integer_or("sim", "n_steps", 1000));
        ec.sim_cfg.seed = static_cast<std::uint64_t>(raw.integer_or("sim", "seed", 0));
        ec.sim_cfg.n_threads = static_cast<int>(raw.integer_or("sim", "n_threads", 0));
        ec.dump_paths = static_cast<int>(raw.integer_or("sim", "dump_paths", 3));
        const std::string drift = detail::lower(raw.find("sim", "drift").value_or("prior"));
        if (drift == "prior") {
            ec.sim_cfg.drift_mode = sim::DriftMode::FromPrior;
        } else if (drift == "fixed") {
            ec.sim_cfg.drift_mode = sim::DriftMode::Fixed;
            ec.sim_cfg.mu_fixed = Vector::Constant(1, raw.number("sim", "mu"));
        } else {
            throw ConfigError("unknown sim drift mode: " + drift + " (expected prior | fixed)");
        }
        try {
            ec.sim_cfg.validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("[sim]: ") + e.what());
        }
        if (ec.dump_paths < 0) throw ConfigError("[sim]: dump_paths must be >= 0");
    }

    return ec;
}

inline ExperimentConfig load_experiment_file(const std::string& path) {
    return load_experiment(RawConfig::parse_file(path));
}

}  // namespace bpc::cfg
