#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "bpc/almgren_chriss.hpp"
#include "bpc/config.hpp"
#include "bpc/figures.hpp"
#include "bpc/merton.hpp"
#include "bpc/simulator.hpp"

// Command-line harness: solve coefficient systems, run seeded Monte Carlo
// experiments, and emit the three-path figure datasets.
//
// Exit codes: 0 success, 2 config/argument validation failure, 3 solver
// blow-up or coefficient escape (the offending time is printed).

namespace {

namespace fs = std::filesystem;
using namespace bpc;

constexpr int kExitConfig = 2;
constexpr int kExitBlowup = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int steps = 0;  // 0 = keep config / default
    int paths = 0;
    bool euler = false;
};

ode::Scheme scheme_of(const CommonOpts& o) {
    return o.euler ? ode::Scheme::Euler : ode::Scheme::Rk4;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

/// Closed-form value coefficients sampled on a uniform grid (frictionless
/// problems), same CSV shape as the execution tables: t,a,b.
std::string frictionless_table_csv(const cfg::ExperimentConfig& ec, int steps) {
    std::string out = "t,a,b\n";
    char buf[96];
    for (int k = 0; k <= steps; ++k) {
        const double t = ec.utility.T * k / steps;
        merton::Coeffs1D c;
        if (ec.problem == cfg::Problem::FrictionlessCara)
            c = merton::cara_coeffs_1d(t, ec.market, ec.utility, ec.prior);
        else
            c = merton::crra_coeffs_1d(t, ec.market, ec.utility, ec.prior);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, c.a, c.b);
        out += buf;
    }
    return out;
}

ac::AcCoeffTable solve_execution_table(const cfg::ExperimentConfig& ec, int steps,
                                       ode::Scheme scheme) {
    const int n = steps > 0 ? steps : 10000;
    if (ec.problem == cfg::Problem::Transition)
        return ac::solve_transition_odes(ec.exec, ec.market, ec.utility, ec.prior, n, scheme);
    return ac::solve_choice_liq_odes(ec.exec, ec.market, ec.utility, ec.prior, n, scheme);
}

int cmd_solve(const CommonOpts& opts) {
    const cfg::ExperimentConfig ec = cfg::load_experiment_file(opts.config_path);
    ensure_dir(opts.out_dir);
    const std::string out_path = join(opts.out_dir, "coeffs.csv");
    if (cfg::is_execution_problem(ec.problem)) {
        solve_execution_table(ec, opts.steps, scheme_of(opts)).save_csv(out_path);
    } else {
        if (ec.problem == cfg::Problem::FrictionlessCrra && !ec.utility.is_log()) {
            // Surface the finite-horizon blow-up before sampling anything.
            merton::UtilitySpec probe = ec.utility;
            probe.acknowledge_blowup = true;
            const merton::BlowupDomain dom = merton::crra_blowup_1d(ec.market, probe, ec.prior);
            if (dom.blows_up_in_horizon())
                throw BlowupError("value function is infinite for t <= t_tilde = " +
                                      std::to_string(dom.t_tilde),
                                  dom.t_tilde);
        }
        const int steps = opts.steps > 0 ? opts.steps : 1000;
        write_text(out_path, frictionless_table_csv(ec, steps));
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

std::string format_report(const sim::UtilityEstimate& est) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "mean %.17g\nstd_error %.17g\nn_paths %d\n", est.mean,
                  est.std_error, est.n_paths);
    return buf;
}

void dump_trajectory_rows(std::ofstream& out, int path_id, const std::vector<double>& t,
                          const std::vector<double>& S, const std::vector<double>& beta,
                          const std::vector<double>& position, const std::vector<double>& cash,
                          const std::vector<double>& wealth) {
    char buf[256];
    for (std::size_t k = 0; k < t.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", path_id, t[k],
                      S[k], beta[k], position[k], cash[k], wealth[k]);
        out << buf;
    }
}

int cmd_simulate(const CommonOpts& opts, const std::string& table_path) {
    cfg::ExperimentConfig ec = cfg::load_experiment_file(opts.config_path);
    if (!ec.has_sim) throw cfg::ConfigError("simulate requires a [sim] section");
    if (opts.seed_set) ec.sim_cfg.seed = opts.seed;
    if (opts.paths > 0) ec.sim_cfg.n_paths = opts.paths;
    if (opts.steps > 0) ec.sim_cfg.n_steps = opts.steps;
    ensure_dir(opts.out_dir);

    const sim::PathSet paths =
        sim::PathSet::one_asset(ec.sim_cfg, ec.market, ec.prior, ec.utility.T);

    std::function<double(const sim::Trajectory&)> per_path;
    ac::AcCoeffTable table;
    if (cfg::is_execution_problem(ec.problem)) {
        table = table_path.empty() ? solve_execution_table(ec, 0, scheme_of(opts))
                                   : ac::AcCoeffTable::load_csv(table_path);
        per_path = [&](const sim::Trajectory& tr) {
            return sim::run_execution(tr, table, ec.exec, ec.q0, ec.x0).objective;
        };
    } else if (ec.problem == cfg::Problem::FrictionlessCara) {
        per_path = [&](const sim::Trajectory& tr) {
            const sim::VectorRule rule = [&](double t, const Vector& beta) {
                return Vector::Constant(
                    1, merton::cara_allocation_1d(t, beta(0), ec.market, ec.utility, ec.prior));
            };
            return sim::run_frictionless_cara(tr, rule, ec.market, ec.v0);
        };
    } else {
        per_path = [&](const sim::Trajectory& tr) {
            const sim::VectorRule rule = [&](double t, const Vector& beta) {
                return Vector::Constant(
                    1, merton::crra_allocation_1d(t, beta(0), ec.market, ec.utility, ec.prior));
            };
            return sim::run_frictionless_crra(tr, rule, ec.market, ec.v0);
        };
    }

    const sim::UtilityEstimate est = sim::estimate_utility(paths, per_path, ec.utility);
    write_text(join(opts.out_dir, "report.txt"), format_report(est));

    const std::string traj_path = join(opts.out_dir, "trajectories.csv");
    std::ofstream traj(traj_path);
    if (!traj) throw std::runtime_error("cannot open " + traj_path);
    traj << "path_id,t,S,beta,position,cash,wealth\n";
    const int n_dump = std::min(ec.dump_paths, ec.sim_cfg.n_paths);
    for (int i = 0; i < n_dump; ++i) {
        const sim::Trajectory tr = paths.path(i);
        std::vector<double> t(tr.times.data(), tr.times.data() + tr.times.size());
        std::vector<double> S(tr.S.col(0).data(), tr.S.col(0).data() + tr.S.rows());
        std::vector<double> beta(tr.beta.col(0).data(), tr.beta.col(0).data() + tr.beta.rows());
        std::vector<double> position, cash, wealth;
        if (cfg::is_execution_problem(ec.problem)) {
            const sim::ExecutionResult res = sim::run_execution(tr, table, ec.exec, ec.q0, ec.x0);
            position = res.inventory.q;
            cash = res.cash;
            wealth.resize(t.size());
            for (std::size_t k = 0; k < t.size(); ++k)
                wealth[k] = cash[k] + position[k] * S[k];
        } else if (ec.problem == cfg::Problem::FrictionlessCara) {
            const sim::VectorRule rule = [&](double tt, const Vector& b) {
                return Vector::Constant(
                    1, merton::cara_allocation_1d(tt, b(0), ec.market, ec.utility, ec.prior));
            };
            sim::run_frictionless_cara(tr, rule, ec.market, ec.v0, &wealth, &position);
            cash.resize(t.size());
            for (std::size_t k = 0; k < t.size(); ++k) cash[k] = wealth[k] - position[k];
        } else {
            const sim::VectorRule rule = [&](double tt, const Vector& b) {
                return Vector::Constant(
                    1, merton::crra_allocation_1d(tt, b(0), ec.market, ec.utility, ec.prior));
            };
            sim::run_frictionless_crra(tr, rule, ec.market, ec.v0, &wealth, &position);
            cash.resize(t.size());
            for (std::size_t k = 0; k < t.size(); ++k)
                cash[k] = wealth[k] * (1.0 - position[k]);
        }
        dump_trajectory_rows(traj, i, t, S, beta, position, cash, wealth);
    }
    if (!traj) throw std::runtime_error("write failed for " + traj_path);

    std::cout << format_report(est) << "wrote " << traj_path << "\n";
    return 0;
}

int cmd_figures(int which, const CommonOpts& opts) {
    if (which < 1 || which > 3) throw cfg::ConfigError("figure index must be 1, 2, or 3");
    ensure_dir(opts.out_dir);
    const int n_steps = opts.steps > 0 ? opts.steps : 1000;
    const std::uint64_t seed = opts.seed_set ? opts.seed : figures::kDefaultSeed;
    const figures::FigureData fig =
        figures::run_figure(which, seed, n_steps, 10000, scheme_of(opts));
    const std::string csv = join(opts.out_dir, "figure" + std::to_string(which) + ".csv");
    figures::write_figure_csv(fig, csv);
    fig.table.save_csv(join(opts.out_dir, "figure" + std::to_string(which) + "_coeffs.csv"));
    std::cout << "wrote " << csv << " (paths up=" << fig.seeds.up << " flat=" << fig.seeds.flat
              << " down=" << fig.seeds.down << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drift-learning portfolio and execution toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string table_path;
    int figure_which = 0;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", opts.config_path, "experiment config file");
        if (needs_config) c->required();
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed, "RNG seed")->each([&](const std::string&) {
            opts.seed_set = true;
        });
        sub->add_option("--steps", opts.steps, "override step count");
        sub->add_option("--paths", opts.paths, "override Monte Carlo path count");
        sub->add_flag("--euler", opts.euler, "use the first-order integrator");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve coefficient systems to CSV");
    add_common(solve, true);

    CLI::App* simulate = app.add_subcommand("simulate", "run seeded Monte Carlo experiments");
    add_common(simulate, true);
    simulate->add_option("--table", table_path, "reuse a solved coefficient table CSV");

    CLI::App* figures_cmd = app.add_subcommand("figures", "emit three-path figure datasets");
    figures_cmd->add_option("which", figure_which, "figure index (1, 2, or 3)")->required();
    add_common(figures_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (solve->parsed()) return cmd_solve(opts);
        if (simulate->parsed()) return cmd_simulate(opts, table_path);
        return cmd_figures(figure_which, opts);
    } catch (const bpc::BlowupError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "blow-up time t_tilde = %.6g\n", e.t_tilde());
        return kExitBlowup;
    } catch (const bpc::RiccatiEscapeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "escape time = %.6g\n", e.escape_time());
        return kExitBlowup;
    } catch (const bpc::DomainError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
