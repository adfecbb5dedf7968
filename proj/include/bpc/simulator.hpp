#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

#include "bpc/almgren_chriss.hpp"
#include "bpc/errors.hpp"
#include "bpc/filter.hpp"
#include "bpc/market.hpp"
#include "bpc/merton.hpp"
#include "bpc/rng.hpp"

// Seeded Monte Carlo engine: draws mu from the prior (or fixes it), simulates
// price paths with the drift filter in the loop, runs strategies with exact
// wealth/cash accounting, and estimates expected utilities.

namespace bpc::sim {

using bpc::Matrix;
using bpc::Vector;
using filter::PriorBelief1D;
using filter::PriorBeliefND;
using merton::UtilitySpec;

enum class DriftMode { FromPrior, Fixed };

struct SimConfig {
    int n_paths = 1;
    int n_steps = 1;
    std::uint64_t seed = 0;
    DriftMode drift_mode = DriftMode::FromPrior;
    Vector mu_fixed;     // used when drift_mode == Fixed
    int n_threads = 0;   // 0 = hardware concurrency

    void validate() const {
        if (n_paths < 1) throw DomainError("SimConfig: n_paths must be >= 1");
        if (n_steps < 1) throw DomainError("SimConfig: n_steps must be >= 1");
        if (drift_mode == DriftMode::Fixed && mu_fixed.size() == 0)
            throw DomainError("SimConfig: fixed drift mode requires mu_fixed");
    }
};

struct UtilityEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int n_paths = 0;
};

/// One simulated path on a uniform grid: prices, posterior means, Brownian
/// increments (sigma-free, already scaled by sqrt(dt)), and the drawn drift.
struct Trajectory {
    Vector times;   // n_steps + 1
    Matrix S;       // (n_steps+1) x d
    Matrix beta;    // (n_steps+1) x d
    Matrix dW;      // n_steps x d, correlated sqrt(dt) * Z
    Vector mu;      // true drift on this path
    double dt = 0.0;
};

/// Lazily generated set of paths: path(i) is a pure function of
/// (config, market, prior, i), so any subset can be produced on any thread.
class PathSet {
public:
    PathSet(SimConfig cfg, MarketModel market, PriorBeliefND prior, double horizon)
        : cfg_(std::move(cfg)), market_(std::move(market)), prior_(std::move(prior)),
          horizon_(horizon) {
        cfg_.validate();
        market_.validate();
        if (!(horizon_ > 0.0)) throw DomainError("PathSet: horizon must be > 0");
        if (cfg_.drift_mode == DriftMode::Fixed && cfg_.mu_fixed.size() != market_.dim())
            throw DomainError("PathSet: mu_fixed dimension mismatch");
        precompute_filter();
    }

    static PathSet one_asset(SimConfig cfg, const MarketModel& market,
                             const PriorBelief1D& prior, double horizon) {
        PriorBeliefND nd(Vector::Constant(1, prior.beta0), Matrix::Constant(1, 1, prior.nu0_sq));
        return PathSet(std::move(cfg), market, nd, horizon);
    }

    int size() const { return cfg_.n_paths; }
    int steps() const { return cfg_.n_steps; }
    double horizon() const { return horizon_; }
    const SimConfig& config() const { return cfg_; }
    const MarketModel& market() const { return market_; }
    const PriorBeliefND& prior() const { return prior_; }

    Trajectory path(int index) const {
        const int n = cfg_.n_steps;
        const int d = market_.dim();
        const double dt = horizon_ / n;
        const double sq_dt = std::sqrt(dt);
        Trajectory tr;
        tr.dt = dt;
        tr.times = Vector::LinSpaced(n + 1, 0.0, horizon_);
        tr.S.resize(n + 1, d);
        tr.beta.resize(n + 1, d);
        tr.dW.resize(n, d);
        tr.mu = draw_mu(index);

        tr.S.row(0) = market_.s0.transpose();
        tr.beta.row(0) = prior_.beta0.transpose();
        Vector z(d), zc(d);
        for (int k = 0; k < n; ++k) {
            for (int i = 0; i < d; ++i)
                z(i) = rng::gaussian(cfg_.seed, static_cast<std::uint64_t>(index), k + 1, i);
            zc = corr_chol_ * z;
            tr.dW.row(k) = (sq_dt * zc).transpose();
            const double t_next = tr.times(k + 1);
            for (int i = 0; i < d; ++i) {
                const double s = market_.sigma(i);
                if (market_.kind == Dynamics::LogNormal) {
                    tr.S(k + 1, i) = tr.S(k, i) *
                                     std::exp((tr.mu(i) - 0.5 * s * s) * dt + s * tr.dW(k, i));
                } else {
                    tr.S(k + 1, i) = tr.S(k, i) + tr.mu(i) * dt + s * tr.dW(k, i);
                }
            }
            tr.beta.row(k + 1) = posterior_mean(t_next, k + 1, tr).transpose();
        }
        return tr;
    }

    /// Posterior mean recomputed from the sufficient statistic at a grid node.
    Vector posterior_mean(double t, int node, const Trajectory& tr) const {
        const int d = market_.dim();
        Vector y(d);
        if (market_.kind == Dynamics::LogNormal) {
            for (int i = 0; i < d; ++i)
                y(i) = std::log(tr.S(node, i) / tr.S(0, i)) + 0.5 * Sigma_diag_(i) * t;
        } else {
            for (int i = 0; i < d; ++i) y(i) = tr.S(node, i) - tr.S(0, i);
        }
        return filter_A_[node] * y + filter_b_[node];
    }

private:
    void precompute_filter() {
        const Matrix Sigma = market_.covariance();
        Sigma_diag_ = Sigma.diagonal();
        corr_chol_ = Eigen::LLT<Matrix>(
                         market_.corr.size() ? market_.corr
                                             : Matrix::Identity(market_.dim(), market_.dim()))
                         .matrixL();
        const Matrix Sigma_inv = bpc::invert_spd(Sigma);
        const Matrix Gamma0_inv = bpc::invert_spd(prior_.Gamma0);
        const int n = cfg_.n_steps;
        filter_A_.resize(n + 1);
        filter_b_.resize(n + 1);
        for (int k = 0; k <= n; ++k) {
            const double t = horizon_ * k / n;
            const Matrix Gamma_t = bpc::invert_spd(Gamma0_inv + t * Sigma_inv);
            filter_A_[k] = Gamma_t * Sigma_inv;
            filter_b_[k] = Gamma_t * (Gamma0_inv * prior_.beta0);
        }
    }

    Vector draw_mu(int index) const {
        if (cfg_.drift_mode == DriftMode::Fixed) return cfg_.mu_fixed;
        const int d = market_.dim();
        Vector z(d);
        for (int i = 0; i < d; ++i)
            z(i) = rng::gaussian(cfg_.seed, static_cast<std::uint64_t>(index), 0, i);
        const Matrix L = Eigen::LLT<Matrix>(prior_.Gamma0).matrixL();
        return prior_.beta0 + L * z;
    }

    SimConfig cfg_;
    MarketModel market_;
    PriorBeliefND prior_;
    double horizon_;
    Vector Sigma_diag_;
    Matrix corr_chol_;
    std::vector<Matrix> filter_A_;
    std::vector<Vector> filter_b_;
};

inline PathSet simulate_paths(const SimConfig& cfg, const MarketModel& market,
                              const PriorBeliefND& prior, double horizon) {
    return PathSet(cfg, market, prior, horizon);
}

/// Amount (CARA) or fraction (CRRA) rule: arguments are (t, posterior mean).
using VectorRule = std::function<Vector(double, const Vector&)>;

/// Terminal wealth from running an amount rule with Euler wealth accounting.
inline double run_frictionless_cara(const Trajectory& tr, const VectorRule& amount_rule,
                                    const MarketModel& market, double v0,
                                    std::vector<double>* wealth_out = nullptr,
                                    std::vector<double>* position_out = nullptr) {
    const int n = static_cast<int>(tr.dW.rows());
    const int d = static_cast<int>(tr.dW.cols());
    const double dt = tr.dt;
    double V = v0;
    if (wealth_out) wealth_out->assign(1, V);
    if (position_out) position_out->clear();
    for (int k = 0; k < n; ++k) {
        const Vector M = amount_rule(tr.times(k), tr.beta.row(k).transpose());
        double drift = market.r * V;
        double shock = 0.0;
        for (int i = 0; i < d; ++i) {
            drift += M(i) * (tr.mu(i) - market.r);
            shock += M(i) * market.sigma(i) * tr.dW(k, i);
        }
        V += drift * dt + shock;
        if (wealth_out) wealth_out->push_back(V);
        if (position_out) position_out->push_back(M(0));
    }
    if (position_out && n > 0) position_out->push_back(position_out->back());
    return V;
}

/// Terminal wealth from running a fraction rule with an exact log-update
/// (Ito-corrected), which keeps V > 0 for bounded fractions.
inline double run_frictionless_crra(const Trajectory& tr, const VectorRule& fraction_rule,
                                    const MarketModel& market, double v0,
                                    std::vector<double>* wealth_out = nullptr,
                                    std::vector<double>* position_out = nullptr) {
    if (!(v0 > 0.0)) throw DomainError("run_frictionless_crra: V0 must be > 0");
    const int n = static_cast<int>(tr.dW.rows());
    const int d = static_cast<int>(tr.dW.cols());
    const double dt = tr.dt;
    const Matrix Sigma = market.covariance();
    double log_v = std::log(v0);
    if (wealth_out) wealth_out->assign(1, v0);
    if (position_out) position_out->clear();
    for (int k = 0; k < n; ++k) {
        const Vector theta = fraction_rule(tr.times(k), tr.beta.row(k).transpose());
        double drift = market.r;
        double shock = 0.0;
        for (int i = 0; i < d; ++i) {
            drift += theta(i) * (tr.mu(i) - market.r);
            shock += theta(i) * market.sigma(i) * tr.dW(k, i);
        }
        drift -= 0.5 * theta.dot(Sigma * theta);
        log_v += drift * dt + shock;
        if (wealth_out) wealth_out->push_back(std::exp(log_v));
        if (position_out) position_out->push_back(theta(0));
    }
    if (position_out && n > 0) position_out->push_back(position_out->back());
    const double V = std::exp(log_v);
    if (!(V > 0.0)) throw std::logic_error("run_frictionless_crra: wealth not positive");
    return V;
}

struct ExecutionResult {
    ac::InventoryPath inventory;
    std::vector<double> cash;  // X on the grid
    double objective = 0.0;    // X_T + q_T S_T - ell(q_T)
};

/// Run an execution-coefficient table on one path: forward-integrate the
/// inventory, accumulate cash with trapezoidal price averaging, and report
/// the penalized terminal objective.
inline ExecutionResult run_execution(const Trajectory& tr, const ac::AcCoeffTable& table,
                                     const ac::ExecutionSpec& spec, double q0, double x0) {
    const int n = static_cast<int>(tr.dW.rows());
    ac::BetaPath bp;
    bp.t.assign(tr.times.data(), tr.times.data() + n + 1);
    bp.beta.resize(n + 1);
    for (int k = 0; k <= n; ++k) bp.beta[k] = tr.beta(k, 0);
    ExecutionResult res;
    res.inventory = ac::optimal_inventory(table, bp, q0, spec);
    res.cash.resize(n + 1);
    res.cash[0] = x0;
    for (int k = 0; k < n; ++k) {
        const double dt = tr.times(k + 1) - tr.times(k);
        const double v = res.inventory.v[k];
        const double vol = spec.volume.at(tr.times(k));
        const double s_avg = 0.5 * (tr.S(k, 0) + tr.S(k + 1, 0));
        const double cost = (vol > 0.0) ? vol * spec.eta * (v / vol) * (v / vol) : 0.0;
        res.cash[k + 1] = res.cash[k] - v * s_avg * dt - cost * dt;
    }
    const double qT = res.inventory.q.back();
    res.objective = res.cash.back() + qT * tr.S(n, 0) - spec.penalty.ell(qT);
    return res;
}

inline double apply_utility(const UtilitySpec& u, double wealth) {
    switch (u.kind) {
        case UtilitySpec::Kind::Cara: return -std::exp(-u.gamma * wealth);
        case UtilitySpec::Kind::Log: return std::log(wealth);
        case UtilitySpec::Kind::Crra:
            return u.is_log() ? std::log(wealth)
                              : std::pow(wealth, 1.0 - u.gamma) / (1.0 - u.gamma);
    }
    return 0.0;
}

namespace detail {

template <typename Fn>
void parallel_for(int n, int n_threads, const Fn& fn) {
    if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, n));
    if (n_threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
        workers.emplace_back([=]() {
            for (int i = w; i < n; i += n_threads) fn(i);
        });
    }
    for (auto& th : workers) th.join();
}

// Pairwise summation keeps aggregation order-independent of threading.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

}  // namespace detail

inline UtilityEstimate summarize(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 1) throw DomainError("summarize: no samples");
    UtilityEstimate est;
    est.n_paths = static_cast<int>(n);
    est.mean = detail::pairwise_sum(samples.data(), n) / static_cast<double>(n);
    if (n >= 2) {
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = samples[i] - est.mean;
            sq[i] = dev * dev;
        }
        const double var = detail::pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
        est.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return est;
}

/// Per-path terminal utility of a strategy, aggregated across the path set.
/// `per_path` maps a trajectory to terminal wealth (or objective).
inline UtilityEstimate estimate_utility(const PathSet& paths,
                                        const std::function<double(const Trajectory&)>& per_path,
                                        const UtilitySpec& utility) {
    if (paths.size() < 2) throw DomainError("estimate_utility: need at least 2 paths");
    std::vector<double> util(static_cast<std::size_t>(paths.size()));
    detail::parallel_for(paths.size(), paths.config().n_threads, [&](int i) {
        util[static_cast<std::size_t>(i)] = apply_utility(utility, per_path(paths.path(i)));
    });
    return summarize(util);
}

}  // namespace bpc::sim
