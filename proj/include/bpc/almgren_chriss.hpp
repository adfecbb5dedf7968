#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bpc/errors.hpp"
#include "bpc/filter.hpp"
#include "bpc/market.hpp"
#include "bpc/merton.hpp"
#include "bpc/ode.hpp"

// Execution-cost model: quadratic costs L(rho) = eta rho^2, terminal penalty
// ell, backward integration of the reduced ODE systems, and forward
// integration of the optimal inventory.

namespace bpc::ac {

using filter::PriorBelief1D;
using merton::UtilitySpec;

/// Legendre-Fenchel transform of L(rho) = eta rho^2: H(p) = p^2 / (4 eta).
inline double legendre_H(double p, double eta) {
    if (!(eta > 0.0)) throw DomainError("legendre_H: eta must be > 0");
    return p * p / (4.0 * eta);
}

inline double legendre_H_prime(double p, double eta) {
    if (!(eta > 0.0)) throw DomainError("legendre_H_prime: eta must be > 0");
    return p / (2.0 * eta);
}

/// Generalized cost L(rho) = eta |rho|^(1+phi) + psi |rho|. Only the numeric
/// Legendre transform is available for it; the ODE reduction is quadratic-only.
struct GeneralizedCost {
    double eta = 0.0;
    double phi = 1.0;
    double psi = 0.0;

    double L(double rho) const {
        return eta * std::pow(std::fabs(rho), 1.0 + phi) + psi * std::fabs(rho);
    }

    /// H(p) = sup_rho (rho p - L(rho)) by golden-section search on the
    /// relevant half-line (the objective is concave there).
    double H_numeric(double p) const {
        if (!(eta > 0.0) || !(phi > 0.0) || psi < 0.0)
            throw DomainError("GeneralizedCost: require eta > 0, phi > 0, psi >= 0");
        const double ap = std::fabs(p);
        if (ap <= psi) return 0.0;
        double lo = 0.0, hi = std::pow((ap - psi) / eta, 1.0 / phi) + 1.0;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        auto obj = [&](double rho) { return rho * ap - eta * std::pow(rho, 1.0 + phi) - psi * rho; };
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = obj(x1), f2 = obj(x2);
        for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
            if (f1 < f2) {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + gr * (hi - lo); f2 = obj(x2);
            } else {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - gr * (hi - lo); f1 = obj(x1);
            }
        }
        return obj(0.5 * (lo + hi));
    }
};

/// Market volume V_t, piecewise-constant in t (shares / day).
struct VolumeCurve {
    std::vector<double> knots;   // breakpoints, ascending, knots[0] applies from -inf
    std::vector<double> values;  // values[i] on [knots[i], knots[i+1])

    static VolumeCurve constant(double v) { return VolumeCurve{{0.0}, {v}}; }

    double at(double t) const {
        if (values.empty()) throw DomainError("VolumeCurve: empty");
        auto it = std::upper_bound(knots.begin(), knots.end(), t);
        const std::size_t i = (it == knots.begin()) ? 0 : (it - knots.begin() - 1);
        return values[i];
    }

    void validate() const {
        if (knots.size() != values.size() || values.empty())
            throw DomainError("VolumeCurve: knots/values mismatch");
        if (!std::is_sorted(knots.begin(), knots.end()))
            throw DomainError("VolumeCurve: knots must be ascending");
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("VolumeCurve: V_t must be >= 0");
    }
};

/// Terminal penalty ell(q).
struct Penalty {
    enum class Kind { None, Liquidation, Transition };
    Kind kind = Kind::None;
    double K = 0.0;
    double q_target = 0.0;

    static Penalty none() { return Penalty{}; }
    static Penalty liquidation(double K) { return Penalty{Kind::Liquidation, K, 0.0}; }
    static Penalty transition(double K, double q_target) {
        return Penalty{Kind::Transition, K, q_target};
    }

    double ell(double q) const {
        switch (kind) {
            case Kind::None: return 0.0;
            case Kind::Liquidation: return 0.5 * K * q * q;
            case Kind::Transition: return 0.5 * K * (q - q_target) * (q - q_target);
        }
        return 0.0;
    }
};

struct ExecutionSpec {
    double eta = 0.0;  // currency * share^-1 * day
    VolumeCurve volume = VolumeCurve::constant(0.0);
    Penalty penalty = Penalty::none();

    void validate() const {
        if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("ExecutionSpec: eta must be > 0");
        volume.validate();
        if (penalty.K < 0.0) throw DomainError("ExecutionSpec: K must be >= 0");
    }
};

/// Time-gridded coefficients of theta(t,q,beta) = a + b beta^2/2 + c beta q
/// + d q^2/2 (+ e beta + f q for the transition problem).
struct AcCoeffTable {
    std::vector<double> t;                    // ascending, uniform, 0..T
    std::vector<std::array<double, 6>> rows;  // a,b,c,d,e,f
    bool has_ef = false;

    double horizon() const { return t.back(); }

    std::array<double, 6> at(double time) const {
        if (t.size() < 2) throw DomainError("AcCoeffTable: empty table");
        if (time <= t.front()) return rows.front();
        if (time >= t.back()) return rows.back();
        const double dt = t[1] - t[0];
        const auto k = std::min<std::size_t>(static_cast<std::size_t>((time - t.front()) / dt),
                                             t.size() - 2);
        const double w = (time - t[k]) / (t[k + 1] - t[k]);
        std::array<double, 6> out{};
        for (int j = 0; j < 6; ++j) out[j] = (1.0 - w) * rows[k][j] + w * rows[k + 1][j];
        return out;
    }

    void save_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw DomainError("AcCoeffTable: cannot open " + path);
        os << (has_ef ? "t,a,b,c,d,e,f\n" : "t,a,b,c,d\n");
        char buf[64];
        const int ncols = has_ef ? 6 : 4;
        for (std::size_t k = 0; k < t.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", t[k]);
            os << buf;
            for (int j = 0; j < ncols; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", rows[k][j]);
                os << ',' << buf;
            }
            os << '\n';
        }
    }

    static AcCoeffTable load_csv(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw DomainError("AcCoeffTable: cannot open " + path);
        std::string line;
        if (!std::getline(is, line)) throw DomainError("AcCoeffTable: empty file");
        AcCoeffTable table;
        table.has_ef = line.find(",e,f") != std::string::npos;
        const int ncols = table.has_ef ? 6 : 4;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string cell;
            std::getline(ss, cell, ',');
            table.t.push_back(std::stod(cell));
            std::array<double, 6> row{};
            for (int j = 0; j < ncols; ++j) {
                if (!std::getline(ss, cell, ',')) throw DomainError("AcCoeffTable: short row");
                row[j] = std::stod(cell);
            }
            table.rows.push_back(row);
        }
        if (table.t.size() < 2) throw DomainError("AcCoeffTable: too few rows");
        return table;
    }
};

namespace detail {

using State = Eigen::Matrix<double, 6, 1>;

constexpr double kEscapeLimit = 1e12;

/// Right-hand side of the coefficient ODEs. The choice/liquidation system is
/// the transition system with e = f = 0 preserved.
inline State coeff_rhs(double t, const State& y, const ExecutionSpec& spec,
                       const MarketModel& market, const UtilitySpec& utility,
                       const PriorBelief1D& prior) {
    const double sigma = market.sigma1();
    const double s2 = sigma * sigma;
    const double gamma = utility.gamma;
    const double g = filter::learning_gain(prior, sigma, t);
    const double g2 = g * g;
    const double V = spec.volume.at(t);
    const double ve = V / (2.0 * spec.eta);
    const double a = y[0], b = y[1], c = y[2], d = y[3], e = y[4], f = y[5];
    (void)a;
    State dy = State::Zero();
    dy[0] = -0.5 * s2 * g2 * b - 0.5 * gamma * s2 * g2 * e * e + 0.5 * ve * f * f;
    dy[1] = -gamma * s2 * g2 * b * b + ve * c * c;
    dy[2] = 1.0 - gamma * s2 * g2 * b * c + gamma * s2 * g * b + ve * c * d;
    dy[3] = -gamma * s2 - gamma * s2 * g2 * c * c + 2.0 * gamma * s2 * g * c + ve * d * d;
    dy[4] = -gamma * s2 * g2 * b * e + ve * c * f;
    dy[5] = -gamma * s2 * g2 * c * e + gamma * s2 * g * e + ve * d * f;
    return dy;
}

inline AcCoeffTable solve_backward(const ExecutionSpec& spec, const MarketModel& market,
                                   const UtilitySpec& utility, const PriorBelief1D& prior,
                                   int steps, ode::Scheme scheme, const State& terminal,
                                   bool has_ef) {
    spec.validate();
    utility.validate();
    if (steps < 100) throw DomainError("solve: steps must be >= 100");
    const double T = utility.T;
    AcCoeffTable table;
    table.has_ef = has_ef;
    table.t.resize(steps + 1);
    table.rows.resize(steps + 1);
    auto rhs = [&](double t, const State& y) {
        return coeff_rhs(t, y, spec, market, utility, prior);
    };
    const double h = -T / steps;
    const auto store = [&](int row, const State& y) {
        for (int j = 0; j < 6; ++j) table.rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] = y[j];
    };
    State y = terminal;
    table.t[steps] = T;
    store(steps, y);
    for (int k = 0; k < steps; ++k) {
        const double t = T + k * h;
        y = ode::step(rhs, t, y, h, scheme);
        const double tn = T + (k + 1) * h;
        for (int j = 0; j < 6; ++j) {
            if (!std::isfinite(y[j]) || std::fabs(y[j]) > kEscapeLimit)
                throw RiccatiEscapeError(
                    "coefficient system escaped at t = " + std::to_string(tn), tn);
        }
        table.t[steps - 1 - k] = tn;
        store(steps - 1 - k, y);
    }
    table.t.front() = 0.0;  // kill -0.0 from rounding
    return table;
}

}  // namespace detail

/// Backward integration of the four-coefficient system (portfolio choice when
/// K = 0, relaxed liquidation otherwise).
inline AcCoeffTable solve_choice_liq_odes(const ExecutionSpec& spec, const MarketModel& market,
                                          const UtilitySpec& utility, const PriorBelief1D& prior,
                                          int steps = 10000,
                                          ode::Scheme scheme = ode::Scheme::Rk4) {
    if (spec.penalty.kind == Penalty::Kind::Transition)
        throw DomainError("solve_choice_liq_odes: use solve_transition_odes for transitions");
    const double K = spec.penalty.kind == Penalty::Kind::Liquidation ? spec.penalty.K : 0.0;
    detail::State terminal;
    terminal << 0.0, 0.0, 0.0, K, 0.0, 0.0;
    return detail::solve_backward(spec, market, utility, prior, steps, scheme, terminal, false);
}

/// Backward integration of the six-coefficient transition system.
inline AcCoeffTable solve_transition_odes(const ExecutionSpec& spec, const MarketModel& market,
                                          const UtilitySpec& utility, const PriorBelief1D& prior,
                                          int steps = 10000,
                                          ode::Scheme scheme = ode::Scheme::Rk4) {
    if (spec.penalty.kind != Penalty::Kind::Transition)
        throw DomainError("solve_transition_odes: penalty must be Transition");
    const double K = spec.penalty.K;
    const double qt = spec.penalty.q_target;
    detail::State terminal;
    terminal << 0.5 * K * qt * qt, 0.0, 0.0, K, 0.0, -K * qt;
    return detail::solve_backward(spec, market, utility, prior, steps, scheme, terminal, true);
}

/// Posterior-mean trail sampled on a time grid, linearly interpolated.
struct BetaPath {
    std::vector<double> t;
    std::vector<double> beta;

    double at(double time) const {
        if (t.size() < 2) throw DomainError("BetaPath: need at least two samples");
        if (time <= t.front()) return beta.front();
        if (time >= t.back()) return beta.back();
        const auto it = std::upper_bound(t.begin(), t.end(), time);
        const std::size_t k = it - t.begin() - 1;
        const double w = (time - t[k]) / (t[k + 1] - t[k]);
        return (1.0 - w) * beta[k] + w * beta[k + 1];
    }
};

/// Inventory trajectory produced by the optimal trading rate. v[k] is the
/// realized average rate over [t_k, t_{k+1}], so q_{k+1} = q_k + v_k dt holds
/// exactly on the grid; v[n-1] is the instantaneous rate at T.
struct InventoryPath {
    std::vector<double> t;
    std::vector<double> q;
    std::vector<double> v;  // trading rate, shares/day
};

inline double theta_eval(const AcCoeffTable& table, double t, double q, double beta) {
    const auto c = table.at(t);
    return c[0] + 0.5 * c[1] * beta * beta + c[2] * beta * q + 0.5 * c[3] * q * q +
           c[4] * beta + c[5] * q;
}

inline double dq_theta(const AcCoeffTable& table, double t, double q, double beta) {
    const auto c = table.at(t);
    return c[2] * beta + c[3] * q + c[5];
}

/// Value function u(t,x,q,S,beta) = -exp(-gamma (x + qS - theta(t,q,beta))).
inline double value_eval(const AcCoeffTable& table, double gamma, double t, double x, double q,
                         double S, double beta) {
    return -std::exp(-gamma * (x + q * S - theta_eval(table, t, q, beta)));
}

/// Forward integration of q*'(t) = -(V_t / 2 eta) d_q theta(t, q*, beta_t)
/// on the beta path's grid.
inline InventoryPath optimal_inventory(const AcCoeffTable& table, const BetaPath& beta_path,
                                       double q0, const ExecutionSpec& spec,
                                       ode::Scheme scheme = ode::Scheme::Rk4) {
    spec.validate();
    if (beta_path.t.size() < 2) throw DomainError("optimal_inventory: beta path too short");
    if (std::fabs(beta_path.t.back() - table.horizon()) > 1e-9 * (1.0 + table.horizon()))
        throw DomainError("optimal_inventory: beta path horizon does not match the table");
    auto rate = [&](double t, double q) {
        return -spec.volume.at(t) / (2.0 * spec.eta) * dq_theta(table, t, q, beta_path.at(t));
    };
    const std::size_t n = beta_path.t.size();
    InventoryPath path;
    path.t = beta_path.t;
    path.q.resize(n);
    path.v.resize(n);
    double q = q0;
    path.q[0] = q;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = path.t[k + 1] - path.t[k];
        q = ode::step(rate, path.t[k], q, h, scheme);
        path.q[k + 1] = q;
        path.v[k] = (path.q[k + 1] - path.q[k]) / h;
    }
    path.v[n - 1] = rate(path.t[n - 1], q);
    return path;
}

}  // namespace bpc::ac
