#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "bpc/errors.hpp"
#include "bpc/filter.hpp"
#include "bpc/market.hpp"
#include "bpc/matrix_kernel.hpp"

// Closed-form optimal strategies and value functions for the frictionless
// problems: CARA and CRRA (incl. log) utilities, 1 and d risky assets.

namespace bpc::merton {

using bpc::Matrix;
using bpc::Vector;
using filter::PriorBelief1D;
using filter::PriorBeliefND;

struct UtilitySpec {
    enum class Kind { Cara, Crra, Log };
    Kind kind = Kind::Cara;
    double gamma = 0.0;  // CARA: absolute (currency^-1); CRRA: relative
    double T = 0.0;      // horizon, days
    // CRRA gamma < 1 blows up in finite time; require an explicit opt-in.
    bool acknowledge_blowup = false;

    static UtilitySpec cara(double gamma, double T) {
        UtilitySpec u{Kind::Cara, gamma, T, false};
        u.validate();
        return u;
    }
    static UtilitySpec crra(double gamma, double T, bool acknowledge_blowup = false) {
        UtilitySpec u{Kind::Crra, gamma, T, acknowledge_blowup};
        u.validate();
        return u;
    }
    static UtilitySpec log_utility(double T) {
        UtilitySpec u{Kind::Log, 1.0, T, false};
        u.validate();
        return u;
    }

    /// Log utility is CRRA with gamma = 1; route near-1 gammas there too.
    bool is_log() const {
        return kind == Kind::Log || (kind == Kind::Crra && std::fabs(gamma - 1.0) <= 1e-12);
    }

    void validate() const {
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw DomainError("UtilitySpec: gamma must be finite and > 0");
        if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("UtilitySpec: T must be > 0");
    }
};

/// Value-function coefficients phi(t,beta) = a(t) + b(t)(beta-r)^2/2.
struct Coeffs1D {
    double t = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// Multi-asset analogue: phi(t,beta) = a(t) + (beta-r1)' B(t) (beta-r1)/2.
struct CoeffsND {
    double t = 0.0;
    double a = 0.0;
    Matrix B;
};

/// Interval on which the CRRA value function is finite.
struct BlowupDomain {
    double t_tilde = 0.0;  // may be negative
    double T = 0.0;
    bool blows_up_in_horizon() const { return t_tilde >= 0.0; }
    /// Left end of the valid interval, clamped to [0,T]; open when t_tilde >= 0.
    double valid_from() const { return std::max(t_tilde, 0.0); }
    bool contains(double t) const {
        return t <= T && (t_tilde < 0.0 ? t >= 0.0 : t > t_tilde);
    }
};

namespace detail {

inline void check_time(double t, double T, const char* who) {
    if (!(t >= 0.0) || !(t <= T) || !std::isfinite(t))
        throw DomainError(std::string(who) + ": t outside [0,T]");
}

inline void require_cara(const UtilitySpec& u, const char* who) {
    if (u.kind != UtilitySpec::Kind::Cara)
        throw DomainError(std::string(who) + ": CARA utility required");
}

inline void gate_crra(const UtilitySpec& u, const BlowupDomain& dom, double t, const char* who) {
    if (u.is_log()) return;
    if (u.gamma < 1.0 && !u.acknowledge_blowup)
        throw DomainError(std::string(who) +
                          ": CRRA gamma < 1 blows up in finite time; set acknowledge_blowup");
    if (!dom.contains(t))
        throw BlowupError(std::string(who) + ": value function is infinite for t <= t_tilde = " +
                              std::to_string(dom.t_tilde),
                          dom.t_tilde);
}

inline Matrix gamma_t(const PriorBeliefND& prior, const Matrix& Sigma, double t) {
    return bpc::invert_spd(bpc::invert_spd(prior.Gamma0) + t * bpc::invert_spd(Sigma));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One risky asset, CARA
// ---------------------------------------------------------------------------

inline Coeffs1D cara_coeffs_1d(double t, const MarketModel& market, const UtilitySpec& utility,
                               const PriorBelief1D& prior) {
    detail::require_cara(utility, "cara_coeffs_1d");
    detail::check_time(t, utility.T, "cara_coeffs_1d");
    const double sigma = market.sigma1();
    const double gt = filter::learning_gain(prior, sigma, t);
    const double gT = filter::learning_gain(prior, sigma, utility.T);
    Coeffs1D c;
    c.t = t;
    // a = (log(g_t/g_T) - (T - t) g_T) / (2 gamma). Written via
    // x = (T - t) g_t so the two nearly equal terms share one rounding:
    // g_t/g_T = 1 + x and (T - t) g_T = x / (1 + x). The 1/gamma factor
    // amplifies any cancellation error by several orders of magnitude.
    const double x = (utility.T - t) * gt;
    c.a = (std::log1p(x) - x / (1.0 + x)) / (2.0 * utility.gamma);
    c.b = (utility.T - t) * gT / (utility.gamma * sigma * sigma * gt);
    return c;
}

/// Learning-anticipation multiplier chi(t) = g(T)/g(t), CARA case.
inline double cara_multiplier_1d(double t, const MarketModel& market, const UtilitySpec& utility,
                                 const PriorBelief1D& prior) {
    const double sigma = market.sigma1();
    return filter::learning_gain(prior, sigma, utility.T) /
           filter::learning_gain(prior, sigma, t);
}

/// Optimal amount M* = e^{-r(T-t)} (g(T)/g(t)) (beta-r)/(gamma sigma^2).
inline double cara_allocation_1d(double t, double beta, const MarketModel& market,
                                 const UtilitySpec& utility, const PriorBelief1D& prior) {
    detail::require_cara(utility, "cara_allocation_1d");
    detail::check_time(t, utility.T, "cara_allocation_1d");
    if (!std::isfinite(beta)) throw DomainError("cara_allocation_1d: non-finite beta");
    const double sigma = market.sigma1();
    return std::exp(-market.r * (utility.T - t)) *
           cara_multiplier_1d(t, market, utility, prior) * (beta - market.r) /
           (utility.gamma * sigma * sigma);
}

inline double cara_value_1d(double t, double V, double beta, const MarketModel& market,
                            const UtilitySpec& utility, const PriorBelief1D& prior) {
    const Coeffs1D c = cara_coeffs_1d(t, market, utility, prior);
    const double excess = beta - market.r;
    return -std::exp(-utility.gamma * (std::exp(market.r * (utility.T - t)) * V + c.a +
                                       0.5 * c.b * excess * excess));
}

// ---------------------------------------------------------------------------
// One risky asset, CRRA / log
// ---------------------------------------------------------------------------

inline BlowupDomain crra_blowup_1d(const MarketModel& market, const UtilitySpec& utility,
                                   const PriorBelief1D& prior) {
    const double sigma = market.sigma1();
    BlowupDomain dom;
    dom.T = utility.T;
    if (utility.is_log()) {
        dom.t_tilde = -std::numeric_limits<double>::infinity();
        return dom;
    }
    dom.t_tilde = (1.0 - utility.gamma) * utility.T -
                  utility.gamma * sigma * sigma / prior.nu0_sq;
    return dom;
}

inline Coeffs1D crra_coeffs_1d(double t, const MarketModel& market, const UtilitySpec& utility,
                               const PriorBelief1D& prior) {
    detail::check_time(t, utility.T, "crra_coeffs_1d");
    if (utility.is_log()) return Coeffs1D{t, 0.0, 0.0};
    detail::gate_crra(utility, crra_blowup_1d(market, utility, prior), t, "crra_coeffs_1d");
    const double sigma = market.sigma1();
    const double g = utility.gamma;
    const double gt = filter::learning_gain(prior, sigma, t);
    const double gT = filter::learning_gain(prior, sigma, utility.T);
    const double denom = (g - 1.0) * gt + gT;
    Coeffs1D c;
    c.t = t;
    c.a = 0.5 * g * std::log(g * gt / denom) + 0.5 * std::log(gT / gt);
    c.b = (1.0 - g) / (sigma * sigma) * (gt - gT) / (gt * denom);
    return c;
}

/// Multiplier chi(t) = gamma g(T) / ((gamma-1) g(t) + g(T)), CRRA case.
inline double crra_multiplier_1d(double t, const MarketModel& market, const UtilitySpec& utility,
                                 const PriorBelief1D& prior) {
    if (utility.is_log()) return 1.0;
    const double sigma = market.sigma1();
    const double gt = filter::learning_gain(prior, sigma, t);
    const double gT = filter::learning_gain(prior, sigma, utility.T);
    return utility.gamma * gT / ((utility.gamma - 1.0) * gt + gT);
}

/// Optimal fraction theta* of wealth in the risky asset.
inline double crra_allocation_1d(double t, double beta, const MarketModel& market,
                                 const UtilitySpec& utility, const PriorBelief1D& prior) {
    detail::check_time(t, utility.T, "crra_allocation_1d");
    if (!std::isfinite(beta)) throw DomainError("crra_allocation_1d: non-finite beta");
    const double sigma = market.sigma1();
    if (utility.is_log()) return (beta - market.r) / (sigma * sigma);
    detail::gate_crra(utility, crra_blowup_1d(market, utility, prior), t, "crra_allocation_1d");
    return (beta - market.r) / (utility.gamma * sigma * sigma) *
           crra_multiplier_1d(t, market, utility, prior);
}

inline double crra_value_1d(double t, double V, double beta, const MarketModel& market,
                            const UtilitySpec& utility, const PriorBelief1D& prior) {
    if (!(V > 0.0)) throw DomainError("crra_value_1d: wealth must be > 0");
    const double grown = std::exp(market.r * (utility.T - t)) * V;
    if (utility.is_log()) return std::log(grown);
    const Coeffs1D c = crra_coeffs_1d(t, market, utility, prior);
    const double excess = beta - market.r;
    return std::pow(grown, 1.0 - utility.gamma) / (1.0 - utility.gamma) *
           std::exp(c.a + 0.5 * c.b * excess * excess);
}

// ---------------------------------------------------------------------------
// d risky assets
// ---------------------------------------------------------------------------

inline Vector cara_allocation_nd(double t, const Vector& beta, const MarketModel& market,
                                 const UtilitySpec& utility, const PriorBeliefND& prior) {
    detail::require_cara(utility, "cara_allocation_nd");
    detail::check_time(t, utility.T, "cara_allocation_nd");
    if (beta.size() != prior.dim()) throw DomainError("cara_allocation_nd: dimension mismatch");
    const Matrix Sigma = market.covariance();
    const Matrix Gt_inv = bpc::invert_spd(detail::gamma_t(prior, Sigma, t));
    const Matrix GT = detail::gamma_t(prior, Sigma, utility.T);
    const Vector excess = beta - Vector::Constant(beta.size(), market.r);
    return std::exp(-market.r * (utility.T - t)) / utility.gamma *
           (bpc::invert_spd(Sigma) * (GT * (Gt_inv * excess)));
}

inline CoeffsND cara_coeffs_nd(double t, const MarketModel& market, const UtilitySpec& utility,
                               const PriorBeliefND& prior, int quadrature_panels = 1000) {
    detail::require_cara(utility, "cara_coeffs_nd");
    detail::check_time(t, utility.T, "cara_coeffs_nd");
    const Matrix Sigma = market.covariance();
    const Matrix Sigma_inv = bpc::invert_spd(Sigma);
    const Matrix Gt_inv = bpc::invert_spd(detail::gamma_t(prior, Sigma, t));
    const Matrix GT = detail::gamma_t(prior, Sigma, utility.T);
    CoeffsND c;
    c.t = t;
    c.B = (Gt_inv - Gt_inv * GT * Gt_inv) / utility.gamma;
    c.B = 0.5 * (c.B + c.B.transpose());
    c.a = bpc::trace_quadrature(
              [&](double s) { return Matrix(Sigma_inv * (detail::gamma_t(prior, Sigma, s) - GT)); },
              t, utility.T, quadrature_panels) /
          (2.0 * utility.gamma);
    return c;
}

inline double cara_value_nd(double t, double V, const Vector& beta, const MarketModel& market,
                            const UtilitySpec& utility, const PriorBeliefND& prior) {
    const CoeffsND c = cara_coeffs_nd(t, market, utility, prior);
    const Vector excess = beta - Vector::Constant(beta.size(), market.r);
    const double phi = c.a + 0.5 * excess.dot(c.B * excess);
    return -std::exp(-utility.gamma * (std::exp(market.r * (utility.T - t)) * V + phi));
}

inline BlowupDomain crra_blowup_nd(const MarketModel& market, const UtilitySpec& utility,
                                   const PriorBeliefND& prior) {
    BlowupDomain dom;
    dom.T = utility.T;
    if (utility.is_log()) {
        dom.t_tilde = -std::numeric_limits<double>::infinity();
        return dom;
    }
    const Matrix root = bpc::sqrt_spd(market.covariance());
    const double lam = bpc::lambda_min(root * bpc::invert_spd(prior.Gamma0) * root);
    dom.t_tilde = (1.0 - utility.gamma) * utility.T - utility.gamma * lam;
    return dom;
}

inline Vector crra_allocation_nd(double t, const Vector& beta, const MarketModel& market,
                                 const UtilitySpec& utility, const PriorBeliefND& prior) {
    detail::check_time(t, utility.T, "crra_allocation_nd");
    if (beta.size() != prior.dim()) throw DomainError("crra_allocation_nd: dimension mismatch");
    const Matrix Sigma = market.covariance();
    const Vector excess = beta - Vector::Constant(beta.size(), market.r);
    if (utility.is_log()) return bpc::invert_spd(Sigma) * excess;
    detail::gate_crra(utility, crra_blowup_nd(market, utility, prior), t, "crra_allocation_nd");
    const Matrix Gt_inv = bpc::invert_spd(detail::gamma_t(prior, Sigma, t));
    const Matrix GT_inv = bpc::invert_spd(detail::gamma_t(prior, Sigma, utility.T));
    const Matrix mix = bpc::invert_spd(Gt_inv + (utility.gamma - 1.0) * GT_inv);
    return bpc::invert_spd(Sigma) * (mix * (Gt_inv * excess));
}

inline CoeffsND crra_coeffs_nd(double t, const MarketModel& market, const UtilitySpec& utility,
                               const PriorBeliefND& prior, int quadrature_panels = 1000) {
    detail::check_time(t, utility.T, "crra_coeffs_nd");
    const int d = prior.dim();
    if (utility.is_log()) return CoeffsND{t, 0.0, Matrix::Zero(d, d)};
    detail::gate_crra(utility, crra_blowup_nd(market, utility, prior), t, "crra_coeffs_nd");
    const double g = utility.gamma;
    const Matrix Sigma = market.covariance();
    const Matrix Sigma_inv = bpc::invert_spd(Sigma);
    const Matrix Gt = detail::gamma_t(prior, Sigma, t);
    const Matrix GT_inv = bpc::invert_spd(detail::gamma_t(prior, Sigma, utility.T));
    CoeffsND c;
    c.t = t;
    c.B = -bpc::invert_spd(Gt) +
          bpc::invert_spd(Matrix(Gt / g + (1.0 - 1.0 / g) * Gt * GT_inv * Gt));
    c.B = 0.5 * (c.B + c.B.transpose());
    c.a = 0.5 * bpc::trace_quadrature(
                    [&](double s) {
                        const Matrix Gs = detail::gamma_t(prior, Sigma, s);
                        const Matrix inner =
                            bpc::invert_spd(Matrix(bpc::invert_spd(Gs) / g + (1.0 - 1.0 / g) * GT_inv));
                        return Matrix(Sigma_inv * (inner - Gs));
                    },
                    t, utility.T, quadrature_panels);
    return c;
}

inline double crra_value_nd(double t, double V, const Vector& beta, const MarketModel& market,
                            const UtilitySpec& utility, const PriorBeliefND& prior) {
    if (!(V > 0.0)) throw DomainError("crra_value_nd: wealth must be > 0");
    const double grown = std::exp(market.r * (utility.T - t)) * V;
    if (utility.is_log()) return std::log(grown);
    const CoeffsND c = crra_coeffs_nd(t, market, utility, prior);
    const Vector excess = beta - Vector::Constant(beta.size(), market.r);
    return std::pow(grown, 1.0 - utility.gamma) / (1.0 - utility.gamma) *
           std::exp(c.a + 0.5 * excess.dot(c.B * excess));
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// Plug beta_t into the known-drift formula, ignoring future learning.
inline double naive_allocation_1d(double t, double beta, const MarketModel& market,
                                  const UtilitySpec& utility) {
    const double sigma = market.sigma1();
    const double base = (beta - market.r) / (utility.gamma * sigma * sigma);
    if (utility.kind == UtilitySpec::Kind::Cara)
        return std::exp(-market.r * (utility.T - t)) * base;
    return utility.is_log() ? (beta - market.r) / (sigma * sigma) : base;
}

inline Vector naive_allocation_nd(double t, const Vector& beta, const MarketModel& market,
                                  const UtilitySpec& utility) {
    const Vector excess = beta - Vector::Constant(beta.size(), market.r);
    const Vector base = bpc::invert_spd(market.covariance()) * excess / utility.gamma;
    if (utility.kind == UtilitySpec::Kind::Cara)
        return std::exp(-market.r * (utility.T - t)) * base;
    return utility.is_log() ? Vector(utility.gamma * base) : base;
}

/// Allocation when mu is known exactly (the nu0 -> 0 limit).
inline double known_drift_allocation_1d(double t, double mu, const MarketModel& market,
                                        const UtilitySpec& utility) {
    return naive_allocation_1d(t, mu, market, utility);
}

}  // namespace bpc::merton
