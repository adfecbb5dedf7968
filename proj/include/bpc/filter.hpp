#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "bpc/errors.hpp"
#include "bpc/matrix_kernel.hpp"

// Conjugate Gaussian updating of the unknown drift mu from observed prices.
// The posterior depends only on (t, S_t), so observations are passed as
// sufficient statistics (log-return or price change at time t).

namespace bpc::filter {

using bpc::Matrix;
using bpc::Vector;

/// Gaussian prior mu ~ N(beta0, nu0^2), one asset.
struct PriorBelief1D {
    double beta0 = 0.0;
    double nu0_sq = 0.0;

    PriorBelief1D() = default;
    PriorBelief1D(double beta0_, double nu0_sq_) : beta0(beta0_), nu0_sq(nu0_sq_) {
        if (!std::isfinite(beta0) || !std::isfinite(nu0_sq))
            throw DomainError("PriorBelief1D: non-finite parameters");
        if (nu0_sq <= 0.0) throw DomainError("PriorBelief1D: nu0_sq must be > 0");
    }
};

/// Gaussian prior mu ~ N(beta0, Gamma0), d assets.
struct PriorBeliefND {
    Vector beta0;
    Matrix Gamma0;

    PriorBeliefND() = default;
    PriorBeliefND(Vector beta0_, Matrix Gamma0_)
        : beta0(std::move(beta0_)), Gamma0(bpc::symmetrized(Gamma0_)) {
        if (!beta0.allFinite()) throw DomainError("PriorBeliefND: non-finite beta0");
        if (beta0.size() != Gamma0.rows())
            throw DomainError("PriorBeliefND: beta0/Gamma0 dimension mismatch");
        bpc::check_spd(Gamma0, "PriorBeliefND.Gamma0");
    }

    int dim() const { return static_cast<int>(beta0.size()); }
};

/// Posterior belief at time t. Scalar problems fill beta/var/g, vector
/// problems fill beta_vec/Gamma.
struct PosteriorState {
    double t = 0.0;
    double beta = 0.0;
    double var = 0.0;   // nu_t^2
    double g = 0.0;     // learning gain g(t)
    Vector beta_vec;
    Matrix Gamma;
};

/// Learning gain g(t) = nu0^2 / (sigma^2 + nu0^2 t).
inline double learning_gain(const PriorBelief1D& prior, double sigma, double t) {
    return prior.nu0_sq / (sigma * sigma + prior.nu0_sq * t);
}

inline void check_scalar_inputs(double sigma, double t, double obs, const char* who) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw DomainError(std::string(who) + ": sigma must be finite and > 0");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError(std::string(who) + ": t must be finite and >= 0");
    if (!std::isfinite(obs)) throw DomainError(std::string(who) + ": non-finite observation");
}

/// Posterior under log-normal dynamics from the observed log-return
/// log(S_t/S_0). Internally uses y = log(S_t/S_0) + sigma^2 t / 2.
inline PosteriorState posterior_lognormal_1d(const PriorBelief1D& prior, double sigma,
                                             double t, double log_return) {
    check_scalar_inputs(sigma, t, log_return, "posterior_lognormal_1d");
    const double s2 = sigma * sigma;
    const double denom = s2 + prior.nu0_sq * t;
    const double y = log_return + 0.5 * s2 * t;
    PosteriorState p;
    p.t = t;
    p.beta = (s2 * prior.beta0 + prior.nu0_sq * y) / denom;
    p.var = s2 * prior.nu0_sq / denom;
    p.g = prior.nu0_sq / denom;
    return p;
}

/// Posterior under Bachelier dynamics from the observed price change S_t - S_0.
inline PosteriorState posterior_bachelier_1d(const PriorBelief1D& prior, double sigma,
                                             double t, double price_change) {
    check_scalar_inputs(sigma, t, price_change, "posterior_bachelier_1d");
    const double s2 = sigma * sigma;
    const double denom = s2 + prior.nu0_sq * t;
    PosteriorState p;
    p.t = t;
    p.beta = (s2 * prior.beta0 + prior.nu0_sq * price_change) / denom;
    p.var = s2 * prior.nu0_sq / denom;
    p.g = prior.nu0_sq / denom;
    return p;
}

/// Multi-asset posterior: Gamma_t = (Gamma0^-1 + t Sigma^-1)^-1 and
/// beta_t = Gamma_t (Gamma0^-1 beta0 + Sigma^-1 (log(S_t/S_0) + diag(Sigma) t / 2)).
inline PosteriorState posterior_lognormal_nd(const PriorBeliefND& prior, const Matrix& Sigma_in,
                                             double t, const Vector& log_returns) {
    const Matrix Sigma = bpc::symmetrized(Sigma_in);
    if (Sigma.rows() != prior.dim() || log_returns.size() != prior.dim())
        throw DomainError("posterior_lognormal_nd: dimension mismatch");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError("posterior_lognormal_nd: t must be finite and >= 0");
    if (!log_returns.allFinite())
        throw DomainError("posterior_lognormal_nd: non-finite observation");
    const Matrix Sigma_inv = bpc::invert_spd(Sigma);
    const Matrix Gamma0_inv = bpc::invert_spd(prior.Gamma0);
    const Vector y = log_returns + 0.5 * t * Sigma.diagonal();
    PosteriorState p;
    p.t = t;
    p.Gamma = bpc::invert_spd(Gamma0_inv + t * Sigma_inv);
    p.beta_vec = p.Gamma * (Gamma0_inv * prior.beta0 + Sigma_inv * y);
    if (!p.beta_vec.allFinite())
        throw DomainError("posterior_lognormal_nd: non-finite posterior mean");
    return p;
}

/// Posterior covariance at time t (shared by log-normal and Bachelier).
inline Matrix posterior_covariance_nd(const PriorBeliefND& prior, const Matrix& Sigma, double t) {
    return bpc::invert_spd(bpc::invert_spd(prior.Gamma0) + t * bpc::invert_spd(Sigma));
}

/// Increments of the innovation Brownian motion W_hat recovered from a price
/// path on a uniform grid: W_hat_t = (log(S_t/S_0) + sigma^2 t/2)/sigma
/// - \int beta_s / sigma ds, with the integral taken by the left rule.
inline std::vector<double> innovation_increments(const std::vector<double>& times,
                                                 const std::vector<double>& prices,
                                                 const std::vector<double>& betas,
                                                 double sigma) {
    if (times.size() != prices.size() || times.size() != betas.size() || times.size() < 2)
        throw DomainError("innovation_increments: inconsistent input sizes");
    if (!(sigma > 0.0)) throw DomainError("innovation_increments: sigma must be > 0");
    std::vector<double> inc(times.size() - 1);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double dt = times[k + 1] - times[k];
        const double dlog = std::log(prices[k + 1] / prices[k]);
        inc[k] = (dlog + 0.5 * sigma * sigma * dt) / sigma - betas[k] / sigma * dt;
    }
    return inc;
}

}  // namespace bpc::filter
