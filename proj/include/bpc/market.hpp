#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "bpc/errors.hpp"
#include "bpc/matrix_kernel.hpp"

namespace bpc {

enum class Dynamics { LogNormal, Bachelier };

/// Asset dynamics: per-asset volatilities, correlation, risk-free rate,
/// initial prices. Time unit is days throughout.
struct MarketModel {
    Dynamics kind = Dynamics::LogNormal;
    Vector sigma;      // per-asset volatility, > 0
    Matrix corr;       // correlation matrix (identity if empty)
    double r = 0.0;    // risk-free rate, day^-1
    Vector s0;         // initial prices

    static MarketModel one_asset(Dynamics kind, double sigma, double r, double s0) {
        MarketModel m;
        m.kind = kind;
        m.sigma = Vector::Constant(1, sigma);
        m.corr = Matrix::Identity(1, 1);
        m.r = r;
        m.s0 = Vector::Constant(1, s0);
        m.validate();
        return m;
    }

    int dim() const { return static_cast<int>(sigma.size()); }

    double sigma1() const {
        if (dim() != 1) throw DomainError("MarketModel: scalar sigma requested for d > 1");
        return sigma(0);
    }

    /// Covariance Sigma_ij = rho_ij sigma_i sigma_j.
    Matrix covariance() const {
        const Matrix c = corr.size() ? corr : Matrix::Identity(dim(), dim());
        return sigma.asDiagonal() * c * sigma.asDiagonal();
    }

    void validate() const {
        if (sigma.size() == 0) throw DomainError("MarketModel: empty sigma");
        if (!sigma.allFinite() || sigma.minCoeff() <= 0.0)
            throw DomainError("MarketModel: sigma must be finite and > 0");
        if (!std::isfinite(r)) throw DomainError("MarketModel: non-finite r");
        if (s0.size() != sigma.size()) throw DomainError("MarketModel: s0/sigma size mismatch");
        if (kind == Dynamics::LogNormal && s0.minCoeff() <= 0.0)
            throw DomainError("MarketModel: log-normal dynamics require positive prices");
        if (corr.size()) check_spd(corr, "MarketModel.corr");
    }
};

}  // namespace bpc
