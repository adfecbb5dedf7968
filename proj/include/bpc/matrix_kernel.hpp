#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>

#include "bpc/errors.hpp"

// Small dense symmetric-matrix algebra used by the multi-asset formulas:
// SPD inversion, matrix square root, lowest eigenvalue, and Simpson
// quadrature of matrix-trace integrands. Dimensions are small (d <~ 50).

namespace bpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

// Index of the first nonpositive Cholesky pivot, or -1 if the
// factorization completes.
inline int first_bad_pivot(const Matrix& m) {
    const int n = static_cast<int>(m.rows());
    Matrix l = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double s = m(j, j) - l.row(j).head(j).squaredNorm();
        if (!(s > 0.0)) return j;
        l(j, j) = std::sqrt(s);
        for (int i = j + 1; i < n; ++i) {
            l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
        }
    }
    return -1;
}

}  // namespace detail

/// Symmetrize on construction; asymmetry beyond `tol` is a caller bug.
inline Matrix symmetrized(const Matrix& m, double tol = 1e-8) {
    if (m.rows() != m.cols()) throw DomainError("symmetrized: matrix is not square");
    if (!m.allFinite()) throw DomainError("symmetrized: non-finite entries");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol) {
        throw DomainError("symmetrized: asymmetry norm " + std::to_string(asym) +
                          " exceeds tolerance");
    }
    return 0.5 * (m + m.transpose());
}

constexpr double kSpdConditionLimit = 1e12;

inline void check_spd(const Matrix& m, const char* who) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) {
        const int pivot = detail::first_bad_pivot(m);
        throw DomainError(std::string(who) + ": matrix is not positive definite (Cholesky pivot " +
                          std::to_string(pivot) + " failed)");
    }
    if (hi / lo > kSpdConditionLimit) {
        throw DomainError(std::string(who) + ": condition number " + std::to_string(hi / lo) +
                          " exceeds 1e12");
    }
}

/// Inverse of an SPD matrix via Cholesky.
inline Matrix invert_spd(const Matrix& m_in) {
    const Matrix m = symmetrized(m_in);
    check_spd(m, "invert_spd");
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        const int pivot = detail::first_bad_pivot(m);
        throw DomainError("invert_spd: Cholesky pivot " + std::to_string(pivot) + " failed");
    }
    Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

/// Principal square root of an SPD matrix.
inline Matrix sqrt_spd(const Matrix& m_in) {
    const Matrix m = symmetrized(m_in);
    check_spd(m, "sqrt_spd");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Matrix root = es.eigenvectors() *
                  es.eigenvalues().cwiseSqrt().asDiagonal() *
                  es.eigenvectors().transpose();
    return 0.5 * (root + root.transpose());
}

/// Smallest eigenvalue of a symmetric matrix.
inline double lambda_min(const Matrix& m_in) {
    const Matrix m = symmetrized(m_in);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Composite Simpson approximation of \int_{t_lo}^{t_hi} Tr(f(s)) ds.
inline double trace_quadrature(const std::function<Matrix(double)>& f, double t_lo,
                               double t_hi, int panels = 1000) {
    if (t_hi < t_lo) throw DomainError("trace_quadrature: t_hi < t_lo");
    if (panels < 1) throw DomainError("trace_quadrature: panels < 1");
    if (t_hi == t_lo) return 0.0;
    const double h = (t_hi - t_lo) / panels;
    // Per-panel Simpson: (h/6) (f(x) + 4 f(x+h/2) + f(x+h)), exact for cubics.
    // Kahan-compensated accumulation: thousands of same-sign terms would
    // otherwise leave a roundoff floor above the truncation error.
    double acc = 0.0, comp = 0.0;
    const auto add = [&](double term) {
        const double y = term - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    };
    add(f(t_lo).trace());
    add(f(t_hi).trace());
    for (int k = 1; k < panels; ++k) add(2.0 * f(t_lo + k * h).trace());
    for (int k = 0; k < panels; ++k) add(4.0 * f(t_lo + (k + 0.5) * h).trace());
    return acc * h / 6.0;
}

}  // namespace bpc
