#pragma once

// Riccati-based suboptimal state-feedback synthesis with bisection on the performance level.
//
//   x' = A x + B1 d + B2 u,  z = [C1 x; u]
//   A^T P + P A - P (B2 B2^T - B1 B1^T / g^2) P + C1^T C1 = 0,  K = -B2^T P

#include <optional>

#include "hinfcf/sysmodel.hpp"

namespace hinfcf {

struct AreProblem {
    Matrix A;
    Matrix B1;
    Matrix B2;
    Matrix C1;

    void validate() const {
        require_square(A, "AreProblem: A");
        if (B1.rows() != A.rows() || B2.rows() != A.rows() || C1.cols() != A.cols()) {
            throw Error(Errc::dimension, "AreProblem: inconsistent dimensions");
        }
        require_finite(A, "AreProblem: A");
        require_finite(B1, "AreProblem: B1");
        require_finite(B2, "AreProblem: B2");
        require_finite(C1, "AreProblem: C1");
    }
};

/// The problem solved in closed form by descriptor_gain: E x' = A x + B u + w, z = [x; u].
inline AreProblem are_problem_from(const DescriptorPlant& p) {
    Eigen::PartialPivLU<Matrix> lu(p.E());
    const auto n = p.states();
    return {lu.solve(p.A()), lu.solve(Matrix::Identity(n, n)), lu.solve(p.B()), Matrix::Identity(n, n)};
}

/// PBH test on the closed right half-plane eigenvalues of A.
inline bool stabilizable(const Matrix& a, const Matrix& b) {
    const auto n = a.rows();
    const double scale = std::max(1.0, spectral_norm(a) + spectral_norm(b));
    for (const auto& lambda : eigenvalues(a)) {
        if (lambda.real() < 0.0) continue;
        CMatrix pbh(n, n + b.cols());
        pbh << a.cast<Complex>() - lambda * CMatrix::Identity(n, n), b.cast<Complex>();
        Eigen::JacobiSVD<CMatrix> svd(pbh);
        if (svd.singularValues()(n - 1) <= 1e-10 * scale) {
            return false;
        }
    }
    return true;
}

struct AreSolution {
    Matrix P;
    Matrix K;
    double residual = 0.0;
};

namespace detail {

/// Matrix sign function by the Newton iteration with determinant scaling.
inline std::optional<Matrix> matrix_sign(Matrix z) {
    const auto n = z.rows();
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::PartialPivLU<Matrix> lu(z);
        const Matrix zi = lu.inverse();
        if (!zi.allFinite()) {
            return std::nullopt;
        }
        const double logdet = lu.matrixLU().diagonal().array().abs().log().sum();
        const double c = std::exp(-logdet / static_cast<double>(n));
        const Matrix next = 0.5 * (c * z + zi / c);
        const double change = (next - z).norm();
        z = next;
        if (change <= 1e-13 * z.norm()) {
            return z;
        }
    }
    return z;
}

}  // namespace detail

/// Stabilizing solution of the level-g Riccati equation, or nothing when g is infeasible
/// (Hamiltonian eigenvalues within 1e-9 of the imaginary axis count as infeasible).
inline std::optional<AreSolution> are_feasible(const AreProblem& p, double gamma) {
    p.validate();
    if (!(gamma > 0.0)) {
        throw Error(Errc::invalid_parameter, "are_feasible: gamma must be positive");
    }
    const auto n = p.A.rows();
    const Matrix r = p.B2 * p.B2.transpose() - (p.B1 * p.B1.transpose()) / (gamma * gamma);
    const Matrix q = p.C1.transpose() * p.C1;
    Matrix h(2 * n, 2 * n);
    h << p.A, -r, -q, -p.A.transpose();
    const double hscale = std::max(1.0, spectral_norm(h));
    for (const auto& ev : eigenvalues(h)) {
        if (std::abs(ev.real()) <= 1e-9 * hscale) {
            return std::nullopt;
        }
    }
    const auto sign = detail::matrix_sign(h);
    if (!sign) {
        return std::nullopt;
    }
    // Stable subspace [I; P] lies in ker(S + I): [S12; S22 + I] P = -[S11 + I; S21].
    const Matrix s = *sign + Matrix::Identity(2 * n, 2 * n);
    Matrix lhs(2 * n, n);
    lhs << s.topRightCorner(n, n), s.bottomRightCorner(n, n);
    Matrix rhs(2 * n, n);
    rhs << s.topLeftCorner(n, n), s.bottomLeftCorner(n, n);
    Eigen::ColPivHouseholderQR<Matrix> qr(lhs);
    if (qr.rank() < n) {
        return std::nullopt;
    }
    Matrix pm = qr.solve(Matrix(-rhs));
    pm = 0.5 * (pm + pm.transpose());
    if (!pm.allFinite()) {
        return std::nullopt;
    }
    const double pnorm = spectral_norm(pm);
    if (min_symmetric_eigenvalue(pm) < -1e-8 * std::max(1.0, pnorm)) {
        return std::nullopt;
    }
    const Matrix res = p.A.transpose() * pm + pm * p.A - pm * r * pm + q;
    const double resid = spectral_norm(res);
    const double rscale = std::max(1.0, spectral_norm(q) + 2.0 * spectral_norm(p.A) * pnorm + spectral_norm(r) * pnorm * pnorm);
    if (resid > 1e-8 * rscale) {
        return std::nullopt;
    }
    if (spectral_abscissa(eigenvalues(Matrix(p.A - r * pm))) >= 0.0 ||
        spectral_abscissa(eigenvalues(Matrix(p.A - p.B2 * p.B2.transpose() * pm))) >= 0.0) {
        return std::nullopt;
    }
    return AreSolution{pm, -p.B2.transpose() * pm, resid};
}

struct BisectionResult {
    double gamma = 0.0;
    Matrix K;
    Matrix P;
    int iterations = 0;
};

/// Smallest feasible level to relative tolerance `tol`; returns the last feasible gain.
inline BisectionResult gamma_bisect(const AreProblem& p, double tol = 1e-6) {
    p.validate();
    if (!stabilizable(p.A, p.B2)) {
        throw Error(Errc::unstabilizable, "gamma_bisect: (A, B2) is not stabilizable");
    }
    double hi = 1.0;
    std::optional<AreSolution> best = are_feasible(p, hi);
    while (!best) {
        hi *= 2.0;
        if (hi > 1e6) {
            throw Error(Errc::unstabilizable, "gamma_bisect: no feasible level below 1e6");
        }
        best = are_feasible(p, hi);
    }
    double lo = hi / 2.0;
    int iterations = 0;
    while (lo > 1e-12) {
        auto sol = are_feasible(p, lo);
        if (!sol) break;
        hi = lo;
        best = std::move(sol);
        lo /= 2.0;
    }
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (auto sol = are_feasible(p, mid)) {
            hi = mid;
            best = std::move(sol);
        } else {
            lo = mid;
        }
        ++iterations;
    }
    return {hi, best->K, best->P, iterations};
}

}  // namespace hinfcf
