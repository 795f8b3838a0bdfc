#pragma once

// Dense linear algebra and polynomial helpers shared by every other header.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hinfcf/error.hpp"

namespace hinfcf {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr Complex kJ{0.0, 1.0};

template<typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* who) {
    if (!m.allFinite()) {
        throw Error(Errc::invalid_input, std::string(who) + ": non-finite matrix entry");
    }
}

template<typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* who) {
    if (m.rows() != m.cols()) {
        throw Error(Errc::dimension, std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                                         std::to_string(m.cols()) + ", expected square");
    }
}

/// Largest singular value. Zero for empty matrices.
template<typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
    require_finite(m, "spectral_norm");
    if (m.size() == 0) {
        return 0.0;
    }
    using Plain = typename Derived::PlainObject;
    Eigen::BDCSVD<Plain> svd(m.eval());
    return svd.singularValues()(0);
}

/// Smallest singular value (of the min(rows, cols) computed ones).
template<typename Derived>
double smallest_singular_value(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    using Plain = typename Derived::PlainObject;
    Eigen::JacobiSVD<Plain> svd(m.eval());
    return svd.singularValues()(svd.singularValues().size() - 1);
}

/// sigma_min / sigma_max; 0 for a singular or empty matrix.
template<typename Derived>
double reciprocal_condition(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    using Plain = typename Derived::PlainObject;
    Eigen::JacobiSVD<Plain> svd(m.eval());
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) {
        return 0.0;
    }
    return s(s.size() - 1) / s(0);
}

inline std::vector<Complex> eigenvalues(const Matrix& m) {
    require_square(m, "eigenvalues");
    require_finite(m, "eigenvalues");
    if (m.size() == 0) {
        return {};
    }
    Eigen::EigenSolver<Matrix> solver(m, false);
    if (solver.info() != Eigen::Success) {
        throw Error(Errc::internal, "eigenvalues: real Schur iteration did not converge");
    }
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

inline std::vector<Complex> eigenvalues(const CMatrix& m) {
    require_square(m, "eigenvalues");
    require_finite(m, "eigenvalues");
    if (m.size() == 0) {
        return {};
    }
    Eigen::ComplexEigenSolver<CMatrix> solver(m, false);
    if (solver.info() != Eigen::Success) {
        throw Error(Errc::internal, "eigenvalues: complex Schur iteration did not converge");
    }
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

/// Orders eigenvalues by real part, then imaginary part. Callers sort; the solvers do not.
inline void sort_by_real_then_imag(std::vector<Complex>& values) {
    std::sort(values.begin(), values.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) {
            return a.real() < b.real();
        }
        return a.imag() < b.imag();
    });
}

inline double spectral_abscissa(const std::vector<Complex>& values) {
    double out = -std::numeric_limits<double>::infinity();
    for (const auto& v : values) {
        out = std::max(out, v.real());
    }
    return out;
}

namespace detail {
inline constexpr double kReductionCondLimit = 1e8;
inline constexpr double kSingularPencilRcond = 1e-14;
}  // namespace detail

/// Roots of det(lambda*e - a). Uses e^{-1}a while cond(e) < 1e8, QZ otherwise.
inline std::vector<Complex> generalized_eigenvalues(const Matrix& a, const Matrix& e) {
    require_square(a, "generalized_eigenvalues");
    require_square(e, "generalized_eigenvalues");
    if (a.rows() != e.rows()) {
        throw Error(Errc::dimension, "generalized_eigenvalues: a and e differ in size");
    }
    require_finite(a, "generalized_eigenvalues");
    require_finite(e, "generalized_eigenvalues");
    if (a.size() == 0) {
        return {};
    }
    const double rcond = reciprocal_condition(e);
    if (rcond < detail::kSingularPencilRcond) {
        throw Error(Errc::singular_pencil,
                    "generalized_eigenvalues: e is singular (reciprocal condition " + std::to_string(rcond) + ")");
    }
    if (1.0 / rcond < detail::kReductionCondLimit) {
        return eigenvalues(Matrix(e.partialPivLu().solve(a)));
    }
    Eigen::GeneralizedEigenSolver<Matrix> qz(a, e, false);
    if (qz.info() != Eigen::Success) {
        throw Error(Errc::internal, "generalized_eigenvalues: QZ iteration did not converge");
    }
    const Eigen::VectorXcd alphas = qz.alphas();
    const Eigen::VectorXd betas = qz.betas();
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(alphas.size()));
    for (Eigen::Index i = 0; i < alphas.size(); ++i) {
        out.push_back(alphas(i) / betas(i));
    }
    return out;
}

inline std::vector<Complex> generalized_eigenvalues(const CMatrix& a, const CMatrix& e) {
    require_square(a, "generalized_eigenvalues");
    require_square(e, "generalized_eigenvalues");
    if (a.rows() != e.rows()) {
        throw Error(Errc::dimension, "generalized_eigenvalues: a and e differ in size");
    }
    if (a.size() == 0) {
        return {};
    }
    const double rcond = reciprocal_condition(e);
    if (rcond < detail::kSingularPencilRcond) {
        throw Error(Errc::singular_pencil,
                    "generalized_eigenvalues: e is singular (reciprocal condition " + std::to_string(rcond) + ")");
    }
    // No complex QZ in Eigen; every complex pencil in this library has a well-conditioned e.
    return eigenvalues(CMatrix(e.partialPivLu().solve(a)));
}

/// Moore-Penrose pseudoinverse via SVD. Singular values below 1e-12 * sigma_max count as zero.
template<typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pseudoinverse(
    const Eigen::MatrixBase<Derived>& m) {
    using Plain = typename Derived::PlainObject;
    using Result = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    require_finite(m, "pseudoinverse");
    Result out = Result::Zero(m.cols(), m.rows());
    if (m.size() == 0) {
        return out;
    }
    Eigen::JacobiSVD<Plain> svd(m.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double cutoff = 1e-12 * s(0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff && s(i) > 0.0) {
            out += svd.matrixV().col(i) * (1.0 / s(i)) * svd.matrixU().col(i).adjoint();
        }
    }
    return out;
}

/// Hermitian part (m + m*)/2, used before self-adjoint eigensolves.
inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

inline double min_hermitian_eigenvalue(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

inline double min_symmetric_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver((m + m.transpose()) * 0.5, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

// ---------------------------------------------------------------------------
// Polynomials and rational functions

/// Real polynomial with ascending coefficients. Trailing (leading-degree) zeros are trimmed,
/// so the leading coefficient is nonzero unless the polynomial is zero.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) { trim(); }
    explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    static Polynomial constant(double c) { return Polynomial(std::vector<double>{c}); }
    static Polynomial monomial(int degree, double c = 1.0) {
        std::vector<double> v(static_cast<std::size_t>(degree) + 1, 0.0);
        v.back() = c;
        return Polynomial(std::move(v));
    }

    const std::vector<double>& coefficients() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }
    /// Degree; -1 for the zero polynomial.
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_constant() const { return coeffs_.size() <= 1; }

    Complex operator()(Complex s) const {
        Complex acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * s + *it;
        }
        return acc;
    }

    /// Sum of |c_i| |s|^i; scale against which an evaluation is judged to vanish.
    double magnitude_bound(Complex s) const {
        double acc = 0.0;
        const double r = std::abs(s);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * r + std::abs(*it);
        }
        return acc;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> v(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) v[i] += a.coeffs_[i];
        for (std::size_t i = 0; i < b.coeffs_.size(); ++i) v[i] += b.coeffs_[i];
        return Polynomial(std::move(v));
    }
    friend Polynomial operator-(const Polynomial& a) {
        std::vector<double> v = a.coeffs_;
        for (auto& c : v) c = -c;
        return Polynomial(std::move(v));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) {
            return {};
        }
        std::vector<double> v(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
                v[i + j] += a.coeffs_[i] * b.coeffs_[j];
            }
        }
        return Polynomial(std::move(v));
    }
    friend Polynomial operator*(double c, const Polynomial& a) {
        std::vector<double> v = a.coeffs_;
        for (auto& x : v) x *= c;
        return Polynomial(std::move(v));
    }
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == 0.0) {
            coeffs_.pop_back();
        }
    }

    std::vector<double> coeffs_;
};

inline constexpr int kPolynomialRootDegreeCap = 50;

/// Roots via companion-matrix eigenvalues. Leading coefficients negligible against the
/// largest one (1e-14 relative) are dropped first.
inline std::vector<Complex> roots(const Polynomial& p) {
    if (p.is_zero()) {
        throw Error(Errc::invalid_input, "roots: zero polynomial");
    }
    std::vector<double> c = p.coefficients();
    double cmax = 0.0;
    for (double x : c) cmax = std::max(cmax, std::abs(x));
    while (c.size() > 1 && std::abs(c.back()) <= 1e-14 * cmax) {
        c.pop_back();
    }
    const int n = static_cast<int>(c.size()) - 1;
    if (n > kPolynomialRootDegreeCap) {
        throw Error(Errc::degree_cap, "roots: degree " + std::to_string(n) + " exceeds cap " +
                                          std::to_string(kPolynomialRootDegreeCap));
    }
    if (n <= 0) {
        return {};
    }
    Matrix companion = Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        companion(i, i - 1) = 1.0;
    }
    for (int i = 0; i < n; ++i) {
        companion(i, n - 1) = -c[static_cast<std::size_t>(i)] / c.back();
    }
    return eigenvalues(companion);
}

/// num/den pair. The denominator must not be the zero polynomial.
struct RationalFunction {
    Polynomial num;
    Polynomial den = Polynomial::constant(1.0);

    static RationalFunction constant(double c) { return {Polynomial::constant(c), Polynomial::constant(1.0)}; }
};

inline Complex rational_eval(const Polynomial& num, const Polynomial& den, Complex s) {
    const Complex d = den(s);
    if (den.is_zero() || std::abs(d) <= 1e-14 * den.magnitude_bound(s)) {
        throw Error(Errc::pole_at_point, "rational_eval: denominator vanishes at s = (" + std::to_string(s.real()) +
                                             ", " + std::to_string(s.imag()) + ")");
    }
    return num(s) / d;
}

inline Complex rational_eval(const RationalFunction& f, Complex s) { return rational_eval(f.num, f.den, s); }

inline RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    if (a.den == b.den) {
        return {a.num + b.num, a.den};
    }
    if (a.num.is_zero()) return b;
    if (b.num.is_zero()) return a;
    return {a.num * b.den + b.num * a.den, a.den * b.den};
}

inline RationalFunction operator-(const RationalFunction& a) { return {-a.num, a.den}; }
inline RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return a + (-b); }
inline RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    return {a.num * b.num, a.den * b.den};
}
inline RationalFunction operator*(double c, const RationalFunction& a) { return {c * a.num, a.den}; }

}  // namespace hinfcf
