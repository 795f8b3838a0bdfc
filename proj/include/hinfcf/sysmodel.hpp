#pragma once

// Plant classes, feedback gains and closed loops.
//
// A plant is M(s) y = N(s) u + w with y the measured output. Two concrete forms exist:
//   DescriptorPlant  M(s) = E s - A, N(s) = B      (state = output)
//   RationalPlant    M, N matrices of scalar rational functions
// The performance channel is z = [y; u] (or [Q y; u] with a weighting), so the closed loop
// under u = K y is [I; K] (M - N K)^{-1}.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hinfcf/grid.hpp"
#include "hinfcf/numkit.hpp"

namespace hinfcf {

inline constexpr double kInvertibleRcond = 1e-12;

class DescriptorPlant {
public:
    DescriptorPlant() = default;

    /// Throws dimension errors for inconsistent shapes and near_singular when rcond(A) < 1e-12.
    DescriptorPlant(Matrix e, Matrix a, Matrix b) : e_(std::move(e)), a_(std::move(a)), b_(std::move(b)) {
        require_square(a_, "DescriptorPlant: A");
        require_square(e_, "DescriptorPlant: E");
        if (e_.rows() != a_.rows() || b_.rows() != a_.rows()) {
            throw Error(Errc::dimension, "DescriptorPlant: E, A and B must have the same number of rows");
        }
        require_finite(e_, "DescriptorPlant: E");
        require_finite(a_, "DescriptorPlant: A");
        require_finite(b_, "DescriptorPlant: B");
        const double rc = reciprocal_condition(a_);
        if (a_.size() > 0 && rc < kInvertibleRcond) {
            throw Error(Errc::near_singular, "DescriptorPlant: A must be invertible (reciprocal condition " +
                                                 std::to_string(rc) + " < 1e-12); the gain B^T A^{-T} needs A^{-1}");
        }
    }

    /// Standard form x' = A x + B u + w (E = I).
    static DescriptorPlant standard(Matrix a, Matrix b) {
        const auto n = a.rows();
        return {Matrix::Identity(n, n), std::move(a), std::move(b)};
    }

    const Matrix& E() const { return e_; }
    const Matrix& A() const { return a_; }
    const Matrix& B() const { return b_; }
    Eigen::Index states() const { return a_.rows(); }
    Eigen::Index inputs() const { return b_.cols(); }

    /// E A^T
    Matrix F() const { return e_ * a_.transpose(); }
    /// A A^T + B B^T
    Matrix G() const { return a_ * a_.transpose() + b_ * b_.transpose(); }

    bool e_invertible() const { return reciprocal_condition(e_) >= kInvertibleRcond; }

private:
    Matrix e_;
    Matrix a_;
    Matrix b_;
};

/// Dense matrix of scalar rational functions.
class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(Eigen::Index rows, Eigen::Index cols)
        : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(rows * cols), RationalFunction::constant(0.0)) {}

    static RationalMatrix constant(const Matrix& m) {
        RationalMatrix out(m.rows(), m.cols());
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = RationalFunction::constant(m(i, j));
        return out;
    }

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

    RationalFunction& operator()(Eigen::Index i, Eigen::Index j) {
        return entries_[static_cast<std::size_t>(i * cols_ + j)];
    }
    const RationalFunction& operator()(Eigen::Index i, Eigen::Index j) const {
        return entries_[static_cast<std::size_t>(i * cols_ + j)];
    }

    CMatrix eval(Complex s) const {
        CMatrix out(rows_, cols_);
        for (Eigen::Index i = 0; i < rows_; ++i)
            for (Eigen::Index j = 0; j < cols_; ++j) out(i, j) = rational_eval((*this)(i, j), s);
        return out;
    }

    /// True when every entry is a polynomial of degree <= max_degree.
    bool is_polynomial(int max_degree) const {
        for (const auto& f : entries_) {
            if (!f.den.is_constant() || f.den.is_zero() || f.num.degree() > max_degree) {
                return false;
            }
        }
        return true;
    }

private:
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::vector<RationalFunction> entries_;
};

/// M(s) y = N(s) u + w with M p x k (full column rank on the axis) and N p x m.
class RationalPlant {
public:
    RationalPlant() = default;
    RationalPlant(RationalMatrix m, RationalMatrix n) : m_(std::move(m)), n_(std::move(n)) {
        if (m_.rows() != n_.rows()) {
            throw Error(Errc::dimension, "RationalPlant: M and N must have the same number of rows");
        }
        if (m_.rows() < m_.cols()) {
            throw Error(Errc::dimension, "RationalPlant: M must have at least as many rows as columns");
        }
        auto check = [](const RationalMatrix& r, const char* name) {
            for (Eigen::Index i = 0; i < r.rows(); ++i)
                for (Eigen::Index j = 0; j < r.cols(); ++j)
                    if (r(i, j).den.is_zero())
                        throw Error(Errc::invalid_input, std::string("RationalPlant: zero denominator in ") + name);
        };
        check(m_, "M");
        check(n_, "N");
    }

    const RationalMatrix& M() const { return m_; }
    const RationalMatrix& N() const { return n_; }
    Eigen::Index outputs() const { return m_.cols(); }
    Eigen::Index inputs() const { return n_.cols(); }
    Eigen::Index equations() const { return m_.rows(); }

    CMatrix M_at(double omega) const { return m_.eval(Complex(0.0, omega)); }
    CMatrix N_at(double omega) const { return n_.eval(Complex(0.0, omega)); }

private:
    RationalMatrix m_;
    RationalMatrix n_;
};

/// Output weighting for the objective ||Q y||^2 + ||u||^2. Q must have full row rank.
class WeightedObjective {
public:
    WeightedObjective() = default;
    explicit WeightedObjective(Matrix q) : q_(std::move(q)) {
        require_finite(q_, "WeightedObjective");
        if (q_.rows() == 0 || q_.rows() > q_.cols() || reciprocal_condition(q_) < kInvertibleRcond) {
            throw Error(Errc::rank_deficient, "WeightedObjective: Q must have full row rank (Q Q^T invertible)");
        }
    }

    const Matrix& Q() const { return q_; }
    /// Q^T (Q Q^T)^{-1}
    Matrix Q_pinv() const { return q_.transpose() * (q_ * q_.transpose()).llt().solve(Matrix::Identity(q_.rows(), q_.rows())); }

private:
    Matrix q_;
};

struct StateSpace {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;

    void validate() const {
        require_square(A, "StateSpace: A");
        if (B.rows() != A.rows() || C.cols() != A.rows() || D.rows() != C.rows() || D.cols() != B.cols()) {
            throw Error(Errc::dimension, "StateSpace: inconsistent dimensions");
        }
    }

    /// C (j w I - A)^{-1} B + D
    CMatrix response(double omega) const {
        const auto n = A.rows();
        CMatrix pencil = Complex(0.0, omega) * CMatrix::Identity(n, n) - A.cast<Complex>();
        Eigen::PartialPivLU<CMatrix> lu(pencil);
        return C.cast<Complex>() * lu.solve(B.cast<Complex>()) + D.cast<Complex>();
    }
};

enum class GainFormula {
    general,     // -N* M (M* M)^{-1}
    square,      // -N* M^{-*}
    descriptor,  // B^T A^{-T}
    symmetric,   // B^T A^{-1} under E = E^T > 0, A = A^T < 0, EA = AE
    weighted,    // -N* M (M* M)^{-1} Q^T Q
    buffer,      // u_ij = -x_i/a_i + x_j/a_j
    droop,       // -w0 / (2 zeta)
    modal,       // -1/d per machine mode
};

inline constexpr std::string_view to_string(GainFormula f) {
    switch (f) {
        case GainFormula::general: return "general";
        case GainFormula::square: return "square";
        case GainFormula::descriptor: return "descriptor";
        case GainFormula::symmetric: return "symmetric";
        case GainFormula::weighted: return "weighted";
        case GainFormula::buffer: return "buffer";
        case GainFormula::droop: return "droop";
        case GainFormula::modal: return "modal";
    }
    return "unknown";
}

inline std::optional<GainFormula> gain_formula_from_string(std::string_view s) {
    for (auto f : {GainFormula::general, GainFormula::square, GainFormula::descriptor, GainFormula::symmetric,
                   GainFormula::weighted, GainFormula::buffer, GainFormula::droop, GainFormula::modal}) {
        if (to_string(f) == s) {
            return f;
        }
    }
    return std::nullopt;
}

struct ModeRecord {
    double eigenvalue = 0.0;
    double omega0 = 0.0;
    double gain = 0.0;
};

/// Static feedback u = K y plus how it was built.
struct Gain {
    Matrix K;
    double omega0 = 0.0;
    GainFormula formula = GainFormula::general;
    std::vector<ModeRecord> modes;
};

// ---------------------------------------------------------------------------
// Closed loops

/// x' = E^{-1}(A + B K) x + E^{-1} w,  z = [I; K] x  (or [Q; K] x with a weighting).
inline StateSpace close_loop(const DescriptorPlant& p, const Gain& g, const WeightedObjective* weight = nullptr) {
    if (g.K.rows() != p.inputs() || g.K.cols() != p.states()) {
        throw Error(Errc::dimension, "close_loop: K must be inputs x states");
    }
    const double rc = reciprocal_condition(p.E());
    if (p.states() > 0 && rc < kInvertibleRcond) {
        throw Error(Errc::singular_pencil, "close_loop: descriptor not reducible, E is singular (rcond " +
                                               std::to_string(rc) + ")");
    }
    const auto n = p.states();
    const auto m = p.inputs();
    Eigen::PartialPivLU<Matrix> lu(p.E());
    StateSpace ss;
    ss.A = lu.solve(Matrix(p.A() + p.B() * g.K));
    ss.B = lu.solve(Matrix::Identity(n, n));
    const Matrix top = weight ? weight->Q() : Matrix::Identity(n, n);
    if (top.cols() != n) {
        throw Error(Errc::dimension, "close_loop: Q must have one column per state");
    }
    ss.C.resize(top.rows() + m, n);
    ss.C << top, g.K;
    ss.D = Matrix::Zero(top.rows() + m, n);
    return ss;
}

/// [Q; K](M(jw) - N(jw) K)^{-1}; Q defaults to the identity.
inline CMatrix eval_closed_rational(const RationalPlant& p, const Gain& g, double omega,
                                    const WeightedObjective* weight = nullptr) {
    if (g.K.rows() != p.inputs() || g.K.cols() != p.outputs()) {
        throw Error(Errc::dimension, "eval_closed_rational: K must be inputs x outputs");
    }
    if (p.equations() != p.outputs()) {
        throw Error(Errc::dimension, "eval_closed_rational: closed loop needs square M");
    }
    const CMatrix t = p.M_at(omega) - p.N_at(omega) * g.K.cast<Complex>();
    Eigen::PartialPivLU<CMatrix> lu(t);
    const double rc = t.size() == 0 ? 1.0 : reciprocal_condition(t);
    if (rc < 1e-13) {
        throw Error(Errc::pole_on_axis, "eval_closed_rational: M - N K singular at w = " + std::to_string(omega) +
                                            " (closed-loop pole on the imaginary axis)");
    }
    const CMatrix inv = lu.solve(CMatrix::Identity(t.rows(), t.cols()));
    const Matrix top = weight ? weight->Q() : Matrix::Identity(p.outputs(), p.outputs());
    CMatrix out(top.rows() + g.K.rows(), inv.cols());
    out << top.cast<Complex>() * inv, g.K.cast<Complex>() * inv;
    return out;
}

/// Entrywise polynomials of E s - A and constant B.
inline RationalPlant to_rational(const DescriptorPlant& p) {
    RationalMatrix m(p.states(), p.states());
    for (Eigen::Index i = 0; i < p.states(); ++i)
        for (Eigen::Index j = 0; j < p.states(); ++j)
            m(i, j) = RationalFunction{Polynomial{-p.A()(i, j), p.E()(i, j)}, Polynomial::constant(1.0)};
    return {std::move(m), RationalMatrix::constant(p.B())};
}

/// Recovers (E, A, B) when M has affine polynomial entries and N is constant.
inline std::optional<DescriptorPlant> as_descriptor(const RationalPlant& p) {
    if (p.equations() != p.outputs() || !p.M().is_polynomial(1) || !p.N().is_polynomial(0)) {
        return std::nullopt;
    }
    const auto k = p.outputs();
    Matrix e = Matrix::Zero(k, k);
    Matrix a = Matrix::Zero(k, k);
    Matrix b = Matrix::Zero(k, p.inputs());
    auto coef = [](const RationalFunction& f, std::size_t i) {
        const auto& c = f.num.coefficients();
        const double scale = f.den.coefficients().at(0);
        return i < c.size() ? c[i] / scale : 0.0;
    };
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            a(i, j) = -coef(p.M()(i, j), 0);
            e(i, j) = coef(p.M()(i, j), 1);
        }
        for (Eigen::Index j = 0; j < p.inputs(); ++j) b(i, j) = coef(p.N()(i, j), 0);
    }
    try {
        return DescriptorPlant(std::move(e), std::move(a), std::move(b));
    } catch (const Error&) {
        return std::nullopt;
    }
}

/// M(s) - N(s) K as a rational matrix.
inline RationalMatrix closed_loop_denominator_matrix(const RationalPlant& p, const Matrix& K) {
    RationalMatrix out(p.equations(), p.outputs());
    for (Eigen::Index i = 0; i < p.equations(); ++i) {
        for (Eigen::Index j = 0; j < p.outputs(); ++j) {
            RationalFunction nk = RationalFunction::constant(0.0);
            for (Eigen::Index l = 0; l < p.inputs(); ++l) {
                if (K(l, j) != 0.0) {
                    nk = nk + K(l, j) * p.N()(i, l);
                }
            }
            out(i, j) = p.M()(i, j) - nk;
        }
    }
    return out;
}

namespace detail {

inline Polynomial polynomial_determinant(const std::vector<std::vector<Polynomial>>& m, std::vector<int>& cols,
                                         std::size_t row) {
    if (row == m.size()) {
        return Polynomial::constant(1.0);
    }
    Polynomial acc;
    int sign = 1;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const int col = cols[c];
        const Polynomial& entry = m[row][static_cast<std::size_t>(col)];
        if (!entry.is_zero()) {
            std::vector<int> rest;
            rest.reserve(cols.size() - 1);
            for (std::size_t d = 0; d < cols.size(); ++d)
                if (d != c) rest.push_back(cols[d]);
            const Polynomial minor = polynomial_determinant(m, rest, row + 1);
            acc = acc + static_cast<double>(sign) * (entry * minor);
        }
        sign = -sign;
    }
    return acc;
}

}  // namespace detail

inline constexpr Eigen::Index kDeterminantSizeCap = 8;

/// Numerator of det(M - N K) after clearing each row's denominators.
/// Rows are scaled by the product of their distinct entry denominators.
inline Polynomial closed_loop_characteristic_polynomial(const RationalPlant& p, const Matrix& K) {
    const RationalMatrix t = closed_loop_denominator_matrix(p, K);
    const auto k = t.rows();
    if (k != t.cols()) {
        throw Error(Errc::dimension, "closed_loop_characteristic_polynomial: needs square M");
    }
    if (k > kDeterminantSizeCap) {
        throw Error(Errc::degree_cap, "closed_loop_characteristic_polynomial: " + std::to_string(k) +
                                          " outputs exceed the cofactor-expansion cap of " +
                                          std::to_string(kDeterminantSizeCap));
    }
    std::vector<std::vector<Polynomial>> poly(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        std::vector<Polynomial> dens;
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto& d = t(i, j).den;
            if (std::find(dens.begin(), dens.end(), d) == dens.end()) dens.push_back(d);
        }
        auto& row = poly[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < k; ++j) {
            Polynomial entry = t(i, j).num;
            bool skipped_own = false;
            for (const auto& d : dens) {
                if (!skipped_own && d == t(i, j).den) {
                    skipped_own = true;
                    continue;
                }
                entry = entry * d;
            }
            row.push_back(entry);
        }
    }
    std::vector<int> cols(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) cols[static_cast<std::size_t>(j)] = static_cast<int>(j);
    return detail::polynomial_determinant(poly, cols, 0);
}

// ---------------------------------------------------------------------------
// Standing assumptions

/// Default verification grid: 201 log points on [1e-4, 1e4] plus w = 0.
inline GridSpec default_grid() { return GridSpec{}; }

/// Checks full column rank of M(jw) and invertibility of M M* + N N* on the grid.
/// Grid points where the plant itself has a pole are skipped.
inline void check_standing_assumptions(const RationalPlant& p, const GridSpec& spec = default_grid()) {
    for (double w : frequency_grid(spec)) {
        CMatrix mj;
        CMatrix nj;
        try {
            mj = p.M_at(w);
            nj = p.N_at(w);
        } catch (const Error& e) {
            if (e.code() == Errc::pole_at_point) continue;
            throw;
        }
        if (reciprocal_condition(mj) < kInvertibleRcond) {
            throw Error(Errc::rank_deficient,
                        "M(jw) must have full column rank for all w; fails at w = " + std::to_string(w));
        }
        const CMatrix gram = mj * mj.adjoint() + nj * nj.adjoint();
        if (reciprocal_condition(gram) < kInvertibleRcond) {
            throw Error(Errc::standing_assumption,
                        "M(jw)M(jw)* + N(jw)N(jw)* must be invertible for all w; fails at w = " + std::to_string(w));
        }
    }
}

}  // namespace hinfcf
