#pragma once

// Closed-form static gains.

#include <string>
#include <vector>

#include "hinfcf/netgen.hpp"
#include "hinfcf/sysmodel.hpp"
#include "hinfcf/verify.hpp"

namespace hinfcf {

inline constexpr double kRealnessTol = 1e-9;

namespace detail {

inline Matrix require_real(const CMatrix& k, const char* who) {
    const double im = k.size() == 0 ? 0.0 : spectral_norm(Matrix(k.imag()));
    const double re = k.size() == 0 ? 0.0 : spectral_norm(Matrix(k.real()));
    if (im > kRealnessTol * (1.0 + re)) {
        throw Error(Errc::not_real, std::string(who) + ": gain has imaginary part " + std::to_string(im) +
                                        " (real part " + std::to_string(re) +
                                        "); w0 does not give a real-valued K for this plant");
    }
    return k.real();
}

/// -N* M (M* M)^{-1} at w0 as a complex matrix, plus whether the square path was used.
inline std::pair<CMatrix, bool> closed_form_complex(const RationalPlant& p, double omega0) {
    const CMatrix mj = p.M_at(omega0);
    const CMatrix nj = p.N_at(omega0);
    const double rc = reciprocal_condition(mj);
    if (mj.size() > 0 && rc < kInvertibleRcond) {
        throw Error(Errc::rank_deficient, "closed_form_gain: M(jw0) lacks full column rank at w0 = " +
                                              std::to_string(omega0) + " (reciprocal condition " +
                                              std::to_string(rc) + ")");
    }
    if (mj.rows() == mj.cols()) {
        // K^* = -M^{-1} N
        const CMatrix x = mj.partialPivLu().solve(nj);
        return {-x.adjoint(), true};
    }
    // K^* = -(M* M)^{-1} M* N, the least-squares solution of M X = N.
    const CMatrix x = mj.colPivHouseholderQr().solve(nj);
    return {-x.adjoint(), false};
}

}  // namespace detail

/// K = -N(jw0)* M(jw0) (M(jw0)* M(jw0))^{-1}; for square M this is -N(jw0)* M(jw0)^{-*}.
inline Gain closed_form_gain(const RationalPlant& p, double omega0 = 0.0) {
    if (!(omega0 >= 0.0) || !std::isfinite(omega0)) {
        throw Error(Errc::invalid_parameter, "closed_form_gain: w0 must be finite and nonnegative");
    }
    auto [k, square] = detail::closed_form_complex(p, omega0);
    Gain g;
    g.K = detail::require_real(k, "closed_form_gain");
    g.omega0 = omega0;
    g.formula = square ? GainFormula::square : GainFormula::general;
    return g;
}

/// K = B^T A^{-T}, computed as (A^{-1} B)^T. Tagged symmetric when E = E^T > 0, A = A^T < 0, EA = AE.
inline Gain descriptor_gain(const DescriptorPlant& p) {
    const double rc = reciprocal_condition(p.A());
    if (p.states() > 0 && rc < kInvertibleRcond) {
        throw Error(Errc::near_singular,
                    "descriptor_gain: A is near singular (reciprocal condition " + std::to_string(rc) + ")");
    }
    Gain g;
    g.K = p.A().partialPivLu().solve(p.B()).transpose();
    g.omega0 = 0.0;
    g.formula = check_symmetric_hypotheses(p).holds() ? GainFormula::symmetric : GainFormula::descriptor;
    return g;
}

/// K = -N(jw0)* M(jw0) (M(jw0)* M(jw0))^{-1} Q^T Q for the objective ||Q y||^2 + ||u||^2.
inline Gain weighted_gain(const RationalPlant& p, const WeightedObjective& w, double omega0 = 0.0) {
    if (w.Q().cols() != p.outputs()) {
        throw Error(Errc::dimension, "weighted_gain: Q must have one column per output");
    }
    Gain g = closed_form_gain(p, omega0);
    g.K = g.K * (w.Q().transpose() * w.Q());
    g.formula = GainFormula::weighted;
    return g;
}

/// Row 2e is u_ij = -x_i/a_i + x_j/a_j and row 2e+1 is u_ji for edge e = (i, j).
inline Gain buffer_law(const NetworkModel& net) {
    const auto* p = std::get_if<BufferParams>(&net.params);
    if (!p) {
        throw Error(Errc::invalid_input, "buffer_law: network is not a buffer network");
    }
    detail::require_size(p->rates, static_cast<std::size_t>(net.nodes), "rates");
    detail::require_positive(p->rates, "rates", Errc::invalid_parameter);
    detail::check_edges(net, false);
    Gain g;
    g.K = Matrix::Zero(2 * static_cast<Eigen::Index>(net.edges.size()), net.nodes);
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        const auto [i, j] = net.edges[e];
        const auto r = static_cast<Eigen::Index>(2 * e);
        const double ai = p->rates[static_cast<std::size_t>(i)];
        const double aj = p->rates[static_cast<std::size_t>(j)];
        g.K(r, i) = -1.0 / ai;
        g.K(r, j) = 1.0 / aj;
        g.K(r + 1, j) = -1.0 / aj;
        g.K(r + 1, i) = 1.0 / ai;
    }
    g.formula = GainFormula::buffer;
    return g;
}

/// Input coupling subsystems i and j: enters subsystem i through b_i and subsystem j through b_j.
struct Coupling {
    int i = 0;
    int j = 0;
    Vector b_i;
    Vector b_j;
};

struct SubsystemNetwork {
    std::vector<Matrix> blocks;
    std::vector<Coupling> couplings;
};

namespace detail {

inline std::vector<Eigen::Index> block_offsets(const SubsystemNetwork& net) {
    std::vector<Eigen::Index> off{0};
    for (const auto& a : net.blocks) off.push_back(off.back() + a.rows());
    return off;
}

inline void check_subsystems(const SubsystemNetwork& net) {
    for (std::size_t k = 0; k < net.blocks.size(); ++k) {
        const Matrix& a = net.blocks[k];
        require_square(a, "subsystem_law: block");
        require_finite(a, "subsystem_law: block");
        const double na = spectral_norm(a);
        if (spectral_norm(Matrix(a - a.transpose())) > 1e-12 * na) {
            throw Error(Errc::hypothesis_violation, "subsystem_law: block " + std::to_string(k) + " is not symmetric");
        }
        Eigen::LLT<Matrix> llt(Matrix(-a));
        if (a.size() == 0 || llt.info() != Eigen::Success) {
            throw Error(Errc::hypothesis_violation,
                        "subsystem_law: block " + std::to_string(k) + " is not negative definite");
        }
    }
    const int nb = static_cast<int>(net.blocks.size());
    for (const auto& c : net.couplings) {
        if (c.i < 0 || c.j < 0 || c.i >= nb || c.j >= nb || c.i == c.j) {
            throw Error(Errc::invalid_input, "subsystem_law: coupling endpoints must be distinct valid blocks");
        }
        if (c.b_i.size() != net.blocks[static_cast<std::size_t>(c.i)].rows() ||
            c.b_j.size() != net.blocks[static_cast<std::size_t>(c.j)].rows()) {
            throw Error(Errc::dimension, "subsystem_law: coupling vector length differs from its block size");
        }
    }
}

}  // namespace detail

/// Block-diagonal A, one input column per coupling.
inline DescriptorPlant assemble_subsystem_plant(const SubsystemNetwork& net) {
    detail::check_subsystems(net);
    const auto off = detail::block_offsets(net);
    const Eigen::Index n = off.back();
    Matrix a = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < net.blocks.size(); ++k) {
        a.block(off[k], off[k], net.blocks[k].rows(), net.blocks[k].cols()) = net.blocks[k];
    }
    Matrix b = Matrix::Zero(n, static_cast<Eigen::Index>(net.couplings.size()));
    for (std::size_t e = 0; e < net.couplings.size(); ++e) {
        const auto& c = net.couplings[e];
        const auto col = static_cast<Eigen::Index>(e);
        b.block(off[static_cast<std::size_t>(c.i)], col, c.b_i.size(), 1) = c.b_i;
        b.block(off[static_cast<std::size_t>(c.j)], col, c.b_j.size(), 1) = c.b_j;
    }
    return DescriptorPlant::standard(std::move(a), std::move(b));
}

/// u_e = b_i^T A_i^{-1} x_i + b_j^T A_j^{-1} x_j for coupling e between subsystems i and j.
inline Gain subsystem_law(const SubsystemNetwork& net) {
    detail::check_subsystems(net);
    const auto off = detail::block_offsets(net);
    Gain g;
    g.K = Matrix::Zero(static_cast<Eigen::Index>(net.couplings.size()), off.back());
    std::vector<Eigen::LLT<Matrix>> neg;
    neg.reserve(net.blocks.size());
    for (const auto& a : net.blocks) neg.emplace_back(Matrix(-a));
    for (std::size_t e = 0; e < net.couplings.size(); ++e) {
        const auto& c = net.couplings[e];
        const auto row = static_cast<Eigen::Index>(e);
        // A_i symmetric, so b_i^T A_i^{-1} = -((-A_i)^{-1} b_i)^T
        const Vector ri = -neg[static_cast<std::size_t>(c.i)].solve(c.b_i);
        const Vector rj = -neg[static_cast<std::size_t>(c.j)].solve(c.b_j);
        g.K.block(row, off[static_cast<std::size_t>(c.i)], 1, ri.size()) = ri.transpose();
        g.K.block(row, off[static_cast<std::size_t>(c.j)], 1, rj.size()) = rj.transpose();
    }
    g.formula = GainFormula::symmetric;
    return g;
}

/// Frequency dynamics with output the frequency deviation: M(s) = (s^2/w0^2 + 2 zeta s / w0 + 1)/s, N = 1.
inline RationalPlant droop_plant(double omega0, double zeta) {
    if (!(omega0 > 0.0) || !(zeta > 0.0)) {
        throw Error(Errc::invalid_parameter, "droop_plant: w0 and zeta must be positive");
    }
    RationalMatrix m(1, 1);
    m(0, 0) = RationalFunction{Polynomial{1.0, 2.0 * zeta / omega0, 1.0 / (omega0 * omega0)}, Polynomial::monomial(1)};
    return {std::move(m), RationalMatrix::constant(Matrix::Ones(1, 1))};
}

/// K = -M(jw0)^{-1} = -w0 / (2 zeta).
inline Gain droop_gain(double omega0, double zeta) {
    if (!(omega0 > 0.0) || !(zeta > 0.0) || !std::isfinite(omega0) || !std::isfinite(zeta)) {
        throw Error(Errc::invalid_parameter, "droop_gain: w0 and zeta must be positive");
    }
    Gain g;
    g.K = Matrix::Constant(1, 1, -omega0 / (2.0 * zeta));
    g.omega0 = omega0;
    g.formula = GainFormula::droop;
    return g;
}

/// Per-mode optimal damping feedback for m th'' + d th' + L th = w + u with output th'.
/// Each Laplacian mode lambda_i peaks at w0_i = sqrt(lambda_i / m) with M_i(j w0_i) = d, so every
/// mode gets -1/d and the gain is -(1/d) I in any coordinates. The recorded w0 is the largest mode.
inline Gain machine_modal_gains(double m, double d, const Matrix& l) {
    if (!(m > 0.0) || !(d > 0.0)) {
        throw Error(Errc::invalid_parameter, "machine_modal_gains: m and d must be positive");
    }
    require_square(l, "machine_modal_gains: L");
    require_finite(l, "machine_modal_gains: L");
    const double nl = spectral_norm(l);
    if (spectral_norm(Matrix(l - l.transpose())) > 1e-12 * std::max(1.0, nl)) {
        throw Error(Errc::hypothesis_violation, "machine_modal_gains: L must be symmetric");
    }
    Gain g;
    g.formula = GainFormula::modal;
    g.K = -(1.0 / d) * Matrix::Identity(l.rows(), l.cols());
    if (l.size() == 0) {
        return g;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(l, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        double lambda = eig.eigenvalues()(i);
        if (lambda < -1e-9 * nl) {
            throw Error(Errc::hypothesis_violation, "machine_modal_gains: L has negative eigenvalue " +
                                                        std::to_string(lambda));
        }
        lambda = std::max(lambda, 0.0);
        ModeRecord rec;
        rec.eigenvalue = lambda;
        rec.omega0 = std::sqrt(lambda / m);
        rec.gain = -1.0 / d;
        g.modes.push_back(rec);
        g.omega0 = std::max(g.omega0, rec.omega0);
    }
    return g;
}

inline Gain machine_modal_gains(const MachineSystem& sys) { return machine_modal_gains(sys.m, sys.d, sys.L); }

/// Matrix inertia and damping: requires symmetric, pairwise commuting M, D, L (a common modal
/// basis); the gain is then -D^{-1}. Anything else is refused.
inline Gain machine_matrix_gains(const Matrix& mm, const Matrix& dd, const Matrix& l) {
    for (const auto* x : {&mm, &dd, &l}) {
        require_square(*x, "machine_matrix_gains");
        if (x->rows() != l.rows()) {
            throw Error(Errc::dimension, "machine_matrix_gains: M, D and L must have equal size");
        }
        if (spectral_norm(Matrix(*x - x->transpose())) > 1e-12 * std::max(1.0, spectral_norm(*x))) {
            throw Error(Errc::hypothesis_violation, "machine_matrix_gains: M, D and L must be symmetric");
        }
    }
    auto commute = [](const Matrix& x, const Matrix& y) {
        return spectral_norm(Matrix(x * y - y * x)) <= 1e-10 * std::max(1.0, spectral_norm(x) * spectral_norm(y));
    };
    if (!commute(mm, dd) || !commute(mm, l) || !commute(dd, l)) {
        throw Error(Errc::hypothesis_violation,
                    "machine_matrix_gains: M, D and L do not commute pairwise; no common modal basis");
    }
    Eigen::LLT<Matrix> dl(dd);
    Eigen::LLT<Matrix> ml(mm);
    if (dl.info() != Eigen::Success || ml.info() != Eigen::Success) {
        throw Error(Errc::invalid_parameter, "machine_matrix_gains: M and D must be positive definite");
    }
    Gain g;
    g.formula = GainFormula::modal;
    g.K = -dl.solve(Matrix::Identity(dd.rows(), dd.cols()));
    // Modal frequencies from the common basis: eigenvectors of a generic combination.
    const Matrix mix = mm + 0.7071067811865476 * dd + 0.5772156649015329 * l;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(mix);
    for (Eigen::Index i = 0; i < mix.rows(); ++i) {
        const Vector v = eig.eigenvectors().col(i);
        const double mi = v.dot(mm * v);
        const double di = v.dot(dd * v);
        const double li = std::max(0.0, v.dot(l * v));
        g.modes.push_back({li, std::sqrt(li / mi), -1.0 / di});
        g.omega0 = std::max(g.omega0, std::sqrt(li / mi));
    }
    return g;
}

}  // namespace hinfcf
