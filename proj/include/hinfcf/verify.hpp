#pragma once

// Optimality certificates for static gains: closed-loop stability, H-infinity norm and its
// peak frequency, the least-squares lower bound, and the descriptor-specific checks.

#include <optional>
#include <string>
#include <vector>

#include "hinfcf/grid.hpp"
#include "hinfcf/sysmodel.hpp"

namespace hinfcf {

// ---------------------------------------------------------------------------
// Stability

struct StabilityReport {
    bool stable = false;
    double abscissa = 0.0;
    double margin = 0.0;
};

/// Generalized eigenvalues of (A + B K, E) must satisfy Re < -1e-9 * ||A||.
inline StabilityReport pencil_stability(const DescriptorPlant& p, const Gain& g) {
    if (g.K.rows() != p.inputs() || g.K.cols() != p.states()) {
        throw Error(Errc::dimension, "pencil_stability: K must be inputs x states");
    }
    StabilityReport r;
    r.margin = 1e-9 * spectral_norm(p.A());
    r.abscissa = spectral_abscissa(generalized_eigenvalues(Matrix(p.A() + p.B() * g.K), p.E()));
    r.stable = r.abscissa < -r.margin;
    return r;
}

namespace detail {

/// Pole test for a candidate root r of the cleared determinant: a genuine pole makes the
/// inverse blow up like 1/distance; a root cancelled by a denominator does not.
inline bool is_genuine_pole(const RationalMatrix& t, Complex r) {
    const double eps = 1e-6 * (1.0 + std::abs(r));
    auto inverse_norm = [&](double dist) {
        double worst = 0.0;
        for (Complex dir : {Complex(1.0, 0.0), Complex(0.0, 1.0), Complex(-1.0, 0.0), Complex(0.0, -1.0)}) {
            try {
                const CMatrix m = t.eval(r + dist * dir);
                const double smin = smallest_singular_value(m);
                worst = std::max(worst, smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity());
            } catch (const Error& e) {
                if (e.code() != Errc::pole_at_point) throw;
            }
        }
        return worst;
    };
    const double near = inverse_norm(eps);
    const double far = inverse_norm(100.0 * eps);
    if (!std::isfinite(near)) return true;
    if (far == 0.0) return near > 0.0;
    return near / far > 10.0;
}

}  // namespace detail

/// Stability of (M - N K)^{-1} for a rational plant. Affine M with constant N goes through the
/// pencil; anything else through the roots of the cleared determinant of M - N K.
inline StabilityReport rational_stability(const RationalPlant& p, const Gain& g) {
    if (auto d = as_descriptor(p); d && d->e_invertible()) {
        return pencil_stability(*d, g);
    }
    const Polynomial chi = closed_loop_characteristic_polynomial(p, g.K);
    if (chi.is_zero()) {
        throw Error(Errc::singular_pencil, "rational_stability: det(M - N K) vanishes identically");
    }
    const auto rts = roots(chi);
    double scale = 1.0;
    for (const auto& r : rts) scale = std::max(scale, std::abs(r));
    StabilityReport out;
    out.margin = 1e-9 * scale;
    out.abscissa = -std::numeric_limits<double>::infinity();
    const RationalMatrix t = closed_loop_denominator_matrix(p, g.K);
    for (const auto& r : rts) {
        if (r.real() >= -out.margin && !detail::is_genuine_pole(t, r)) {
            continue;
        }
        out.abscissa = std::max(out.abscissa, r.real());
    }
    out.stable = out.abscissa < -out.margin;
    return out;
}

// ---------------------------------------------------------------------------
// H-infinity norm

struct NormResult {
    double norm = 0.0;
    double peak_frequency = 0.0;
};

namespace detail {

/// sqrt(lambda_max(R* R)) for R = response(w): accurate for the largest singular value and
/// much cheaper than an SVD of the tall response.
inline double sigma_max_at(const StateSpace& ss, double w) {
    const CMatrix r = ss.response(w);
    if (r.size() == 0) return 0.0;
    const CMatrix small = r.rows() >= r.cols() ? CMatrix(r.adjoint() * r) : CMatrix(r * r.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian_part(small), Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues()(eig.eigenvalues().size() - 1)));
}

/// Nonnegative imaginary parts of Hamiltonian eigenvalues lying on the imaginary axis.
inline std::vector<double> imaginary_crossings(const StateSpace& ss, double gamma) {
    const auto n = ss.A.rows();
    Matrix h(2 * n, 2 * n);
    h << ss.A, (ss.B * ss.B.transpose()) / (gamma * gamma), -(ss.C.transpose() * ss.C), -ss.A.transpose();
    const double tol = 1e-6 * std::max(1.0, spectral_norm(h));
    std::vector<double> out;
    for (const auto& ev : eigenvalues(h)) {
        if (std::abs(ev.real()) <= tol && ev.imag() >= -tol) {
            out.push_back(std::max(0.0, ev.imag()));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

/// sup_w sigma_max(C (jw I - A)^{-1} B) for Hurwitz A and D = 0.
///
/// Level-set iteration on the Hamiltonian [[A, B B^T / g^2], [-C^T C, -A^T]]: at a level g just
/// above the best sampled value, imaginary-axis eigenvalues mark frequencies where sigma_max
/// crosses g; sampling between crossings raises the level until no crossing remains. The
/// reported norm is always an attained sample, refined around the peak by golden section.
inline NormResult hinf_norm_ss(const StateSpace& ss, double tol = 1e-8) {
    ss.validate();
    if (ss.D.size() > 0 && ss.D.cwiseAbs().maxCoeff() != 0.0) {
        throw Error(Errc::precondition, "hinf_norm_ss: feedthrough D must be zero");
    }
    const auto ev = eigenvalues(ss.A);
    if (!ev.empty() && spectral_abscissa(ev) >= 0.0) {
        throw Error(Errc::precondition, "hinf_norm_ss: closed-loop A is not Hurwitz (spectral abscissa " +
                                            std::to_string(spectral_abscissa(ev)) + ")");
    }
    NormResult best;
    auto sample = [&](double w) {
        const double v = detail::sigma_max_at(ss, w);
        if (v > best.norm || (v == best.norm && w < best.peak_frequency)) {
            best.norm = v;
            best.peak_frequency = w;
        }
        return v;
    };
    sample(0.0);
    for (const auto& e : ev) {
        if (e.imag() > 0.0) sample(e.imag());
        sample(std::abs(e));
    }
    if (best.norm == 0.0) {
        return best;
    }
    std::pair<double, double> bracket{0.0, 0.0};
    bool have_bracket = false;
    int iter = 0;
    for (;; ++iter) {
        if (iter > 100) {
            throw Error(Errc::internal, "hinf_norm_ss: level-set iteration did not converge (level " +
                                            std::to_string(best.norm) + " at w = " +
                                            std::to_string(best.peak_frequency) + ")");
        }
        const double level = best.norm * (1.0 + 2.0 * tol);
        std::vector<double> cross = detail::imaginary_crossings(ss, level);
        if (cross.empty()) {
            break;
        }
        if (cross.front() > 0.0) {
            cross.insert(cross.begin(), 0.0);
        }
        const double before = best.norm;
        for (std::size_t i = 0; i < cross.size(); ++i) {
            const double mid = i + 1 < cross.size() ? 0.5 * (cross[i] + cross[i + 1]) : cross[i];
            const double v = sample(mid);
            if (v >= best.norm && i + 1 < cross.size()) {
                bracket = {cross[i], cross[i + 1]};
                have_bracket = true;
            }
            sample(cross[i]);
        }
        // Spurious crossings (eigenvalues merely close to the axis) cannot raise the level.
        if (best.norm <= before * (1.0 + 0.1 * tol)) {
            break;
        }
    }
    // Golden-section refinement of the peak location inside the last bracket.
    double lo = have_bracket ? bracket.first : std::max(0.0, best.peak_frequency * (1.0 - 1e-3));
    double hi = have_bracket ? bracket.second : best.peak_frequency * (1.0 + 1e-3) + 1e-9;
    if (!(best.peak_frequency >= lo && best.peak_frequency <= hi)) {
        lo = std::max(0.0, best.peak_frequency * (1.0 - 1e-3));
        hi = best.peak_frequency * (1.0 + 1e-3) + 1e-9;
    }
    GridSpec refine;
    refine.refine_rel = 1e-9;
    auto f = [&](double w) { return detail::sigma_max_at(ss, w); };
    const GridPeak left = detail::golden_refine(f, lo, f(lo), best.peak_frequency, best.norm, refine);
    const GridPeak right = detail::golden_refine(f, best.peak_frequency, best.norm, hi, f(hi), refine);
    for (const auto& pk : {left, right}) {
        if (pk.value > best.norm) {
            best.norm = pk.value;
            best.peak_frequency = pk.omega;
        }
    }
    return best;
}

/// Adaptive grid search of sigma_max([Q; K](M(jw) - N(jw) K)^{-1}) over w >= 0.
inline NormResult hinf_norm_grid(const RationalPlant& p, const Gain& g, const GridSpec& spec = default_grid(),
                                 const WeightedObjective* weight = nullptr) {
    const GridPeak pk = maximize_on_grid(
        [&](double w) { return spectral_norm(eval_closed_rational(p, g, w, weight)); }, spec);
    return {pk.value, pk.omega};
}

// ---------------------------------------------------------------------------
// Lower bound

struct LowerBound {
    double value = 0.0;
    double omega = 0.0;
};

namespace detail {

/// ||(M M* + N N*)^{-1}||^{1/2} = 1 / sqrt(lambda_min(M M* + N N*)).
inline double lower_bound_at(const CMatrix& mj, const CMatrix& nj, double w) {
    const CMatrix gram = mj * mj.adjoint() + nj * nj.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian_part(gram), Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues()(0);
    const double scale = std::max(1.0, eig.eigenvalues()(eig.eigenvalues().size() - 1));
    if (!(lmin > 1e-14 * scale)) {
        throw Error(Errc::standing_assumption, "lower_bound: M M* + N N* is singular at w = " + std::to_string(w));
    }
    return 1.0 / std::sqrt(lmin);
}

inline CMatrix weighted_m(const CMatrix& mj, const WeightedObjective* weight) {
    if (!weight) return mj;
    return mj * weight->Q_pinv().cast<Complex>();
}

}  // namespace detail

/// sup_w ||(M M* + N N*)^{-1}||^{1/2}; with a weighting M is replaced by M Q^+.
inline LowerBound lower_bound(const RationalPlant& p, const GridSpec& spec = default_grid(),
                              const WeightedObjective* weight = nullptr) {
    const GridPeak pk = maximize_on_grid(
        [&](double w) { return detail::lower_bound_at(detail::weighted_m(p.M_at(w), weight), p.N_at(w), w); }, spec);
    return {pk.value, pk.omega};
}

inline LowerBound lower_bound(const DescriptorPlant& p, const GridSpec& spec = default_grid(),
                              const WeightedObjective* weight = nullptr) {
    const CMatrix e = p.E().cast<Complex>();
    const CMatrix a = p.A().cast<Complex>();
    const CMatrix b = p.B().cast<Complex>();
    const GridPeak pk = maximize_on_grid(
        [&](double w) { return detail::lower_bound_at(detail::weighted_m(Complex(0.0, w) * e - a, weight), b, w); },
        spec);
    return {pk.value, pk.omega};
}

inline LowerBound weighted_lower_bound(const RationalPlant& p, const WeightedObjective& w,
                                       const GridSpec& spec = default_grid()) {
    return lower_bound(p, spec, &w);
}

// ---------------------------------------------------------------------------
// Certificate

enum class Verdict { optimal, stable_but_suboptimal, unstable };

inline constexpr std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::optimal: return "optimal";
        case Verdict::stable_but_suboptimal: return "stable-but-suboptimal";
        case Verdict::unstable: return "unstable";
    }
    return "unknown";
}

struct CertifyOptions {
    /// Relative tolerance on |norm - lower bound| (scaled by 1 + lower bound).
    double norm_tol = 1e-6;
    /// Relative accuracy of the state-space norm computation.
    double ss_tol = 1e-8;
    /// Peak frequency counts as w0 within peak_tol * (1 + w0).
    double peak_tol = 1e-6;
    /// Alternatively w0 is a maximizer if sigma(w0) >= norm * (1 - tie_tol).
    double tie_tol = 1e-9;
    GridSpec grid = default_grid();
    const WeightedObjective* weight = nullptr;
};

struct Certificate {
    bool stable = false;
    double spectral_abscissa = 0.0;
    std::string stability_method;
    std::optional<double> hinf_norm;
    std::optional<double> peak_frequency;
    std::string norm_method;
    double sigma_at_omega0 = 0.0;
    double lower_bound = 0.0;
    double lower_bound_omega = 0.0;
    double gap = 0.0;
    double omega0 = 0.0;
    Verdict verdict = Verdict::unstable;
    /// Empty when optimal; otherwise one of stability, peak-frequency, norm-gap.
    std::string failed_criterion;
    CertifyOptions options;
};

namespace detail {

inline void finish_certificate(Certificate& c, double sigma_w0) {
    c.sigma_at_omega0 = sigma_w0;
    c.gap = *c.hinf_norm - c.lower_bound;
    const auto& o = c.options;
    const bool gap_ok = std::abs(c.gap) <= o.norm_tol * (1.0 + c.lower_bound);
    const bool peak_ok = std::abs(*c.peak_frequency - c.omega0) <= o.peak_tol * (1.0 + c.omega0) ||
                         sigma_w0 >= *c.hinf_norm * (1.0 - o.tie_tol);
    if (!peak_ok) {
        c.failed_criterion = "peak-frequency";
    } else if (!gap_ok) {
        c.failed_criterion = "norm-gap";
    }
    c.verdict = c.failed_criterion.empty() ? Verdict::optimal : Verdict::stable_but_suboptimal;
}

}  // namespace detail

/// State-space route: pencil stability, Hamiltonian norm, grid lower bound.
inline Certificate certify_optimality(const DescriptorPlant& p, const Gain& g, const CertifyOptions& opt = {}) {
    Certificate c;
    c.options = opt;
    c.omega0 = g.omega0;
    const StabilityReport st = pencil_stability(p, g);
    c.stable = st.stable;
    c.spectral_abscissa = st.abscissa;
    c.stability_method = "pencil";
    const LowerBound lb = lower_bound(p, opt.grid, opt.weight);
    c.lower_bound = lb.value;
    c.lower_bound_omega = lb.omega;
    if (!c.stable) {
        c.verdict = Verdict::unstable;
        c.failed_criterion = "stability";
        return c;
    }
    const StateSpace ss = close_loop(p, g, opt.weight);
    const NormResult nr = hinf_norm_ss(ss, opt.ss_tol);
    c.hinf_norm = nr.norm;
    c.peak_frequency = nr.peak_frequency;
    c.norm_method = "hamiltonian";
    detail::finish_certificate(c, detail::sigma_max_at(ss, g.omega0));
    return c;
}

/// Rational route: determinant-root (or pencil) stability, grid norm, grid lower bound.
/// Affine plants with invertible E use the state-space route.
inline Certificate certify_optimality(const RationalPlant& p, const Gain& g, const CertifyOptions& opt = {}) {
    if (auto d = as_descriptor(p); d && d->e_invertible()) {
        return certify_optimality(*d, g, opt);
    }
    Certificate c;
    c.options = opt;
    c.omega0 = g.omega0;
    const StabilityReport st = rational_stability(p, g);
    c.stable = st.stable;
    c.spectral_abscissa = st.abscissa;
    c.stability_method = "determinant-roots";
    const LowerBound lb = lower_bound(p, opt.grid, opt.weight);
    c.lower_bound = lb.value;
    c.lower_bound_omega = lb.omega;
    if (!c.stable) {
        c.verdict = Verdict::unstable;
        c.failed_criterion = "stability";
        return c;
    }
    const NormResult nr = hinf_norm_grid(p, g, opt.grid, opt.weight);
    c.hinf_norm = nr.norm;
    c.peak_frequency = nr.peak_frequency;
    c.norm_method = "grid";
    double sigma_w0 = 0.0;
    try {
        sigma_w0 = spectral_norm(eval_closed_rational(p, g, g.omega0, opt.weight));
    } catch (const Error& e) {
        if (e.code() != Errc::pole_at_point) throw;
        // Plant pole at w0 (e.g. an integrator at 0): use the limit from the right.
        sigma_w0 = spectral_norm(eval_closed_rational(p, g, g.omega0 + 1e-9 * (1.0 + g.omega0), opt.weight));
    }
    detail::finish_certificate(c, sigma_w0);
    return c;
}

// ---------------------------------------------------------------------------
// Descriptor-specific checks

struct InequalityReport {
    bool holds = false;
    /// min over checked w of lambda_min(w^2 F G^{-1} F^T + jw(F^T - F) + G) - ||G^{-1}||^{-1}
    double min_eig = 0.0;
    double omega_at_min = 0.0;
    double checked_max = 0.0;
    double tail_omega = 0.0;
    bool tail_active = false;
};

/// Frequency inequality w^2 F G^{-1} F^T + jw(F^T - F) + G >= ||G^{-1}||^{-1} I with F = E A^T and
/// G = A A^T + B B^T, checked on an adaptive grid up to the point where the quadratic term
/// dominates: w^2 lambda_min(F G^{-1} F^T) > w ||F^T - F|| + ||G^{-1}||^{-1}.
inline InequalityReport check_descriptor_inequality(const DescriptorPlant& p) {
    const Matrix f = p.F();
    const Matrix g = p.G();
    Eigen::LLT<Matrix> gl(g);
    if (gl.info() != Eigen::Success) {
        throw Error(Errc::near_singular, "check_descriptor_inequality: G = A A^T + B B^T is not positive definite");
    }
    const Matrix x = f * gl.solve(f.transpose());
    const Matrix skew = f.transpose() - f;
    const double c = min_symmetric_eigenvalue(g);  // ||G^{-1}||^{-1}
    const double a = min_symmetric_eigenvalue(x);
    const double b = spectral_norm(skew);
    const double threshold = -1e-9 * std::max(1.0, spectral_norm(g));

    InequalityReport r;
    GridSpec spec;
    spec.points = 401;
    const double scale = std::max(1.0, spectral_norm(x));
    if (a > 1e-12 * scale) {
        r.tail_active = true;
        r.tail_omega = (b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * a);
        spec.omega_max = std::max(r.tail_omega * 1.01, 1e-3);
        spec.omega_min = std::min(1e-4, spec.omega_max * 1e-6);
    } else {
        spec.omega_min = 1e-4;
        spec.omega_max = 1e6;
    }
    const CMatrix xc = x.cast<Complex>();
    const CMatrix sc = skew.cast<Complex>();
    const CMatrix gc = g.cast<Complex>();
    auto margin = [&](double w) {
        return min_hermitian_eigenvalue(w * w * xc + Complex(0.0, w) * sc + gc) - c;
    };
    const GridPeak worst = maximize_on_grid([&](double w) { return -margin(w); }, spec);
    r.min_eig = -worst.value;
    r.omega_at_min = worst.omega;
    r.checked_max = spec.omega_max;
    r.holds = r.min_eig >= threshold;
    return r;
}

struct SymmetricReport {
    bool e_symmetric = false;
    bool a_symmetric = false;
    bool e_positive_definite = false;
    bool a_negative_definite = false;
    bool commute = false;
    double commutator_norm = 0.0;

    bool holds() const { return e_symmetric && a_symmetric && e_positive_definite && a_negative_definite && commute; }
};

/// E = E^T > 0, A = A^T < 0 and E A = A E.
inline SymmetricReport check_symmetric_hypotheses(const DescriptorPlant& p) {
    SymmetricReport r;
    const Matrix& e = p.E();
    const Matrix& a = p.A();
    const double ne = spectral_norm(e);
    const double na = spectral_norm(a);
    r.e_symmetric = spectral_norm(Matrix(e - e.transpose())) <= 1e-12 * ne;
    r.a_symmetric = spectral_norm(Matrix(a - a.transpose())) <= 1e-12 * na;
    if (e.size() > 0) {
        r.e_positive_definite = r.e_symmetric && min_symmetric_eigenvalue(e) > 0.0;
        r.a_negative_definite = r.a_symmetric && min_symmetric_eigenvalue(-a) > 0.0;
    }
    r.commutator_norm = spectral_norm(Matrix(e * a - a * e));
    r.commute = r.commutator_norm <= 1e-10 * ne * na;
    return r;
}

struct SparsityReport {
    /// true where the entry counts as zero.
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> zero_mask;
    int zeros = 0;
    int nonzeros = 0;
};

/// Entries with |K_ij| <= 1e-12 * max |K| are zeros.
inline SparsityReport sparsity_pattern(const Matrix& k) {
    SparsityReport r;
    const double kmax = k.size() == 0 ? 0.0 : k.cwiseAbs().maxCoeff();
    r.zero_mask = (k.array().abs() <= 1e-12 * kmax);
    r.zeros = static_cast<int>(r.zero_mask.count());
    r.nonzeros = static_cast<int>(k.size()) - r.zeros;
    return r;
}

inline SparsityReport sparsity_pattern(const Gain& g) { return sparsity_pattern(g.K); }

/// Number of entries with |K_ij| < threshold.
inline int count_below(const Matrix& k, double threshold) {
    return static_cast<int>((k.array().abs() < threshold).count());
}

/// Full descriptor analysis. When the symmetric hypotheses fail, the frequency inequality and
/// the pencil test are run as the fallback evidence.
struct DescriptorAnalysis {
    SymmetricReport hypotheses;
    bool fallback_used = false;
    std::optional<InequalityReport> inequality;
    StabilityReport pencil;
    Certificate certificate;
};

inline DescriptorAnalysis analyze_descriptor(const DescriptorPlant& p, const Gain& g, const CertifyOptions& opt = {}) {
    DescriptorAnalysis out;
    out.hypotheses = check_symmetric_hypotheses(p);
    if (!out.hypotheses.holds()) {
        out.fallback_used = true;
        out.inequality = check_descriptor_inequality(p);
    }
    out.pencil = pencil_stability(p, g);
    out.certificate = certify_optimality(p, g, opt);
    return out;
}

}  // namespace hinfcf
