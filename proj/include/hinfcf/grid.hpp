#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "hinfcf/error.hpp"

namespace hinfcf {

/// One-sided frequency grid: optional w = 0 followed by `points` log-spaced samples.
/// All plant data are real, so responses are even in w and w >= 0 suffices.
struct GridSpec {
    double omega_min = 1e-4;
    double omega_max = 1e4;
    int points = 201;
    bool include_zero = true;
    /// Refinement stops once the bracket is narrower than refine_rel * (1 + w_peak).
    double refine_rel = 1e-6;
    /// Candidates within this relative distance of the maximum count as ties (smallest w wins).
    double tie_rel = 1e-9;
};

inline std::vector<double> frequency_grid(const GridSpec& spec) {
    if (spec.points < 2 || !(spec.omega_min > 0.0) || !(spec.omega_max > spec.omega_min)) {
        throw Error(Errc::invalid_parameter, "frequency_grid: need points >= 2 and 0 < omega_min < omega_max");
    }
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(spec.points) + 1);
    if (spec.include_zero) {
        w.push_back(0.0);
    }
    const double l0 = std::log10(spec.omega_min);
    const double l1 = std::log10(spec.omega_max);
    for (int i = 0; i < spec.points; ++i) {
        w.push_back(std::pow(10.0, l0 + (l1 - l0) * i / (spec.points - 1)));
    }
    return w;
}

struct GridPeak {
    double value = 0.0;
    double omega = 0.0;
    /// Width of the final refinement bracket around `omega`.
    double window = 0.0;
    int evaluations = 0;
};

namespace detail {

/// Evaluates f, mapping a plant pole at the sample point to "no sample".
template<typename F>
bool try_eval(F& f, double w, double& out) {
    try {
        out = f(w);
        return std::isfinite(out);
    } catch (const Error& e) {
        if (e.code() == Errc::pole_at_point) {
            return false;
        }
        throw;
    }
}

/// Golden-section maximization on [lo, hi]; the endpoint values are already known.
template<typename F>
GridPeak golden_refine(F& f, double lo, double flo, double hi, double fhi, const GridSpec& spec) {
    constexpr double kInvPhi = 0.6180339887498949;
    GridPeak best;
    best.value = flo;
    best.omega = lo;
    if (fhi > best.value) {
        best.value = fhi;
        best.omega = hi;
    }
    auto consider = [&](double w, double v) {
        if (v > best.value || (v == best.value && w < best.omega)) {
            best.value = v;
            best.omega = w;
        }
    };
    const double ninf = -std::numeric_limits<double>::infinity();
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = ninf;
    double f2 = ninf;
    if (!try_eval(f, x1, f1)) f1 = ninf;
    if (!try_eval(f, x2, f2)) f2 = ninf;
    best.evaluations += 2;
    consider(x1, f1);
    consider(x2, f2);
    int guard = 0;
    while (hi - lo > spec.refine_rel * (1.0 + best.omega) && guard++ < 200) {
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            if (!try_eval(f, x1, f1)) f1 = ninf;
            consider(x1, f1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            if (!try_eval(f, x2, f2)) f2 = ninf;
            consider(x2, f2);
        }
        ++best.evaluations;
    }
    best.window = hi - lo;
    return best;
}

}  // namespace detail

/// Maximizes f over w >= 0: evaluate on the grid, then refine every local maximum by
/// golden-section search until its bracket is below refine_rel * (1 + w). Grid points at
/// which f reports a plant pole are skipped. Ties resolve to the smallest w.
template<typename F>
GridPeak maximize_on_grid(F&& f, const GridSpec& spec = {}) {
    std::vector<double> w_all = frequency_grid(spec);
    std::vector<double> w;
    std::vector<double> v;
    w.reserve(w_all.size());
    v.reserve(w_all.size());
    int evaluations = 0;
    for (double wi : w_all) {
        double val = 0.0;
        ++evaluations;
        if (detail::try_eval(f, wi, val)) {
            w.push_back(wi);
            v.push_back(val);
        }
    }
    if (w.empty()) {
        throw Error(Errc::invalid_input, "maximize_on_grid: no evaluable grid point");
    }
    // Still rising at the top of the grid: extend a few decades.
    for (int decade = 0; decade < 4 && v.size() >= 2 && v.back() > v[v.size() - 2]; ++decade) {
        const double start = w.back();
        for (int k = 1; k <= 10; ++k) {
            const double wi = start * std::pow(10.0, k / 10.0);
            double val = 0.0;
            ++evaluations;
            if (detail::try_eval(f, wi, val)) {
                w.push_back(wi);
                v.push_back(val);
            }
        }
    }

    const double vmax = *std::max_element(v.begin(), v.end());
    const double cutoff = vmax > 0.0 ? 1e-6 * vmax : -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const bool left_ok = i == 0 || v[i] >= v[i - 1];
        const bool right_ok = i + 1 == v.size() || v[i] >= v[i + 1];
        if (left_ok && right_ok && v[i] >= cutoff) {
            candidates.push_back(i);
        }
    }
    constexpr std::size_t kMaxCandidates = 24;
    if (candidates.size() > kMaxCandidates) {
        std::partial_sort(candidates.begin(), candidates.begin() + kMaxCandidates, candidates.end(),
                          [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
        candidates.resize(kMaxCandidates);
    }

    std::vector<GridPeak> peaks;
    for (std::size_t i : candidates) {
        const std::size_t lo = i == 0 ? i : i - 1;
        const std::size_t hi = i + 1 == v.size() ? i : i + 1;
        GridPeak left;
        GridPeak right;
        // Refine each side separately so the bracket endpoints stay on known samples.
        if (lo < i) {
            left = detail::golden_refine(f, w[lo], v[lo], w[i], v[i], spec);
        } else {
            left = GridPeak{v[i], w[i], 0.0, 0};
        }
        if (hi > i) {
            right = detail::golden_refine(f, w[i], v[i], w[hi], v[hi], spec);
        } else {
            right = GridPeak{v[i], w[i], 0.0, 0};
        }
        evaluations += left.evaluations + right.evaluations;
        peaks.push_back(right.value > left.value ? right : left);
    }

    GridPeak best = peaks.front();
    for (const auto& p : peaks) {
        if (p.value > best.value) {
            best = p;
        }
    }
    const double top = best.value;
    for (const auto& p : peaks) {
        if (p.value >= top * (1.0 - spec.tie_rel) && p.omega < best.omega) {
            best = p;
        }
    }
    best.value = top;
    best.evaluations = evaluations;
    return best;
}

}  // namespace hinfcf
