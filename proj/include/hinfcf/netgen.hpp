#pragma once

// Graph-structured application models and their compilation into plants.
// Node indices and edge endpoints are 0-based.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hinfcf/sysmodel.hpp"

namespace hinfcf {

using Edge = std::pair<int, int>;

/// Storage buffers with diffusive exchange: x_i' = -a_i x_i + sum of inflows - outflows.
struct BufferParams {
    std::vector<double> rates;
};

/// Cascade of irrigation pools. Edges are implied (pool i feeds pool i+1).
struct IrrigationParams {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> tau;
    /// Reproduce H = ones at the level rows instead of the -1/alpha_i scaling.
    bool paper_h = false;
};

/// Rooms with heat capacity c*m_i, leakage p_i to the outside and conduction p_ij along edges.
struct ThermalParams {
    double c = 1.0;
    std::vector<double> masses;
    std::vector<double> leak;
    std::vector<double> conduction;  // one per edge
    double t_out = 0.0;
};

/// Swing dynamics m th'' + d th' + L th = P_dist + P_gen. Either L or edge weights.
struct MachineParams {
    double m = 1.0;
    double d = 1.0;
    std::optional<Matrix> laplacian;
    std::vector<double> weights;  // one per edge; unit weights when empty
};

/// x' = A x + u with A circulant, generated by its first row.
struct CirculantParams {
    std::vector<double> generator;
};

enum class NetworkKind { buffer, irrigation, thermal, machine, circulant };

inline constexpr std::string_view to_string(NetworkKind k) {
    switch (k) {
        case NetworkKind::buffer: return "buffer";
        case NetworkKind::irrigation: return "irrigation";
        case NetworkKind::thermal: return "thermal";
        case NetworkKind::machine: return "machine";
        case NetworkKind::circulant: return "circulant";
    }
    return "unknown";
}

struct NetworkModel {
    int nodes = 0;
    std::vector<Edge> edges;
    std::variant<BufferParams, IrrigationParams, ThermalParams, MachineParams, CirculantParams> params;

    NetworkKind kind() const { return static_cast<NetworkKind>(params.index()); }
};

namespace detail {

inline void check_edges(const NetworkModel& net, bool directed) {
    if (net.nodes < 1) {
        throw Error(Errc::invalid_input, "network: need at least one node");
    }
    std::set<Edge> seen;
    for (const auto& [i, j] : net.edges) {
        if (i < 0 || j < 0 || i >= net.nodes || j >= net.nodes) {
            throw Error(Errc::invalid_input, "network: edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                                 ") has an endpoint outside [0, " + std::to_string(net.nodes) + ")");
        }
        if (i == j) {
            throw Error(Errc::invalid_input, "network: self-loop at node " + std::to_string(i));
        }
        const Edge key = directed ? Edge{i, j} : Edge{std::min(i, j), std::max(i, j)};
        if (!seen.insert(key).second) {
            throw Error(Errc::duplicate_edge,
                        "network: duplicate edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        }
    }
}

inline void require_size(const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw Error(Errc::invalid_input, std::string("network: ") + what + " has " + std::to_string(v.size()) +
                                             " entries, expected " + std::to_string(n));
    }
}

inline void require_positive(const std::vector<double>& v, const char* what, Errc code) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            throw Error(code, std::string("network: ") + what + "[" + std::to_string(i) + "] = " +
                                  std::to_string(v[i]) + " must be positive");
        }
    }
}

template<typename T>
const T& params_as(const NetworkModel& net, const char* who) {
    const T* p = std::get_if<T>(&net.params);
    if (!p) {
        throw Error(Errc::invalid_input, std::string(who) + ": network has kind " + std::string(to_string(net.kind())));
    }
    return *p;
}

}  // namespace detail

/// E = I, A = diag(-a), B with columns u_ij, u_ji per edge (in edge-list order).
/// Column u_ij moves material from j to i: +1 at row i, -1 at row j.
inline DescriptorPlant compile_buffer(const NetworkModel& net) {
    const auto& p = detail::params_as<BufferParams>(net, "compile_buffer");
    detail::check_edges(net, false);
    detail::require_size(p.rates, static_cast<std::size_t>(net.nodes), "rates");
    detail::require_positive(p.rates, "rates", Errc::invalid_parameter);
    const int n = net.nodes;
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = -p.rates[static_cast<std::size_t>(i)];
    Matrix b = Matrix::Zero(n, 2 * static_cast<Eigen::Index>(net.edges.size()));
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        const auto [i, j] = net.edges[e];
        const auto c = static_cast<Eigen::Index>(2 * e);
        b(i, c) = 1.0;
        b(j, c) = -1.0;
        b(j, c + 1) = 1.0;
        b(i, c + 1) = -1.0;
    }
    return DescriptorPlant::standard(std::move(a), std::move(b));
}

struct IrrigationSystem {
    DescriptorPlant plant;
    /// Disturbance map: states x pools.
    Matrix H;
};

/// States [q_1, r_1, ..., q_N, r_N]. Input i sets the outflow reference of pool i, which
/// drains pool i through r_i and fills pool i+1.
inline IrrigationSystem compile_irrigation(const NetworkModel& net) {
    const auto& p = detail::params_as<IrrigationParams>(net, "compile_irrigation");
    if (net.nodes < 1) {
        throw Error(Errc::invalid_input, "compile_irrigation: need at least one pool");
    }
    const auto n = static_cast<std::size_t>(net.nodes);
    detail::require_size(p.alpha, n, "alpha");
    detail::require_size(p.beta, n, "beta");
    detail::require_size(p.tau, n, "tau");
    detail::require_positive(p.alpha, "alpha", Errc::invalid_parameter);
    detail::require_positive(p.beta, "beta", Errc::invalid_parameter);
    detail::require_positive(p.tau, "tau", Errc::invalid_parameter);
    const auto dim = static_cast<Eigen::Index>(2 * n);
    Matrix a = Matrix::Zero(dim, dim);
    Matrix b = Matrix::Zero(dim, static_cast<Eigen::Index>(n));
    Matrix h = Matrix::Zero(dim, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto q = static_cast<Eigen::Index>(2 * i);
        const auto r = q + 1;
        const auto col = static_cast<Eigen::Index>(i);
        a(q, q) = -p.beta[i] / p.alpha[i];
        a(q, r) = 1.0 / p.alpha[i];
        a(r, r) = -1.0 / p.tau[i];
        b(r, col) = 1.0 / p.tau[i];
        if (i + 1 < n) {
            b(q + 2, col) = -1.0 / p.alpha[i + 1];
        }
        h(q, col) = p.paper_h ? 1.0 : -1.0 / p.alpha[i];
    }
    return {DescriptorPlant::standard(std::move(a), std::move(b)), std::move(h)};
}

struct ThermalSystem {
    DescriptorPlant plant;
    /// Constant disturbance contribution p_i * T_out.
    Vector outdoor_load;
};

inline ThermalSystem compile_thermal(const NetworkModel& net) {
    const auto& p = detail::params_as<ThermalParams>(net, "compile_thermal");
    detail::check_edges(net, false);
    const auto n = static_cast<std::size_t>(net.nodes);
    detail::require_size(p.masses, n, "masses");
    detail::require_size(p.leak, n, "leak");
    detail::require_size(p.conduction, net.edges.size(), "conduction");
    detail::require_positive(p.masses, "masses", Errc::invalid_parameter);
    detail::require_positive(p.leak, "leak", Errc::invalid_parameter);
    detail::require_positive(p.conduction, "conduction", Errc::invalid_parameter);
    if (!(p.c > 0.0)) {
        throw Error(Errc::invalid_parameter, "compile_thermal: heat capacity c must be positive");
    }
    const auto dim = static_cast<Eigen::Index>(n);
    Matrix e = Matrix::Zero(dim, dim);
    Matrix a = Matrix::Zero(dim, dim);
    Vector load(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        e(k, k) = p.c * p.masses[i];
        a(k, k) = -p.leak[i];
        load(k) = p.leak[i] * p.t_out;
    }
    for (std::size_t k = 0; k < net.edges.size(); ++k) {
        const auto [i, j] = net.edges[k];
        a(i, i) -= p.conduction[k];
        a(j, j) -= p.conduction[k];
        a(i, j) += p.conduction[k];
        a(j, i) += p.conduction[k];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().maxCoeff() >= 0.0) {
        throw Error(Errc::internal, "compile_thermal: assembled A is not negative definite");
    }
    return {DescriptorPlant(std::move(e), std::move(a), Matrix::Identity(dim, dim)), std::move(load)};
}

struct MachineSystem {
    double m = 1.0;
    double d = 1.0;
    Matrix L;
};

/// Weighted Laplacian from edges, or the supplied L after structural checks.
inline MachineSystem compile_machine(const NetworkModel& net) {
    const auto& p = detail::params_as<MachineParams>(net, "compile_machine");
    if (!(p.m > 0.0) || !(p.d > 0.0)) {
        throw Error(Errc::invalid_parameter, "compile_machine: inertia m and damping d must be positive");
    }
    const auto n = static_cast<Eigen::Index>(net.nodes);
    Matrix l;
    if (p.laplacian) {
        l = *p.laplacian;
        if (l.rows() != n || l.cols() != n) {
            throw Error(Errc::dimension, "compile_machine: L must be nodes x nodes");
        }
        require_finite(l, "compile_machine: L");
        const double scale = std::max(1.0, l.cwiseAbs().maxCoeff());
        if ((l - l.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw Error(Errc::invalid_laplacian, "compile_machine: L is not symmetric");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i != j && l(i, j) > 1e-12 * scale) {
                    throw Error(Errc::invalid_laplacian, "compile_machine: L has a positive off-diagonal entry at (" +
                                                             std::to_string(i) + ", " + std::to_string(j) + ")");
                }
            }
            if (std::abs(l.row(i).sum()) > 1e-9 * scale) {
                throw Error(Errc::invalid_laplacian,
                            "compile_machine: row " + std::to_string(i) + " of L does not sum to zero");
            }
        }
    } else {
        detail::check_edges(net, false);
        std::vector<double> w = p.weights;
        if (w.empty()) w.assign(net.edges.size(), 1.0);
        detail::require_size(w, net.edges.size(), "weights");
        detail::require_positive(w, "weights", Errc::invalid_laplacian);
        l = Matrix::Zero(n, n);
        for (std::size_t k = 0; k < net.edges.size(); ++k) {
            const auto [i, j] = net.edges[k];
            l(i, i) += w[k];
            l(j, j) += w[k];
            l(i, j) -= w[k];
            l(j, i) -= w[k];
        }
    }
    return {p.m, p.d, std::move(l)};
}

/// Output th' with M(s) = m s I + d I + L / s and N = I.
inline RationalPlant machine_plant(const MachineSystem& sys) {
    const auto n = sys.L.rows();
    RationalMatrix m(n, n);
    const Polynomial s = Polynomial::monomial(1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Polynomial num = Polynomial::constant(sys.L(i, j));
            if (i == j) num = num + Polynomial{0.0, sys.d, sys.m};
            m(i, j) = RationalFunction{num, s};
        }
    }
    return {std::move(m), RationalMatrix::constant(Matrix::Identity(n, n))};
}

struct CirculantSystem {
    DescriptorPlant plant;
    bool hurwitz = true;
};

/// A_ij = g[(j - i) mod n], B = E = I.
inline CirculantSystem compile_circulant(const std::vector<double>& generator) {
    const auto n = static_cast<Eigen::Index>(generator.size());
    if (n == 0) {
        throw Error(Errc::invalid_input, "compile_circulant: empty generator");
    }
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = generator[static_cast<std::size_t>((j - i + n) % n)];
    const bool hurwitz = spectral_abscissa(eigenvalues(a)) < 0.0;
    return {DescriptorPlant::standard(std::move(a), Matrix::Identity(n, n)), hurwitz};
}

inline CirculantSystem compile_circulant(const NetworkModel& net) {
    const auto& p = detail::params_as<CirculantParams>(net, "compile_circulant");
    if (static_cast<int>(p.generator.size()) != net.nodes) {
        throw Error(Errc::invalid_input, "compile_circulant: generator length must equal nodes");
    }
    return compile_circulant(p.generator);
}

/// Plant produced from any network kind, with whatever side data the kind carries.
struct CompiledNetwork {
    std::optional<DescriptorPlant> descriptor;
    std::optional<RationalPlant> rational;
    std::optional<MachineSystem> machine;
    Matrix disturbance_map;
    Vector outdoor_load;
    std::vector<std::string> warnings;
};

inline CompiledNetwork compile(const NetworkModel& net) {
    CompiledNetwork out;
    switch (net.kind()) {
        case NetworkKind::buffer:
            out.descriptor = compile_buffer(net);
            break;
        case NetworkKind::irrigation: {
            auto sys = compile_irrigation(net);
            out.descriptor = std::move(sys.plant);
            out.disturbance_map = std::move(sys.H);
            if (std::get<IrrigationParams>(net.params).paper_h) {
                out.warnings.emplace_back("irrigation disturbance map uses unit entries, not the -1/alpha_i scaling of the level dynamics");
            }
            break;
        }
        case NetworkKind::thermal: {
            auto sys = compile_thermal(net);
            out.descriptor = std::move(sys.plant);
            out.outdoor_load = std::move(sys.outdoor_load);
            break;
        }
        case NetworkKind::machine: {
            auto sys = compile_machine(net);
            out.rational = machine_plant(sys);
            out.machine = std::move(sys);
            break;
        }
        case NetworkKind::circulant: {
            auto sys = compile_circulant(net);
            if (!sys.hurwitz) {
                out.warnings.emplace_back("circulant A is not Hurwitz");
            }
            out.descriptor = std::move(sys.plant);
            break;
        }
    }
    return out;
}

}  // namespace hinfcf
