#pragma once

// JSON model files and reports.
//
// Model document (format 1):
//   {"format": 1, "kind": "descriptor", "E": [[...]], "A": [[...]], "B": [[...]], "omega0": 0}
//   {"format": 1, "kind": "rational", "M": [[entry]], "N": [[entry]], "omega0": 0}
//       entry: number | {"num": [c0, c1, ...], "den": [c0, ...]}   (ascending coefficients)
//   {"format": 1, "kind": "network", "network": "buffer", "nodes": 3, "edges": [[0, 1]], "params": {...}}
// E defaults to the identity; "omega0" is optional. Matrices are row-major arrays of rows.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "json.hpp"

#include "hinfcf/netgen.hpp"
#include "hinfcf/sysmodel.hpp"
#include "hinfcf/verify.hpp"

namespace hinfcf {

using Json = nlohmann::json;

inline constexpr int kModelFormat = 1;
inline constexpr const char* kToolName = "hinfcf";
inline constexpr const char* kToolVersion = "1.0.0";

using Model = std::variant<DescriptorPlant, RationalPlant, NetworkModel>;

struct LoadedModel {
    Model model;
    std::optional<double> omega0;
    Json document;
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
    throw Error(Errc::schema, path + ": " + what);
}

inline const Json& field(const Json& j, const std::string& path, const char* key) {
    if (!j.is_object()) schema_error(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) schema_error(path + "." + key, "missing required field");
    return *it;
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) schema_error(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) schema_error(path, "expected a finite number");
    return v;
}

inline int integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) schema_error(path, "expected an integer");
    return j.get<int>();
}

inline std::vector<double> number_array(const Json& j, const std::string& path) {
    if (!j.is_array()) schema_error(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

template<typename Entry, typename F>
std::vector<std::vector<Entry>> rows_of(const Json& j, const std::string& path, F&& entry) {
    if (!j.is_array()) schema_error(path, "expected an array of rows");
    std::vector<std::vector<Entry>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_array()) schema_error(rp, "expected a row array");
        if (!rows.empty() && j[i].size() != rows.front().size()) schema_error(rp, "row length differs from row 0");
        std::vector<Entry> row;
        for (std::size_t k = 0; k < j[i].size(); ++k) row.push_back(entry(j[i][k], rp + "[" + std::to_string(k) + "]"));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix(const Json& j, const std::string& path) {
    const auto rows = rows_of<double>(j, path, number);
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    return m;
}

inline RationalFunction rational_entry(const Json& j, const std::string& path) {
    if (j.is_number()) {
        return RationalFunction::constant(number(j, path));
    }
    if (!j.is_object()) schema_error(path, "expected a number or {\"num\": [...], \"den\": [...]}");
    RationalFunction f;
    f.num = Polynomial(number_array(field(j, path, "num"), path + ".num"));
    if (j.contains("den")) {
        f.den = Polynomial(number_array(j["den"], path + ".den"));
        if (f.den.is_zero()) schema_error(path + ".den", "denominator is the zero polynomial");
    }
    return f;
}

inline RationalMatrix rational_matrix(const Json& j, const std::string& path) {
    const auto rows = rows_of<RationalFunction>(j, path, rational_entry);
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
    RationalMatrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    return m;
}

inline NetworkModel network(const Json& j, const std::string& path) {
    NetworkModel net;
    const Json& kind = field(j, path, "network");
    if (!kind.is_string()) schema_error(path + ".network", "expected a string");
    const std::string k = kind.get<std::string>();
    net.nodes = integer(field(j, path, "nodes"), path + ".nodes");
    if (net.nodes < 1) schema_error(path + ".nodes", "expected a positive node count");
    if (j.contains("edges")) {
        const Json& e = j["edges"];
        if (!e.is_array()) schema_error(path + ".edges", "expected an array of [i, j] pairs");
        for (std::size_t i = 0; i < e.size(); ++i) {
            const std::string ep = path + ".edges[" + std::to_string(i) + "]";
            if (!e[i].is_array() || e[i].size() != 2) schema_error(ep, "expected an [i, j] pair");
            net.edges.emplace_back(integer(e[i][0], ep + "[0]"), integer(e[i][1], ep + "[1]"));
        }
    }
    static const Json empty = Json::object();
    const Json& params = j.contains("params") ? j["params"] : empty;
    const std::string pp = path + ".params";
    if (!params.is_object()) schema_error(pp, "expected an object");
    auto opt_number = [&](const char* key, double fallback) {
        return params.contains(key) ? number(params[key], pp + "." + key) : fallback;
    };
    auto opt_array = [&](const char* key) {
        return params.contains(key) ? number_array(params[key], pp + "." + key) : std::vector<double>{};
    };
    if (k == "buffer") {
        net.params = BufferParams{number_array(field(params, pp, "rates"), pp + ".rates")};
    } else if (k == "irrigation") {
        IrrigationParams ip;
        ip.alpha = number_array(field(params, pp, "alpha"), pp + ".alpha");
        ip.beta = number_array(field(params, pp, "beta"), pp + ".beta");
        ip.tau = number_array(field(params, pp, "tau"), pp + ".tau");
        if (params.contains("paper_h")) {
            if (!params["paper_h"].is_boolean()) schema_error(pp + ".paper_h", "expected a boolean");
            ip.paper_h = params["paper_h"].get<bool>();
        }
        net.params = ip;
    } else if (k == "thermal") {
        ThermalParams tp;
        tp.c = opt_number("c", 1.0);
        tp.masses = number_array(field(params, pp, "masses"), pp + ".masses");
        tp.leak = number_array(field(params, pp, "leak"), pp + ".leak");
        tp.conduction = opt_array("conduction");
        tp.t_out = opt_number("t_out", 0.0);
        net.params = tp;
    } else if (k == "machine") {
        MachineParams mp;
        mp.m = opt_number("m", 1.0);
        mp.d = opt_number("d", 1.0);
        if (params.contains("laplacian")) mp.laplacian = matrix(params["laplacian"], pp + ".laplacian");
        mp.weights = opt_array("weights");
        net.params = mp;
    } else if (k == "circulant") {
        net.params = CirculantParams{number_array(field(params, pp, "generator"), pp + ".generator")};
    } else {
        schema_error(path + ".network", "unknown network kind '" + k +
                                            "' (expected buffer, irrigation, thermal, machine or circulant)");
    }
    return net;
}

}  // namespace detail

/// Parses a model document. Schema problems throw Errc::schema; plant invariants (singular A,
/// nonpositive parameters, ...) throw their own codes.
inline LoadedModel parse_model(const Json& doc) {
    const std::string root = "$";
    if (!doc.is_object()) detail::schema_error(root, "expected a JSON object");
    const int format = detail::integer(detail::field(doc, root, "format"), "$.format");
    if (format != kModelFormat) detail::schema_error("$.format", "unsupported format " + std::to_string(format));
    const Json& kind = detail::field(doc, root, "kind");
    if (!kind.is_string()) detail::schema_error("$.kind", "expected a string");
    LoadedModel out;
    out.document = doc;
    if (doc.contains("omega0")) {
        out.omega0 = detail::number(doc["omega0"], "$.omega0");
        if (*out.omega0 < 0.0) detail::schema_error("$.omega0", "expected a nonnegative frequency");
    }
    const std::string k = kind.get<std::string>();
    if (k == "descriptor") {
        Matrix a = detail::matrix(detail::field(doc, root, "A"), "$.A");
        Matrix b = detail::matrix(detail::field(doc, root, "B"), "$.B");
        Matrix e = doc.contains("E") ? detail::matrix(doc["E"], "$.E") : Matrix::Identity(a.rows(), a.rows());
        if (a.rows() != a.cols()) detail::schema_error("$.A", "expected a square matrix");
        if (e.rows() != a.rows() || e.cols() != a.cols()) detail::schema_error("$.E", "expected the same size as A");
        if (b.rows() != a.rows()) detail::schema_error("$.B", "expected one row per state");
        out.model = DescriptorPlant(std::move(e), std::move(a), std::move(b));
    } else if (k == "rational") {
        RationalMatrix m = detail::rational_matrix(detail::field(doc, root, "M"), "$.M");
        RationalMatrix n = detail::rational_matrix(detail::field(doc, root, "N"), "$.N");
        if (n.rows() != m.rows()) detail::schema_error("$.N", "expected as many rows as M");
        out.model = RationalPlant(std::move(m), std::move(n));
    } else if (k == "network") {
        NetworkModel net = detail::network(doc, root);
        compile(net);  // surfaces parameter invariants at load time
        out.model = std::move(net);
    } else {
        detail::schema_error("$.kind", "unknown kind '" + k + "' (expected descriptor, rational or network)");
    }
    return out;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::schema, path + ": cannot open file");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(Errc::schema, path + ": empty document");
    }
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(Errc::schema, path + ": " + e.what());
    }
}

inline LoadedModel load_model(const std::string& path) { return parse_model(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Writing

inline Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k) + 0.0);  // no negative zeros
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json to_json(const RationalFunction& f) {
    if (f.den == Polynomial::constant(1.0) && f.num.is_constant()) {
        return f.num.is_zero() ? 0.0 : f.num.coefficients()[0];
    }
    return Json{{"num", f.num.coefficients()}, {"den", f.den.coefficients()}};
}

inline Json to_json(const RationalMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json model_document(const DescriptorPlant& p, std::optional<double> omega0 = std::nullopt) {
    Json j{{"format", kModelFormat}, {"kind", "descriptor"}, {"E", to_json(p.E())}, {"A", to_json(p.A())},
           {"B", to_json(p.B())}};
    if (omega0) j["omega0"] = *omega0;
    return j;
}

inline Json model_document(const RationalPlant& p, std::optional<double> omega0 = std::nullopt) {
    Json j{{"format", kModelFormat}, {"kind", "rational"}, {"M", to_json(p.M())}, {"N", to_json(p.N())}};
    if (omega0) j["omega0"] = *omega0;
    return j;
}

inline Json model_document(const NetworkModel& net) {
    Json edges = Json::array();
    for (const auto& [i, k] : net.edges) edges.push_back({i, k});
    Json params;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BufferParams>) {
                params = {{"rates", p.rates}};
            } else if constexpr (std::is_same_v<T, IrrigationParams>) {
                params = {{"alpha", p.alpha}, {"beta", p.beta}, {"tau", p.tau}};
                if (p.paper_h) params["paper_h"] = true;
            } else if constexpr (std::is_same_v<T, ThermalParams>) {
                params = {{"c", p.c}, {"masses", p.masses}, {"leak", p.leak}, {"conduction", p.conduction},
                          {"t_out", p.t_out}};
            } else if constexpr (std::is_same_v<T, MachineParams>) {
                params = {{"m", p.m}, {"d", p.d}};
                if (p.laplacian) params["laplacian"] = to_json(*p.laplacian);
                if (!p.weights.empty()) params["weights"] = p.weights;
            } else {
                params = {{"generator", p.generator}};
            }
        },
        net.params);
    return Json{{"format", kModelFormat}, {"kind", "network"}, {"network", std::string(to_string(net.kind()))},
                {"nodes", net.nodes}, {"edges", edges}, {"params", params}};
}

/// 64-bit FNV-1a of the compact serialization, as 16 hex digits.
inline std::string model_digest(const Json& doc) {
    const std::string text = doc.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline Json to_json(const Gain& g) {
    Json j{{"K", to_json(g.K)}, {"formula", std::string(to_string(g.formula))}, {"omega0", g.omega0}};
    if (!g.modes.empty()) {
        Json modes = Json::array();
        for (const auto& m : g.modes) modes.push_back({{"eigenvalue", m.eigenvalue}, {"omega0", m.omega0}, {"gain", m.gain}});
        j["modes"] = modes;
    }
    return j;
}

/// Accepts either a bare gain object or any document with a "gain" member (e.g. a synth report).
inline Gain gain_from_json(const Json& doc) {
    const Json& j = doc.contains("gain") ? doc["gain"] : doc;
    const std::string path = doc.contains("gain") ? "$.gain" : "$";
    Gain g;
    g.K = detail::matrix(detail::field(j, path, "K"), path + ".K");
    if (j.contains("omega0")) g.omega0 = detail::number(j["omega0"], path + ".omega0");
    if (j.contains("formula")) {
        if (!j["formula"].is_string()) detail::schema_error(path + ".formula", "expected a string");
        auto f = gain_formula_from_string(j["formula"].get<std::string>());
        if (!f) detail::schema_error(path + ".formula", "unknown formula tag");
        g.formula = *f;
    }
    return g;
}

inline Json to_json(const Certificate& c) {
    Json j{{"verdict", std::string(to_string(c.verdict))},
           {"stable", c.stable},
           {"stability_method", c.stability_method},
           {"lower_bound", c.lower_bound},
           {"lower_bound_omega", c.lower_bound_omega},
           {"omega0", c.omega0}};
    if (std::isfinite(c.spectral_abscissa)) j["spectral_abscissa"] = c.spectral_abscissa;
    if (c.hinf_norm) {
        j["hinf_norm"] = *c.hinf_norm;
        j["peak_frequency"] = *c.peak_frequency;
        j["norm_method"] = c.norm_method;
        j["sigma_at_omega0"] = c.sigma_at_omega0;
        j["gap"] = c.gap;
    }
    if (!c.failed_criterion.empty()) j["failed_criterion"] = c.failed_criterion;
    j["tolerances"] = {{"norm", c.options.norm_tol},
                       {"state_space_norm", c.options.ss_tol},
                       {"peak", c.options.peak_tol},
                       {"tie", c.options.tie_tol},
                       {"grid", {{"omega_min", c.options.grid.omega_min},
                                 {"omega_max", c.options.grid.omega_max},
                                 {"points", c.options.grid.points}}}};
    return j;
}

inline Json to_json(const SparsityReport& s) { return Json{{"zeros", s.zeros}, {"nonzeros", s.nonzeros}}; }

inline Json to_json(const SymmetricReport& r) {
    return Json{{"holds", r.holds()},           {"e_symmetric", r.e_symmetric},
                {"a_symmetric", r.a_symmetric}, {"e_positive_definite", r.e_positive_definite},
                {"a_negative_definite", r.a_negative_definite}, {"commute", r.commute},
                {"commutator_norm", r.commutator_norm}};
}

inline Json to_json(const InequalityReport& r) {
    return Json{{"holds", r.holds},           {"min_eig", r.min_eig},         {"omega_at_min", r.omega_at_min},
                {"checked_max", r.checked_max}, {"tail_active", r.tail_active}, {"tail_omega", r.tail_omega}};
}

}  // namespace hinfcf
