#pragma once

// Command-line front end. `run` is the whole program minus process setup, so tests can drive it
// with string streams.

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hinfcf/baseline.hpp"
#include "hinfcf/model_io.hpp"
#include "hinfcf/netgen.hpp"
#include "hinfcf/random.hpp"
#include "hinfcf/synth.hpp"
#include "hinfcf/verify.hpp"

namespace hinfcf::cli {

enum ExitCode : int {
    kOk = 0,
    kSchema = 2,
    kInvariant = 3,
    kSuboptimal = 4,
    kUnstable = 5,
    kInternal = 7,
};

inline int exit_code_for(Errc code) {
    switch (code) {
        case Errc::schema:
        case Errc::invalid_input:
        case Errc::dimension:
            return kSchema;
        case Errc::near_singular:
        case Errc::rank_deficient:
        case Errc::hypothesis_violation:
        case Errc::invalid_parameter:
        case Errc::duplicate_edge:
        case Errc::invalid_laplacian:
        case Errc::standing_assumption:
        case Errc::not_real:
        case Errc::singular_pencil:
        case Errc::unstabilizable:
        case Errc::degree_cap:
            return kInvariant;
        case Errc::pole_on_axis:
            return kUnstable;
        default:
            return kInternal;
    }
}

inline int exit_code_for(Verdict v) {
    switch (v) {
        case Verdict::optimal: return kOk;
        case Verdict::stable_but_suboptimal: return kSuboptimal;
        case Verdict::unstable: return kUnstable;
    }
    return kInternal;
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Options {
    std::string command;
    std::string model_path;
    std::string out_path;
    double tol = 1e-6;
    double grid_min = 1e-4;
    double grid_max = 1e4;
    int points = 201;
    std::optional<double> omega0;
    std::string weighted_path;
    std::string gain_path;
    bool paper_h = false;
    std::vector<std::string> settings;
};

/// A loaded model with its network compiled, ready for synthesis and verification.
struct Resolved {
    LoadedModel loaded;
    std::optional<DescriptorPlant> descriptor;
    std::optional<RationalPlant> rational;
    std::optional<NetworkModel> network;
    CompiledNetwork compiled;
};

inline Resolved resolve(const Options& opt) {
    Resolved r{load_model(opt.model_path), {}, {}, {}, {}};
    if (auto* d = std::get_if<DescriptorPlant>(&r.loaded.model)) {
        r.descriptor = *d;
    } else if (auto* p = std::get_if<RationalPlant>(&r.loaded.model)) {
        r.rational = *p;
    } else {
        NetworkModel net = std::get<NetworkModel>(r.loaded.model);
        if (opt.paper_h) {
            if (auto* ip = std::get_if<IrrigationParams>(&net.params)) ip->paper_h = true;
        }
        r.compiled = compile(net);
        r.descriptor = r.compiled.descriptor;
        r.rational = r.compiled.rational;
        r.network = std::move(net);
    }
    return r;
}

inline GridSpec grid_from(const Options& opt) {
    GridSpec g;
    g.omega_min = opt.grid_min;
    g.omega_max = opt.grid_max;
    g.points = opt.points;
    return g;
}

inline double omega0_for(const Options& opt, const Resolved& r) {
    if (opt.omega0) return *opt.omega0;
    if (r.loaded.omega0) return *r.loaded.omega0;
    return 0.0;
}

inline std::optional<WeightedObjective> weight_for(const Options& opt) {
    if (opt.weighted_path.empty()) return std::nullopt;
    const Json doc = read_json_file(opt.weighted_path);
    const Json& q = doc.is_object() && doc.contains("Q") ? doc["Q"] : doc;
    return WeightedObjective(detail::matrix(q, doc.is_object() ? "$.Q" : "$"));
}

inline Gain synthesize(const Options& opt, const Resolved& r, const WeightedObjective* weight) {
    const double w0 = omega0_for(opt, r);
    if (weight) {
        const RationalPlant p = r.rational ? *r.rational : to_rational(*r.descriptor);
        return weighted_gain(p, *weight, w0);
    }
    if (r.network) {
        switch (r.network->kind()) {
            case NetworkKind::buffer: return buffer_law(*r.network);
            case NetworkKind::machine: return machine_modal_gains(*r.compiled.machine);
            default: break;
        }
    }
    if (r.descriptor) {
        return w0 == 0.0 ? descriptor_gain(*r.descriptor) : closed_form_gain(to_rational(*r.descriptor), w0);
    }
    return closed_form_gain(*r.rational, w0);
}

inline Gain gain_for(const Options& opt, const Resolved& r, const WeightedObjective* weight) {
    if (!opt.gain_path.empty()) {
        Gain g = gain_from_json(read_json_file(opt.gain_path));
        if (opt.omega0) g.omega0 = *opt.omega0;
        return g;
    }
    return synthesize(opt, r, weight);
}

inline Json report_header(const Options& opt, const Resolved& r) {
    Json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["command"] = opt.command;
    j["model_digest"] = model_digest(r.loaded.document);
    for (std::size_t i = 0; i < r.compiled.warnings.size(); ++i) j["warnings"].push_back(r.compiled.warnings[i]);
    return j;
}

inline void emit(const Options& opt, const std::string& text, std::ostream& out) {
    if (opt.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(opt.out_path, std::ios::binary);
    if (!f) {
        throw Error(Errc::internal, "cannot write " + opt.out_path);
    }
    f << text;
}

inline void emit_json(const Options& opt, const Json& j, std::ostream& out) { emit(opt, j.dump(2) + "\n", out); }

inline CertifyOptions certify_options(const Options& opt, const WeightedObjective* weight) {
    CertifyOptions c;
    c.norm_tol = opt.tol;
    c.grid = grid_from(opt);
    c.weight = weight;
    return c;
}

inline int cmd_synth(const Options& opt, std::ostream& out) {
    const Resolved r = resolve(opt);
    const auto weight = weight_for(opt);
    const Gain g = synthesize(opt, r, weight ? &*weight : nullptr);
    Json j = report_header(opt, r);
    j["gain"] = to_json(g);
    j["sparsity"] = to_json(sparsity_pattern(g));
    emit_json(opt, j, out);
    return kOk;
}

inline int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err) {
    const Resolved r = resolve(opt);
    const auto weight = weight_for(opt);
    const WeightedObjective* wp = weight ? &*weight : nullptr;
    const Gain g = gain_for(opt, r, wp);
    const CertifyOptions copt = certify_options(opt, wp);
    Json j = report_header(opt, r);
    j["gain"] = to_json(g);
    j["sparsity"] = to_json(sparsity_pattern(g));
    Certificate cert;
    if (r.descriptor) {
        const DescriptorAnalysis a = analyze_descriptor(*r.descriptor, g, copt);
        cert = a.certificate;
        j["symmetric_hypotheses"] = to_json(a.hypotheses);
        if (a.inequality) j["frequency_inequality"] = to_json(*a.inequality);
        j["pencil"] = {{"stable", a.pencil.stable}, {"spectral_abscissa", a.pencil.abscissa}};
    } else {
        cert = certify_optimality(*r.rational, g, copt);
    }
    j["certificate"] = to_json(cert);
    emit_json(opt, j, out);
    err << "verdict: " << to_string(cert.verdict);
    if (cert.hinf_norm) err << ", norm " << format_double(*cert.hinf_norm);
    err << ", lower bound " << format_double(cert.lower_bound) << "\n";
    return exit_code_for(cert.verdict);
}

inline int cmd_lower_bound(const Options& opt, std::ostream& out) {
    const Resolved r = resolve(opt);
    const auto weight = weight_for(opt);
    const WeightedObjective* wp = weight ? &*weight : nullptr;
    const LowerBound lb = r.descriptor ? lower_bound(*r.descriptor, grid_from(opt), wp)
                                       : lower_bound(*r.rational, grid_from(opt), wp);
    Json j = report_header(opt, r);
    j["lower_bound"] = {{"value", lb.value}, {"omega", lb.omega}};
    emit_json(opt, j, out);
    return kOk;
}

inline int cmd_compare(const Options& opt, std::ostream& out) {
    const Resolved r = resolve(opt);
    if (!r.descriptor) {
        throw Error(Errc::invalid_input, "compare: needs a descriptor plant (or a network compiling to one)");
    }
    const DescriptorPlant& p = *r.descriptor;
    const Gain closed = descriptor_gain(p);
    const Certificate cert = certify_optimality(p, closed, certify_options(opt, nullptr));
    const BisectionResult are = gamma_bisect(are_problem_from(p), 1e-6);
    Gain baseline_gain;
    baseline_gain.K = are.K;
    const NormResult are_norm = hinf_norm_ss(close_loop(p, baseline_gain));
    Json j = report_header(opt, r);
    const SparsityReport sc = sparsity_pattern(closed);
    const SparsityReport sb = sparsity_pattern(are.K);
    j["closed_form"] = {{"gain", to_json(closed)},
                        {"zeros", sc.zeros},
                        {"entries_below_1e-2", count_below(closed.K, 1e-2)},
                        {"certificate", to_json(cert)}};
    j["baseline"] = {{"gamma", are.gamma},
                     {"K", to_json(are.K)},
                     {"zeros", sb.zeros},
                     {"entries_below_1e-2", count_below(are.K, 1e-2)},
                     {"closed_loop_norm", are_norm.norm},
                     {"bisection_iterations", are.iterations}};
    j["optimal_value"] = cert.lower_bound;
    emit_json(opt, j, out);
    return kOk;
}

inline int cmd_freqresp(const Options& opt, std::ostream& out) {
    const Resolved r = resolve(opt);
    const auto weight = weight_for(opt);
    const WeightedObjective* wp = weight ? &*weight : nullptr;
    const Gain g = gain_for(opt, r, wp);
    std::optional<StateSpace> ss;
    if (r.descriptor) ss = close_loop(*r.descriptor, g, wp);
    std::vector<std::pair<double, double>> rows;
    for (double w : frequency_grid(grid_from(opt))) {
        double v = 0.0;
        try {
            v = ss ? spectral_norm(ss->response(w)) : spectral_norm(eval_closed_rational(*r.rational, g, w, wp));
        } catch (const Error& e) {
            if (e.code() == Errc::pole_at_point) continue;
            throw;
        }
        rows.emplace_back(w, v);
    }
    std::size_t peak = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].second > rows[peak].second) peak = i;
    std::string csv = "omega,sigma_max,is_peak\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv += format_double(rows[i].first) + "," + format_double(rows[i].second) + "," + (i == peak ? "1" : "0") + "\n";
    }
    emit(opt, csv, out);
    return kOk;
}

// ---------------------------------------------------------------------------
// generate

namespace detail {

inline std::map<std::string, double> parse_settings(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& s : items) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(Errc::schema, "--set expects key=value, got '" + s + "'");
        }
        const std::string value = s.substr(eq + 1);
        double v = 0.0;
        const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
        if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
            throw Error(Errc::schema, "--set " + s.substr(0, eq) + ": '" + value + "' is not a number");
        }
        out[s.substr(0, eq)] = v;
    }
    return out;
}

inline Json generate_document(const std::string& name, const std::map<std::string, double>& set, bool paper_h) {
    auto get = [&](const char* key, double fallback) {
        auto it = set.find(key);
        return it == set.end() ? fallback : it->second;
    };
    auto count = [&](const char* key, int fallback) {
        const double v = get(key, fallback);
        if (v < 1 || v != std::floor(v)) throw Error(Errc::invalid_parameter, std::string(key) + " must be a positive integer");
        return static_cast<int>(v);
    };
    const bool seeded = set.count("seed") > 0;
    Rng rng(static_cast<std::uint64_t>(get("seed", 1)));
    if (name == "example1") {
        return model_document(DescriptorPlant::standard(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1)));
    }
    if (name == "example2") {
        RationalMatrix m(1, 1);
        RationalMatrix n(1, 1);
        m(0, 0) = RationalFunction{Polynomial{4.0, 4.0, 1.0}, Polynomial::constant(1.0)};
        n(0, 0) = RationalFunction{Polynomial{1.0, 1.0}, Polynomial::constant(1.0)};
        return model_document(RationalPlant(std::move(m), std::move(n)));
    }
    if (name == "example3") {
        const double a = get("a", 1.0);
        if (!(a > 0.0)) throw Error(Errc::invalid_parameter, "example3: a must be positive");
        Matrix am(2, 2);
        am << -a, a, 0.0, -1.0;
        Matrix b(2, 1);
        b << 1.0, 0.0;
        return model_document(DescriptorPlant::standard(am, b));
    }
    if (name == "va") {
        Matrix a = Vector((Vector(3) << -1.0, -3.0, -2.0).finished()).asDiagonal();
        Matrix b(3, 3);
        b << -1.0, 0.0, 0.0, 1.0, 1.0, -1.0, 0.0, 0.0, 1.0;
        return model_document(DescriptorPlant::standard(a, b));
    }
    if (name == "droop") {
        const double w0 = get("omega0", 1.0);
        return model_document(droop_plant(w0, get("zeta", 0.5)), w0);
    }
    NetworkModel net;
    if (name == "circulant") {
        net.nodes = 4;
        net.params = CirculantParams{{-3.0, 1.0, 0.0, 1.0}};
    } else if (name == "buffer") {
        if (seeded) {
            net = random_buffer_network(count("nodes", 5), rng, get("rate_min", 0.5), get("rate_max", 5.0));
        } else {
            net.nodes = 3;
            net.edges = {{0, 1}, {1, 2}};
            net.params = BufferParams{{1.0, 2.0, 3.0}};
        }
    } else if (name == "irrigation") {
        const int n = count("nodes", 2);
        if (seeded) {
            net = random_irrigation_cascade(n, rng);
        } else {
            const auto sz = static_cast<std::size_t>(n);
            net.nodes = n;
            net.params = IrrigationParams{std::vector<double>(sz, get("alpha", 1.0)),
                                          std::vector<double>(sz, get("beta", 1.0)),
                                          std::vector<double>(sz, get("tau", 1.0)), false};
        }
        std::get<IrrigationParams>(net.params).paper_h = paper_h;
    } else if (name == "thermal") {
        const int n = count("nodes", 2);
        ThermalParams tp;
        tp.c = get("c", 1.0);
        tp.masses.assign(static_cast<std::size_t>(n), 1.0);
        if (get("unequal", 0.0) != 0.0) tp.masses[0] = 2.0;
        tp.leak.assign(static_cast<std::size_t>(n), get("leak", 1.0));
        for (int i = 0; i + 1 < n; ++i) net.edges.emplace_back(i, i + 1);
        tp.conduction.assign(net.edges.size(), get("conduction", 1.0));
        tp.t_out = get("t_out", 0.0);
        net.nodes = n;
        net.params = tp;
    } else if (name == "machine") {
        const int n = count("nodes", 4);
        for (int i = 0; i < n && n > 1; ++i) {
            if (n == 2 && i == 1) break;
            net.edges.emplace_back(i, (i + 1) % n);
        }
        net.nodes = n;
        MachineParams mp;
        mp.m = get("m", 1.0);
        mp.d = get("d", 1.0);
        net.params = mp;
    } else {
        throw Error(Errc::schema, "generate: unknown model '" + name +
                                      "' (expected example1, example2, example3, va, droop, circulant, buffer, "
                                      "irrigation, thermal or machine)");
    }
    Json doc = model_document(net);
    parse_model(doc);  // validate what we are about to write
    return doc;
}

}  // namespace detail

inline int cmd_generate(const Options& opt, std::ostream& out) {
    const Json doc = detail::generate_document(opt.model_path, detail::parse_settings(opt.settings), opt.paper_h);
    emit_json(opt, doc, out);
    return kOk;
}

/// Runs one command line. Reports go to --out (or `out`); diagnostics go to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Closed-form H-infinity state feedback: synthesis, certification and network models", "hinfcf"};
    app.require_subcommand(1);
    Options opt;

    auto common = [&](CLI::App* sub, bool model) {
        if (model) sub->add_option("model", opt.model_path, "Model file (JSON)")->required();
        sub->add_option("--out", opt.out_path, "Write the report to this path instead of standard output");
        sub->add_option("--tol", opt.tol, "Relative tolerance for the norm/lower-bound gap")->capture_default_str();
        sub->add_option("--grid-min", opt.grid_min, "Smallest positive grid frequency")->capture_default_str();
        sub->add_option("--grid-max", opt.grid_max, "Largest grid frequency")->capture_default_str();
        sub->add_option("--points", opt.points, "Number of logarithmic grid points")->capture_default_str();
        sub->add_option("--omega0", opt.omega0, "Design frequency (default: model value, else 0)");
        sub->add_option("--weighted", opt.weighted_path, "JSON file holding the output weighting Q");
        sub->add_flag("--paper-h", opt.paper_h, "Irrigation: unit disturbance entries on the level rows");
    };
    CLI::App* synth = app.add_subcommand("synth", "Construct the closed-form gain");
    common(synth, true);
    CLI::App* verify = app.add_subcommand("verify", "Certify a gain (synthesized unless --gain is given)");
    common(verify, true);
    verify->add_option("--gain", opt.gain_path, "Gain file: {\"K\": [[...]], \"omega0\": w} or a synth report");
    CLI::App* lb = app.add_subcommand("lower-bound", "Least-squares lower bound on the achievable norm");
    common(lb, true);
    CLI::App* compare = app.add_subcommand("compare", "Closed-form gain against the Riccati baseline");
    common(compare, true);
    CLI::App* generate = app.add_subcommand("generate", "Write a model file");
    common(generate, false);
    generate->add_option("name", opt.model_path, "example1|example2|example3|va|droop|circulant|buffer|irrigation|thermal|machine")
        ->required();
    generate->add_option("--set", opt.settings, "Generator parameter key=value (repeatable)");
    CLI::App* freqresp = app.add_subcommand("freqresp", "Closed-loop sigma_max on the grid as CSV");
    common(freqresp, true);
    freqresp->add_option("--gain", opt.gain_path, "Gain file instead of the synthesized gain");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kSchema;
    }
    opt.command = app.get_subcommands().front()->get_name();
    try {
        if (opt.command == "synth") return cmd_synth(opt, out);
        if (opt.command == "verify") return cmd_verify(opt, out, err);
        if (opt.command == "lower-bound") return cmd_lower_bound(opt, out);
        if (opt.command == "compare") return cmd_compare(opt, out);
        if (opt.command == "generate") return cmd_generate(opt, out);
        if (opt.command == "freqresp") return cmd_freqresp(opt, out);
        err << "error: unknown command " << opt.command << "\n";
        return kSchema;
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const Json::exception& e) {
        err << "error [schema]: " << e.what() << "\n";
        return kSchema;
    } catch (const std::exception& e) {
        err << "error [internal]: " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace hinfcf::cli
