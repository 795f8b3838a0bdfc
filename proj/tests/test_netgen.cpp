#include <catch_amalgamated.hpp>

#include "hinfcf/netgen.hpp"
#include "hinfcf/random.hpp"
#include "hinfcf/synth.hpp"

using namespace hinfcf;
using Catch::Approx;

namespace {

NetworkModel buffer(int nodes, std::vector<Edge> edges, std::vector<double> rates) {
    NetworkModel net;
    net.nodes = nodes;
    net.edges = std::move(edges);
    net.params = BufferParams{std::move(rates)};
    return net;
}

NetworkModel irrigation(int pools, double alpha, double beta, double tau) {
    const auto n = static_cast<std::size_t>(pools);
    NetworkModel net;
    net.nodes = pools;
    net.params = IrrigationParams{std::vector<double>(n, alpha), std::vector<double>(n, beta),
                                  std::vector<double>(n, tau), false};
    return net;
}

NetworkModel thermal(std::vector<double> masses, std::vector<double> leak, std::vector<Edge> edges,
                     std::vector<double> conduction) {
    NetworkModel net;
    net.nodes = static_cast<int>(masses.size());
    net.edges = std::move(edges);
    ThermalParams p;
    p.masses = std::move(masses);
    p.leak = std::move(leak);
    p.conduction = std::move(conduction);
    net.params = p;
    return net;
}

template<typename F>
Errc error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::internal;
}

}  // namespace

TEST_CASE("compile_buffer") {
    const DescriptorPlant p = compile_buffer(buffer(3, {{0, 1}, {1, 2}}, {1, 2, 3}));
    Matrix a = Vector((Vector(3) << -1, -2, -3).finished()).asDiagonal();
    CHECK((p.A() - a).norm() == 0.0);
    CHECK((p.E() - Matrix::Identity(3, 3)).norm() == 0.0);
    REQUIRE(p.B().rows() == 3);
    REQUIRE(p.B().cols() == 4);
    // Column order: u_01, u_10, u_12, u_21.
    CHECK(p.B()(0, 0) == 1.0);
    CHECK(p.B()(1, 0) == -1.0);
    CHECK(p.B()(1, 1) == 1.0);
    CHECK(p.B()(0, 1) == -1.0);

    const DescriptorPlant single = compile_buffer(buffer(1, {}, {2.0}));
    CHECK(single.A()(0, 0) == -2.0);
    CHECK(single.B().cols() == 0);

    const DescriptorPlant complete = compile_buffer(buffer(3, {{0, 1}, {0, 2}, {1, 2}}, {1, 1, 1}));
    REQUIRE(complete.B().cols() == 6);
    for (Eigen::Index c = 0; c < 6; ++c) {
        CHECK(complete.B().col(c).sum() == 0.0);
        CHECK(complete.B().col(c).cwiseAbs().sum() == 2.0);
        CHECK(complete.B().col(c).maxCoeff() == 1.0);
    }
}

TEST_CASE("compile_buffer errors") {
    CHECK(error_code([] { compile_buffer(buffer(2, {{0, 1}, {1, 0}}, {1, 1})); }) == Errc::duplicate_edge);
    CHECK(error_code([] { compile_buffer(buffer(2, {{0, 1}}, {1, -1})); }) == Errc::invalid_parameter);
    CHECK(error_code([] { compile_buffer(buffer(2, {{0, 2}}, {1, 1})); }) == Errc::invalid_input);
    CHECK(error_code([] { compile_buffer(buffer(2, {{1, 1}}, {1, 1})); }) == Errc::invalid_input);
}

TEST_CASE("compile_irrigation") {
    const IrrigationSystem one = compile_irrigation(irrigation(1, 1, 1, 1));
    Matrix a(2, 2);
    a << -1, 1, 0, -1;
    CHECK((one.plant.A() - a).norm() == 0.0);
    CHECK(one.plant.B()(0, 0) == 0.0);
    CHECK(one.plant.B()(1, 0) == 1.0);

    const IrrigationSystem two = compile_irrigation(irrigation(2, 1, 1, 1));
    Vector col(4);
    col << 0, 1, -1, 0;
    CHECK((two.plant.B().col(0) - col).norm() == 0.0);
    Vector last(4);
    last << 0, 0, 0, 1;
    CHECK((two.plant.B().col(1) - last).norm() == 0.0);
    CHECK(two.H(0, 0) == -1.0);
    CHECK(two.H(2, 1) == -1.0);
    CHECK(two.H(1, 0) == 0.0);
}

TEST_CASE("irrigation disturbance map variants") {
    NetworkModel net = irrigation(2, 2.0, 1.0, 1.0);
    CHECK(compile_irrigation(net).H(0, 0) == -0.5);
    std::get<IrrigationParams>(net.params).paper_h = true;
    const IrrigationSystem sys = compile_irrigation(net);
    CHECK(sys.H(0, 0) == 1.0);
    CHECK(sys.H(2, 1) == 1.0);
    CHECK(!compile(net).warnings.empty());
}

TEST_CASE("irrigation gain reproduces the last-pool law") {
    // u_N = -q_N / beta_N - r_N
    for (double beta : {0.5, 2.0, 7.0}) {
        NetworkModel net = irrigation(3, 1.7, beta, 0.4);
        const Gain g = descriptor_gain(compile_irrigation(net).plant);
        const Eigen::Index last = g.K.rows() - 1;
        CHECK(g.K(last, 4) == Approx(-1.0 / beta).epsilon(1e-12));
        CHECK(g.K(last, 5) == Approx(-1.0).epsilon(1e-12));
        CHECK(g.K.row(last).head(4).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("compile_irrigation rejects nonpositive parameters") {
    CHECK(error_code([] { compile_irrigation(irrigation(2, 1, 0, 1)); }) == Errc::invalid_parameter);
}

TEST_CASE("compile_thermal") {
    const ThermalSystem two = compile_thermal(thermal({1, 1}, {1, 1}, {{0, 1}}, {1}));
    Matrix a(2, 2);
    a << -2, 1, 1, -2;
    CHECK((two.plant.A() - a).norm() == 0.0);
    CHECK((two.plant.E() - Matrix::Identity(2, 2)).norm() == 0.0);
    CHECK((two.plant.B() - Matrix::Identity(2, 2)).norm() == 0.0);

    const ThermalSystem one = compile_thermal(thermal({1}, {3}, {}, {}));
    CHECK(one.plant.A()(0, 0) == -3.0);

    NetworkModel net = thermal({2, 1}, {1, 1}, {{0, 1}}, {1});
    std::get<ThermalParams>(net.params).t_out = 10.0;
    std::get<ThermalParams>(net.params).c = 0.5;
    const ThermalSystem sys = compile_thermal(net);
    CHECK(sys.plant.E()(0, 0) == 1.0);
    CHECK(sys.plant.E()(1, 1) == 0.5);
    CHECK(sys.outdoor_load(0) == 10.0);

    CHECK(error_code([] { compile_thermal(thermal({1, 1}, {1, 0}, {{0, 1}}, {1})); }) == Errc::invalid_parameter);
}

TEST_CASE("thermal masses decide the commutation hypothesis") {
    CHECK(check_symmetric_hypotheses(compile_thermal(thermal({1, 1}, {1, 1}, {{0, 1}}, {1})).plant).holds());
    const SymmetricReport r = check_symmetric_hypotheses(compile_thermal(thermal({2, 1}, {1, 1}, {{0, 1}}, {1})).plant);
    CHECK(!r.holds());
    CHECK(!r.commute);
    CHECK(r.a_negative_definite);
    CHECK(r.e_positive_definite);
}

TEST_CASE("compile_machine") {
    NetworkModel path;
    path.nodes = 2;
    path.edges = {{0, 1}};
    path.params = MachineParams{};
    Matrix l(2, 2);
    l << 1, -1, -1, 1;
    CHECK((compile_machine(path).L - l).norm() == 0.0);

    NetworkModel cycle;
    cycle.nodes = 4;
    cycle.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    cycle.params = MachineParams{};
    Eigen::SelfAdjointEigenSolver<Matrix> eig(compile_machine(cycle).L);
    const Vector expected = (Vector(4) << 0, 2, 2, 4).finished();
    CHECK((eig.eigenvalues() - expected).norm() < 1e-12);

    NetworkModel bad;
    bad.nodes = 2;
    MachineParams mp;
    Matrix asym(2, 2);
    asym << 1, -1, -0.5, 0.5;
    mp.laplacian = asym;
    bad.params = mp;
    CHECK(error_code([&] { compile_machine(bad); }) == Errc::invalid_laplacian);
    Matrix positive(2, 2);
    positive << -1, 1, 1, -1;
    std::get<MachineParams>(bad.params).laplacian = positive;
    CHECK(error_code([&] { compile_machine(bad); }) == Errc::invalid_laplacian);
}

TEST_CASE("compile_circulant") {
    const CirculantSystem sys = compile_circulant(std::vector<double>{-3, 1, 0, 1});
    Matrix a(4, 4);
    a << -3, 1, 0, 1, 1, -3, 1, 0, 0, 1, -3, 1, 1, 0, 1, -3;
    CHECK((sys.plant.A() - a).norm() == 0.0);
    CHECK(sys.hurwitz);
    CHECK(compile_circulant(std::vector<double>{-1}).plant.A()(0, 0) == -1.0);
    CHECK(!compile_circulant(std::vector<double>{1, 0.5, 0.5}).hurwitz);

    NetworkModel net;
    net.nodes = 3;
    net.params = CirculantParams{{1, 0.5, 0.5}};
    CHECK(compile(net).warnings.size() == 1);
}

TEST_CASE("random buffer networks are connected and simple") {
    Rng rng(7);
    for (int n : {2, 5, 20}) {
        const NetworkModel net = random_buffer_network(n, rng);
        CHECK_NOTHROW(compile_buffer(net));
        // Connectivity by union-find.
        std::vector<int> parent(static_cast<std::size_t>(n));
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
            return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]);
        };
        for (const auto& [i, j] : net.edges) parent[static_cast<std::size_t>(find(i))] = find(j);
        for (int i = 0; i < n; ++i) CHECK(find(i) == find(0));
        for (double a : std::get<BufferParams>(net.params).rates) {
            CHECK(a >= 0.5);
            CHECK(a <= 5.0);
        }
    }
}

TEST_CASE("Rng is reproducible") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    Rng c(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
