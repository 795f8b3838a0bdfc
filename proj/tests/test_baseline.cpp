#include <catch_amalgamated.hpp>

#include "hinfcf/baseline.hpp"
#include "hinfcf/random.hpp"
#include "hinfcf/synth.hpp"
#include "hinfcf/verify.hpp"

using namespace hinfcf;
using Catch::Approx;

namespace {

DescriptorPlant example1() { return DescriptorPlant::standard(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1)); }

DescriptorPlant comparison_plant() {
    Matrix a = Vector((Vector(3) << -1, -3, -2).finished()).asDiagonal();
    Matrix b(3, 3);
    b << -1, 0, 0, 1, 1, -1, 0, 0, 1;
    return DescriptorPlant::standard(a, b);
}

double g_inverse_root(const DescriptorPlant& p) { return 1.0 / std::sqrt(min_symmetric_eigenvalue(p.G())); }

}  // namespace

TEST_CASE("are_feasible on the scalar plant") {
    const AreProblem p = are_problem_from(example1());
    const auto ok = are_feasible(p, 1.0);
    REQUIRE(ok.has_value());
    // -2P - P^2 (1 - 1) + 1 = 0 at gamma = 1.
    CHECK(ok->P(0, 0) == Approx(0.5).epsilon(1e-10));
    CHECK(ok->K(0, 0) == Approx(-0.5).epsilon(1e-10));
    CHECK(!are_feasible(p, 0.6).has_value());
    CHECK_THROWS_AS(are_feasible(p, 0.0), Error);
}

TEST_CASE("feasibility is monotone in gamma") {
    const AreProblem p = are_problem_from(comparison_plant());
    bool seen_feasible = false;
    for (int i = 0; i <= 40; ++i) {
        const double gamma = 0.5 + 0.025 * i;
        const bool feasible = are_feasible(p, gamma).has_value();
        if (seen_feasible) CHECK(feasible);
        seen_feasible = seen_feasible || feasible;
    }
    CHECK(seen_feasible);
}

TEST_CASE("gamma_bisect reaches the optimal level") {
    const BisectionResult r1 = gamma_bisect(are_problem_from(example1()));
    CHECK(r1.gamma == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-5));
    CHECK(r1.gamma >= 1.0 / std::sqrt(2.0));

    const DescriptorPlant va = comparison_plant();
    const BisectionResult rv = gamma_bisect(are_problem_from(va));
    CHECK(rv.gamma == Approx(g_inverse_root(va)).epsilon(1e-4));

    // The returned gain achieves its level.
    Gain g;
    g.K = rv.K;
    const Certificate c = certify_optimality(va, g);
    REQUIRE(c.stable);
    CHECK(*c.hinf_norm <= rv.gamma * (1.0 + 1e-8));
}

TEST_CASE("gamma_bisect on buffer networks") {
    Rng rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        const NetworkModel net = random_buffer_network(5, rng);
        const DescriptorPlant p = compile_buffer(net);
        const BisectionResult r = gamma_bisect(are_problem_from(p));
        const double lb = lower_bound(p).value;
        CHECK(r.gamma >= lb - 1e-6);
        CHECK(r.gamma == Approx(g_inverse_root(p)).epsilon(1e-4));
    }
}

TEST_CASE("gamma_bisect rejects unstabilizable problems") {
    AreProblem p;
    p.A = Matrix::Constant(1, 1, 1.0);
    p.B1 = Matrix::Ones(1, 1);
    p.B2 = Matrix::Zero(1, 1);
    p.C1 = Matrix::Ones(1, 1);
    try {
        gamma_bisect(p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unstabilizable);
    }
    CHECK(!stabilizable(p.A, p.B2));
    CHECK(stabilizable(-p.A, p.B2));
}
