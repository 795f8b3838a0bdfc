#include <catch_amalgamated.hpp>

#include "hinfcf/sysmodel.hpp"
#include "oracles.hpp"

using namespace hinfcf;
using Catch::Approx;

namespace {

DescriptorPlant example1() { return DescriptorPlant::standard(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1)); }

DescriptorPlant asymmetric(double a) {
    Matrix am(2, 2);
    am << -a, a, 0, -1;
    Matrix b(2, 1);
    b << 1, 0;
    return DescriptorPlant::standard(am, b);
}

RationalPlant example2() {
    RationalMatrix m(1, 1);
    RationalMatrix n(1, 1);
    m(0, 0) = RationalFunction{Polynomial{4, 4, 1}, Polynomial::constant(1)};
    n(0, 0) = RationalFunction{Polynomial{1, 1}, Polynomial::constant(1)};
    return {m, n};
}

Gain gain_of(Matrix k, double w0 = 0.0) {
    Gain g;
    g.K = std::move(k);
    g.omega0 = w0;
    return g;
}

}  // namespace

TEST_CASE("DescriptorPlant validates its data") {
    CHECK_THROWS_AS(DescriptorPlant(Matrix::Identity(2, 2), Matrix::Identity(2, 3), Matrix::Ones(2, 1)), Error);
    CHECK_THROWS_AS(DescriptorPlant(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Ones(3, 1)), Error);
    try {
        DescriptorPlant::standard(Matrix::Zero(2, 2), Matrix::Ones(2, 1));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::near_singular);
    }
    const DescriptorPlant p = asymmetric(1.0);
    Matrix g(2, 2);
    g << 3, -1, -1, 1;
    CHECK((p.G() - g).norm() == 0.0);
    CHECK((p.F() - p.A().transpose()).norm() == 0.0);
}

TEST_CASE("close_loop") {
    const StateSpace ss = close_loop(example1(), gain_of(Matrix::Constant(1, 1, -1.0)));
    CHECK(ss.A(0, 0) == -2.0);
    CHECK(ss.C.rows() == 2);
    CHECK(ss.C(0, 0) == 1.0);
    CHECK(ss.C(1, 0) == -1.0);
    CHECK(ss.D.isZero(0.0));

    const DescriptorPlant p3 = asymmetric(1.0);
    const StateSpace open = close_loop(p3, gain_of(Matrix::Zero(1, 2)));
    CHECK((open.A - p3.A()).norm() == 0.0);

    Matrix k(1, 2);
    k << -1, 0;
    Matrix expected(2, 2);
    expected << -2, 1, 0, -1;
    CHECK((close_loop(p3, gain_of(k)).A - expected).norm() == 0.0);
}

TEST_CASE("close_loop rejects a singular E") {
    Matrix e = Matrix::Zero(2, 2);
    e(0, 0) = 1.0;
    const DescriptorPlant p(e, -Matrix::Identity(2, 2), Matrix::Ones(2, 1));
    try {
        close_loop(p, gain_of(Matrix::Zero(1, 2)));
        FAIL("expected an error");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::singular_pencil);
    }
}

TEST_CASE("eval_closed_rational") {
    const CMatrix z2 = eval_closed_rational(example2(), gain_of(Matrix::Constant(1, 1, -0.25)), 0.0);
    CHECK(std::abs(z2(0, 0) - 4.0 / 17.0) < 1e-15);
    CHECK(std::abs(z2(1, 0) + 1.0 / 17.0) < 1e-15);

    const RationalPlant p1 = to_rational(example1());
    const CMatrix z1 = eval_closed_rational(p1, gain_of(Matrix::Constant(1, 1, -1.0)), 0.0);
    CHECK(std::abs(z1(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(z1(1, 0) + 0.5) < 1e-15);

    const CMatrix far = eval_closed_rational(p1, gain_of(Matrix::Constant(1, 1, -1.0)), 1e6);
    CHECK(spectral_norm(far) < 2e-6);
}

TEST_CASE("eval_closed_rational reports a closed-loop pole on the axis") {
    // s + 1 - K with K = 1 has a pole at s = 0.
    try {
        eval_closed_rational(to_rational(example1()), gain_of(Matrix::Constant(1, 1, 1.0)), 0.0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::pole_on_axis);
    }
}

TEST_CASE("state-space and rational closed loops agree") {
    for (double a : {0.1, 1.0, 10.0}) {
        const DescriptorPlant p = asymmetric(a);
        Matrix k(1, 2);
        k << -1.0 / a, 0.3;
        const Gain g = gain_of(k);
        const StateSpace ss = close_loop(p, g);
        const RationalPlant r = to_rational(p);
        for (int i = 0; i < 50; ++i) {
            const double w = std::pow(10.0, -3.0 + 6.0 * i / 49.0);
            const double via_ss = spectral_norm(ss.response(w));
            const double via_rational = spectral_norm(eval_closed_rational(r, g, w));
            const double direct = oracle::closed_loop_sigma(p.E(), p.A(), p.B(), k, w);
            CHECK(via_ss == Approx(via_rational).epsilon(1e-9));
            CHECK(via_ss == Approx(direct).epsilon(1e-9));
        }
    }
}

TEST_CASE("descriptor round trip through the rational form") {
    Matrix e(2, 2);
    e << 2, 0, 0, 1;
    Matrix a(2, 2);
    a << -2, 1, 1, -2;
    const DescriptorPlant p(e, a, Matrix::Identity(2, 2));
    const auto back = as_descriptor(to_rational(p));
    REQUIRE(back.has_value());
    CHECK((back->E() - e).norm() == 0.0);
    CHECK((back->A() - a).norm() == 0.0);
    CHECK(!as_descriptor(example2()).has_value());
}

TEST_CASE("closed-loop characteristic polynomial") {
    // (s + 2)^2 + (s + 1) / 4 = (4 s^2 + 17 s + 17) / 4
    const Polynomial chi = closed_loop_characteristic_polynomial(example2(), Matrix::Constant(1, 1, -0.25));
    REQUIRE(chi.degree() == 2);
    CHECK(chi.coefficients()[0] == Approx(17.0 / 4));
    CHECK(chi.coefficients()[1] == Approx(17.0 / 4));
    CHECK(chi.coefficients()[2] == Approx(1.0));

    // Row denominators are cleared: 1/s + 1 with K = 0 has numerator s + 1.
    RationalMatrix m(1, 1);
    m(0, 0) = RationalFunction{Polynomial{1, 1}, Polynomial::monomial(1)};
    const RationalPlant p(m, RationalMatrix::constant(Matrix::Ones(1, 1)));
    const Polynomial chi2 = closed_loop_characteristic_polynomial(p, Matrix::Zero(1, 1));
    CHECK(chi2 == (Polynomial{1, 1}));
}

TEST_CASE("standing assumptions") {
    CHECK_NOTHROW(check_standing_assumptions(example2()));
    RationalMatrix m(1, 1);
    m(0, 0) = RationalFunction{Polynomial{0, 0, 1}, Polynomial::constant(1)};  // s^2: singular at 0
    const RationalPlant p(m, RationalMatrix::constant(Matrix::Zero(1, 1)));
    try {
        check_standing_assumptions(p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::rank_deficient);
    }
}

TEST_CASE("weighted objective requires full row rank") {
    Matrix q(2, 2);
    q << 1, 2, 2, 4;
    try {
        WeightedObjective w(q);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::rank_deficient);
    }
    Matrix q2(1, 2);
    q2 << 1, 1;
    const WeightedObjective w(q2);
    CHECK((w.Q() * w.Q_pinv() - Matrix::Identity(1, 1)).norm() < 1e-15);
}

TEST_CASE("gain formula names round trip") {
    for (auto f : {GainFormula::general, GainFormula::square, GainFormula::descriptor, GainFormula::symmetric,
                   GainFormula::weighted, GainFormula::buffer, GainFormula::droop, GainFormula::modal}) {
        CHECK(gain_formula_from_string(to_string(f)) == f);
    }
    CHECK(!gain_formula_from_string("nonsense").has_value());
}
