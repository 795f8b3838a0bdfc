#include <catch_amalgamated.hpp>

#include "hinfcf/baseline.hpp"
#include "hinfcf/random.hpp"
#include "hinfcf/synth.hpp"
#include "hinfcf/verify.hpp"

using namespace hinfcf;
using Catch::Approx;

namespace {

CMatrix random_complex(Eigen::Index r, Eigen::Index c, Rng& rng) {
    CMatrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = Complex(rng.normal(), rng.normal());
    return m;
}

Matrix random_real(Eigen::Index r, Eigen::Index c, Rng& rng) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rng.normal();
    return m;
}

CMatrix random_unitary(Eigen::Index n, Rng& rng) {
    Eigen::HouseholderQR<CMatrix> qr(random_complex(n, n, rng));
    return qr.householderQ() * CMatrix::Identity(n, n);
}

Matrix permutation_matrix(const std::vector<int>& perm) {
    const auto n = static_cast<Eigen::Index>(perm.size());
    Matrix p = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) p(i, perm[static_cast<std::size_t>(i)]) = 1.0;
    return p;
}

/// Symmetric negative definite A, SPD E commuting with it (shared eigenvectors), random B.
DescriptorPlant random_symmetric_plant(Eigen::Index n, Eigen::Index m, Rng& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_real(n, n, rng));
    const Matrix u = qr.householderQ() * Matrix::Identity(n, n);
    Vector ea(n);
    Vector ee(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ea(i) = -rng.uniform(0.5, 3.0);
        ee(i) = rng.uniform(0.5, 2.0);
    }
    Matrix a = u * ea.asDiagonal() * u.transpose();
    Matrix e = u * ee.asDiagonal() * u.transpose();
    a = 0.5 * (a + a.transpose());
    e = 0.5 * (e + e.transpose());
    return DescriptorPlant(e, a, random_real(n, m, rng));
}

DescriptorPlant asymmetric(double a) {
    Matrix am(2, 2);
    am << -a, a, 0, -1;
    Matrix b(2, 1);
    b << 1, 0;
    return DescriptorPlant::standard(am, b);
}

double g_inverse_root(const Matrix& a, const Matrix& b) {
    return 1.0 / std::sqrt(min_symmetric_eigenvalue(Matrix(a * a.transpose() + b * b.transpose())));
}

}  // namespace

TEST_CASE("Moore-Penrose identities") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = random_complex(5, 8, rng);
        const CMatrix x = pseudoinverse(a);
        CHECK((a * x * a - a).norm() < 1e-10);
        CHECK((x * a * x - x).norm() < 1e-10);
        CHECK(((a * x).adjoint() - a * x).norm() < 1e-10);
        CHECK(((x * a).adjoint() - x * a).norm() < 1e-10);
    }
}

TEST_CASE("full-row-rank pseudoinverse closed form") {
    Rng rng(102);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix a = random_complex(5, 8, rng);
        const CMatrix closed = a.adjoint() * (a * a.adjoint()).inverse();
        CHECK((pseudoinverse(a) - closed).norm() < 1e-10);
    }
}

TEST_CASE("spectral norm is unitarily invariant") {
    Rng rng(103);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix m = random_complex(5, 8, rng);
        const CMatrix u = random_unitary(5, rng);
        const CMatrix v = random_unitary(8, rng);
        CHECK(spectral_norm(CMatrix(u * m * v)) == Approx(spectral_norm(m)).epsilon(1e-10));
    }
}

TEST_CASE("eigenvalues are invariant under permutation similarity") {
    Rng rng(104);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = random_real(6, 6, rng);
        const Matrix p = permutation_matrix(rng.permutation(6));
        auto a = eigenvalues(m);
        auto b = eigenvalues(Matrix(p * m * p.transpose()));
        sort_by_real_then_imag(a);
        sort_by_real_then_imag(b);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8);
    }
}

TEST_CASE("descriptor_gain scaling invariance") {
    Rng rng(105);
    for (int trial = 0; trial < 10; ++trial) {
        const DescriptorPlant p = random_symmetric_plant(4, 3, rng);
        const Matrix k = descriptor_gain(p).K;
        for (double c : {1e-3, 0.5, 7.0, 1e3}) {
            const DescriptorPlant q(p.E(), c * p.A(), c * p.B());
            CHECK((descriptor_gain(q).K - k).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("descriptor_gain permutation equivariance") {
    Rng rng(106);
    for (int trial = 0; trial < 10; ++trial) {
        const DescriptorPlant p = random_symmetric_plant(5, 2, rng);
        const Matrix pm = permutation_matrix(rng.permutation(5));
        const DescriptorPlant q(pm * p.E() * pm.transpose(), pm * p.A() * pm.transpose(), pm * p.B());
        const Matrix expected = descriptor_gain(p).K * pm.transpose();
        CHECK((descriptor_gain(q).K - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("buffer_law matches the descriptor gain on random graphs") {
    Rng rng(107);
    for (int n : {2, 5, 20, 50}) {
        for (int trial = 0; trial < 3; ++trial) {
            const NetworkModel net = random_buffer_network(n, rng);
            const DescriptorPlant p = compile_buffer(net);
            const Matrix via_formula = p.B().transpose() * p.A().inverse();
            CHECK((buffer_law(net).K - via_formula).cwiseAbs().maxCoeff() <= 1e-14);
            CHECK((buffer_law(net).K - descriptor_gain(p).K).cwiseAbs().maxCoeff() <= 1e-14);
        }
    }
}

TEST_CASE("weighted_gain with Q = I is the closed-form gain") {
    Rng rng(108);
    for (int trial = 0; trial < 10; ++trial) {
        const DescriptorPlant p = random_symmetric_plant(3, 2, rng);
        const RationalPlant r = to_rational(p);
        const WeightedObjective id(Matrix::Identity(3, 3));
        CHECK((weighted_gain(r, id).K - closed_form_gain(r).K).norm() == 0.0);
    }
}

TEST_CASE("circulant plants keep circulant gains") {
    Rng rng(109);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + rng.below(6);
        std::vector<double> gen(static_cast<std::size_t>(n));
        gen[0] = -static_cast<double>(n) - 1.0;
        for (int i = 1; i < n; ++i) gen[static_cast<std::size_t>(i)] = rng.uniform(0.0, 1.0);
        const CirculantSystem sys = compile_circulant(gen);
        const Matrix k = descriptor_gain(sys.plant).K;
        for (Eigen::Index i = 1; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                CHECK(std::abs(k(i, j) - k(i - 1, (j - 1 + n) % n)) <= 1e-12);
            }
        }
        Matrix shift = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) shift(i, (i + 1) % n) = 1.0;
        CHECK((shift * sys.plant.A() - sys.plant.A() * shift).norm() == 0.0);
    }
}

TEST_CASE("lower bound never exceeds the norm of a stabilizing gain") {
    Rng rng(110);
    for (int plant = 0; plant < 5; ++plant) {
        const DescriptorPlant p = random_symmetric_plant(3, 2, rng);
        REQUIRE(check_symmetric_hypotheses(p).holds());
        const Gain opt = descriptor_gain(p);
        const double lb = lower_bound(p).value;
        int tested = 0;
        for (int trial = 0; trial < 100; ++trial) {
            Gain g = opt;
            g.K += 0.3 * random_real(opt.K.rows(), opt.K.cols(), rng);
            if (!pencil_stability(p, g).stable) continue;
            ++tested;
            CHECK(hinf_norm_ss(close_loop(p, g)).norm >= lb - 1e-9);
        }
        CHECK(tested > 50);
    }
}

TEST_CASE("pseudoinverse identity at random frequencies") {
    Rng rng(111);
    const RationalPlant p = to_rational(random_symmetric_plant(3, 2, rng));
    for (int i = 0; i < 20; ++i) {
        const double w = std::pow(10.0, rng.uniform(-3.0, 3.0));
        const CMatrix mj = p.M_at(w);
        const CMatrix nj = p.N_at(w);
        CMatrix stacked(mj.rows(), mj.cols() + nj.cols());
        stacked << mj, -nj;
        const CMatrix gram = mj * mj.adjoint() + nj * nj.adjoint();
        const double lhs = spectral_norm(pseudoinverse(stacked));
        const double rhs = std::sqrt(spectral_norm(CMatrix(gram.inverse())));
        CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, rhs));
    }
}

TEST_CASE("state-space and grid norms agree on the regression plants") {
    std::vector<std::pair<DescriptorPlant, Gain>> cases;
    cases.emplace_back(DescriptorPlant::standard(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1)), Gain{});
    cases.back().second = descriptor_gain(cases.back().first);
    for (double a : {0.1, 0.5, 1.0, 2.0, 10.0}) cases.emplace_back(asymmetric(a), descriptor_gain(asymmetric(a)));
    Matrix a = Vector((Vector(3) << -1, -3, -2).finished()).asDiagonal();
    Matrix b(3, 3);
    b << -1, 0, 0, 1, 1, -1, 0, 0, 1;
    const DescriptorPlant va = DescriptorPlant::standard(a, b);
    cases.emplace_back(va, descriptor_gain(va));
    const CirculantSystem circ = compile_circulant(std::vector<double>{-3, 1, 0, 1});
    cases.emplace_back(circ.plant, descriptor_gain(circ.plant));
    Rng rng(112);
    const DescriptorPlant buf = compile_buffer(random_buffer_network(5, rng));
    cases.emplace_back(buf, descriptor_gain(buf));

    for (const auto& [p, g] : cases) {
        const double ss = hinf_norm_ss(close_loop(p, g)).norm;
        const double grid = hinf_norm_grid(to_rational(p), g).norm;
        CHECK(std::abs(ss - grid) <= 1e-6 * (1.0 + ss));
    }
}

TEST_CASE("buffer closed loops are Metzler with two gain entries per input") {
    Rng rng(113);
    for (int n : {3, 8, 20}) {
        const NetworkModel net = random_buffer_network(n, rng);
        const DescriptorPlant p = compile_buffer(net);
        const Matrix k = buffer_law(net).K;
        const Matrix acl = p.A() + p.B() * k;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) CHECK(acl(i, j) >= 0.0);
        for (Eigen::Index r = 0; r < k.rows(); ++r) CHECK((k.row(r).array() != 0.0).count() == 2);
    }
}

TEST_CASE("adding a buffer edge leaves existing gain rows unchanged") {
    Rng rng(114);
    for (int trial = 0; trial < 10; ++trial) {
        NetworkModel net = random_buffer_network(6, rng);
        const Matrix before = buffer_law(net).K;
        if (!add_random_edge(net, rng)) continue;
        const Matrix after = buffer_law(net).K;
        REQUIRE(after.rows() == before.rows() + 2);
        CHECK((after.topRows(before.rows()) - before).norm() == 0.0);
        CHECK((descriptor_gain(compile_buffer(net)).K.topRows(before.rows()) - before).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("thermal state matrices are negative definite") {
    Rng rng(115);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + rng.below(8);
        NetworkModel net;
        net.nodes = n;
        net.edges = random_connected_edges(n, 2, rng);
        ThermalParams tp;
        tp.c = rng.uniform(0.1, 5.0);
        for (int i = 0; i < n; ++i) {
            tp.masses.push_back(rng.uniform(0.1, 10.0));
            tp.leak.push_back(rng.uniform(0.01, 5.0));
        }
        for (std::size_t e = 0; e < net.edges.size(); ++e) tp.conduction.push_back(rng.uniform(0.01, 5.0));
        net.params = tp;
        const Matrix a = compile_thermal(net).plant.A();
        CHECK((a - a.transpose()).norm() == 0.0);
        CHECK(min_symmetric_eigenvalue(Matrix(-a)) > 0.0);
    }
}

TEST_CASE("symmetric plants certify with the Gram optimal value") {
    Rng rng(116);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix e = Matrix::Identity(4, 4);
        const DescriptorPlant p0 = random_symmetric_plant(4, 2, rng);
        const DescriptorPlant p(e, p0.A(), p0.B());
        const Certificate c = certify_optimality(p, descriptor_gain(p));
        CHECK(c.verdict == Verdict::optimal);
        CHECK(*c.hinf_norm == Approx(g_inverse_root(p.A(), p.B())).epsilon(1e-6));
    }
}

TEST_CASE("baseline gains are no sparser than the closed-form gains") {
    Rng rng(117);
    for (int trial = 0; trial < 3; ++trial) {
        const DescriptorPlant p = compile_buffer(random_buffer_network(4, rng));
        const BisectionResult r = gamma_bisect(are_problem_from(p));
        CHECK(r.gamma == Approx(g_inverse_root(p.A(), p.B())).epsilon(1e-4));
        CHECK(count_below(r.K, 1e-8) <= count_below(descriptor_gain(p).K, 1e-8));
    }
}
