#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "polyhjb/problems.hpp"

using namespace polyhjb;

TEST_CASE("burgers n=4 nu=1 c=0 has a negative spectrum") {
    auto sys = make_burgers(4, 1.0, 0.0, {{0.2, 0.8}});
    sys.validate();
    Eigen::EigenSolver<Matrix> es(sys.Astiff);
    CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
}

TEST_CASE("burgers n=16 nu=0.05 c=2 is unstable") {
    auto sys = make_burgers(16, 0.05, 2.0, {{0.2, 0.8}});
    Eigen::EigenSolver<Matrix> es(sys.Astiff);
    CHECK(es.eigenvalues().real().maxCoeff() > 0.0);
}

TEST_CASE("burgers nonlinearity matches the dense stencil oracle") {
    const int n = 12;
    auto sys = make_burgers(n, 0.1, 0.0, {{0.2, 0.8}});
    const double h = 1.0 / (n + 1);

    // Independent stencil evaluation of -(1/3)[y (Dy) + D(y y)] with the
    // centered difference and homogeneous Dirichlet padding.
    auto stencil = [&](const Vector& y) {
        auto at = [&](int i) { return (i < 0 || i >= n) ? 0.0 : y[i]; };
        Vector out(n);
        for (int i = 0; i < n; ++i) {
            double dy = (at(i + 1) - at(i - 1)) / (2 * h);
            double dyy = (at(i + 1) * at(i + 1) - at(i - 1) * at(i - 1)) / (2 * h);
            out[i] = -(y[i] * dy + dyy) / 3.0;
        }
        return out;
    };

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Vector y(n);
        for (int i = 0; i < n; ++i) y[i] = val(rng);
        Vector got = eval_quadratic(sys.H, y);
        Vector expect = stencil(y);
        CHECK((got - expect).norm() <= 1e-13 * (1.0 + expect.norm()));
    }

    // Interior-padded constant-one vector, as a fixed probe.
    Vector ones = Vector::Ones(n);
    ones[0] = ones[n - 1] = 0.0;
    CHECK((eval_quadratic(sys.H, ones) - stencil(ones)).norm() <= 1e-13);
}

TEST_CASE("burgers convection is energy neutral") {
    auto sys = make_burgers(20, 0.05, 1.0, {{0.3, 0.6}});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Vector y(20);
        for (int i = 0; i < 20; ++i) y[i] = val(rng);
        CHECK(std::abs(eval_quadratic(sys.H, y).dot(y)) <= 1e-12 * y.squaredNorm() * y.norm());
    }
}

TEST_CASE("burgers control interval outside the grid raises") {
    CHECK_THROWS_AS(make_burgers(8, 0.1, 0.0, {{0.91, 0.95}}), InvalidArgumentError);
}

TEST_CASE("oseen mac: zbar = 0 gives a symmetric negative Stokes operator") {
    auto sys = make_oseen_mac(4, 4, 0.1, OseenZbarSpec{0.0, {}}, {0.25, 0.75, 0.25, 0.75}, 1);
    sys.validate();
    CHECK((sys.Astiff - sys.Astiff.transpose()).norm() <= 1e-12 * sys.Astiff.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sys.Astiff);
    CHECK(es.eigenvalues().maxCoeff() < 0.0);
}

TEST_CASE("oseen mac: streamfunction zbar is exactly divergence-free") {
    auto sys = make_oseen_mac(5, 4, 0.05, OseenZbarSpec{1.0, {}}, {0.25, 0.75, 0.25, 0.75}, 2);
    sys.validate();
    REQUIRE(sys.zbar.has_value());
    CHECK((sys.G->transpose() * *sys.zbar).norm() <= 1e-14 * (1.0 + sys.zbar->norm()));
}

TEST_CASE("oseen mac rejects a non-divergence-free raw zbar") {
    const int nx = 4, ny = 4;
    int n = (nx - 1) * ny + nx * (ny - 1);
    OseenZbarSpec bad{0.0, Vector::Ones(n)};
    CHECK_THROWS_AS(make_oseen_mac(nx, ny, 0.1, bad, {0.25, 0.75, 0.25, 0.75}, 1),
                    InvalidArgumentError);
}

TEST_CASE("oseen mac rejects a control region outside the domain") {
    CHECK_THROWS_AS(make_oseen_mac(4, 4, 0.1, OseenZbarSpec{}, {0.5, 1.5, 0.2, 0.8}, 1),
                    InvalidArgumentError);
}

TEST_CASE("oseen mac zbar is stationary for the manufactured forcing") {
    auto sys = make_oseen_mac(4, 5, 0.08, OseenZbarSpec{0.7, {}}, {0.2, 0.8, 0.2, 0.8}, 1, 0.5);
    sys.validate(1e-10);  // throws if the stationarity residual is off
}

TEST_CASE("random_quad is deterministic in the seed") {
    auto a = make_random_quad(6, 2, 99, true);
    auto b = make_random_quad(6, 2, 99, true);
    CHECK((a.Astiff - b.Astiff).norm() == 0.0);
    CHECK((a.B - b.B).norm() == 0.0);
    REQUIRE(a.H.entries().size() == b.H.entries().size());
    for (size_t i = 0; i < a.H.entries().size(); ++i)
        CHECK(a.H.entries()[i].v == b.H.entries()[i].v);
}

TEST_CASE("random_quad stable flag pins the spectral abscissa") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto sys = make_random_quad(7, 2, seed, true);
        Eigen::EigenSolver<Matrix> es(sys.Astiff);
        CHECK(es.eigenvalues().real().maxCoeff() <= -0.5 + 1e-10);
    }
}

TEST_CASE("random_quad scalar stable case") {
    auto sys = make_random_quad(1, 1, 4, true);
    CHECK(sys.Astiff(0, 0) <= -0.5 + 1e-12);
}

TEST_CASE("picard: zero forcing converges to zero immediately") {
    auto sys = make_burgers(8, 0.1, 0.0, {{0.2, 0.8}});
    sys.f_z = Vector::Zero(8);
    Vector z = solve_steady_picard(sys, 1e-12, 5);
    CHECK(z.norm() == 0.0);
}

TEST_CASE("picard: small forcing converges fast and residual is rechecked") {
    const int n = 16;
    auto sys = make_burgers(n, 0.1, 0.0, {{0.2, 0.8}});
    Vector f = Vector::Zero(n);
    f[n / 2] = 1e-3;
    sys.f_z = f;
    Vector z = solve_steady_picard(sys, 1e-10, 10);
    Vector resid = sys.Astiff * z + eval_quadratic(sys.H, z) + f;
    CHECK(resid.norm() <= 1e-10 * (1.0 + f.norm()));
}

TEST_CASE("picard: constrained Oseen recovers the manufactured steady state") {
    auto sys = make_oseen_mac(4, 4, 0.15, OseenZbarSpec{0.2, {}}, {0.2, 0.8, 0.2, 0.8}, 1);
    // Rebuild the unshifted system: Astiff without the zbar linearization.
    QuadraticSystem raw = sys;
    raw.Astiff = sys.Astiff - 2.0 * sys.H.frozen_left(*sys.zbar);
    raw.zbar.reset();
    Vector z = solve_steady_picard(raw, 1e-11, 50);
    CHECK((z - *sys.zbar).norm() <= 1e-8 * (1.0 + sys.zbar->norm()));
}

TEST_CASE("picard: oversized forcing raises instead of returning garbage") {
    const int n = 12;
    auto sys = make_burgers(n, 0.05, 0.0, {{0.2, 0.8}});
    sys.f_z = Vector::Constant(n, 1e4);
    CHECK_THROWS_AS(solve_steady_picard(sys, 1e-10, 30), ConvergenceError);
}

TEST_CASE("generated systems pass full validation") {
    make_burgers(16, 0.05, 2.0, {{0.2, 0.5}}).validate();
    make_oseen_mac(4, 4, 0.1, OseenZbarSpec{0.5, {}}, {0.25, 0.75, 0.25, 0.75}, 2).validate();
    make_random_quad(9, 3, 7, true).validate();
}
