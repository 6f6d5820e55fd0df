#include <doctest.h>

#include <random>

#include "polyhjb/model.hpp"

using namespace polyhjb;

namespace {

SymQuadTensor random_tensor(int n, int nnz, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> idx(0, n - 1);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<TensorEntry> raw;
    for (int e = 0; e < nnz; ++e) raw.push_back({idx(rng), idx(rng), idx(rng), val(rng)});
    return symmetrize_tensor(raw, n);
}

Vector random_vector(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = val(rng);
    return v;
}

}  // namespace

TEST_CASE("eval_quadratic: empty tensor gives zero") {
    SymQuadTensor H(5);
    Vector y = Vector::LinSpaced(5, 1.0, 5.0);
    CHECK(eval_quadratic(H, y).norm() == 0.0);
}

TEST_CASE("eval_quadratic: scalar case") {
    auto H = symmetrize_tensor({{0, 0, 0, 2.5}}, 1);
    Vector y(1);
    y << 3.0;
    CHECK(eval_quadratic(H, y)[0] == doctest::Approx(2.5 * 9.0).epsilon(1e-15));
}

TEST_CASE("eval_quadratic matches dense matricization oracle") {
    // Oracle built independently: dense H (n x n^2) times y (x) y.
    const int n = 3;
    auto H = random_tensor(n, 8, 42);
    Matrix dense = Matrix::Zero(n, n * n);
    for (const auto& e : H.entries()) dense(e.i, e.j * n + e.k) += e.v;

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Vector y = random_vector(n, rng);
        Vector kron(n * n);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) kron[j * n + k] = y[j] * y[k];
        Vector expect = dense * kron;
        CHECK((eval_quadratic(H, y) - expect).norm() <= 1e-13 * (1.0 + expect.norm()));
    }
}

TEST_CASE("eval_quadratic dimension mismatch raises") {
    auto H = random_tensor(4, 6, 1);
    Vector y = Vector::Zero(5);
    CHECK_THROWS_AS(eval_quadratic(H, y), DimensionError);
}

TEST_CASE("eval_linearized: zero base point annihilates") {
    auto H = random_tensor(6, 10, 3);
    std::mt19937_64 rng(11);
    Vector z = random_vector(6, rng);
    CHECK(eval_linearized(H, Vector::Zero(6), z).norm() == 0.0);
}

TEST_CASE("eval_linearized on the diagonal doubles the quadratic") {
    auto H = random_tensor(5, 12, 5);
    std::mt19937_64 rng(13);
    Vector y = random_vector(5, rng);
    Vector lhs = eval_linearized(H, y, y);
    Vector rhs = 2.0 * eval_quadratic(H, y);
    CHECK((lhs - rhs).norm() <= 1e-14 * (1.0 + rhs.norm()));
}

TEST_CASE("eval_linearized matches central finite differences") {
    const double eps = 1e-5;
    auto H = random_tensor(7, 15, 17);
    std::mt19937_64 rng(19);
    Vector ybar = random_vector(7, rng), z = random_vector(7, rng);
    Vector fd = (eval_quadratic(H, ybar + eps * z) - eval_quadratic(H, ybar - eps * z)) / (2 * eps);
    Vector an = eval_linearized(H, ybar, z);
    CHECK((fd - an).norm() <= 1e-9 * (1.0 + an.norm()));
}

TEST_CASE("symmetrize_tensor: already symmetric input unchanged") {
    std::vector<TensorEntry> raw = {{0, 1, 2, 0.5}, {0, 2, 1, 0.5}, {1, 0, 0, 2.0}};
    auto t = symmetrize_tensor(raw, 3);
    REQUIRE(t.entries().size() == 3);
    CHECK(t.entries()[0].v == doctest::Approx(0.5));
    CHECK(t.entries()[1].v == doctest::Approx(0.5));
    CHECK(t.entries()[2].v == doctest::Approx(2.0));
}

TEST_CASE("symmetrize_tensor: single off-diagonal entry splits in half") {
    auto t = symmetrize_tensor({{0, 1, 2, 1.0}}, 3);
    REQUIRE(t.entries().size() == 2);
    CHECK(t.entries()[0].j == 1);
    CHECK(t.entries()[0].k == 2);
    CHECK(t.entries()[0].v == doctest::Approx(0.5));
    CHECK(t.entries()[1].j == 2);
    CHECK(t.entries()[1].k == 1);
    CHECK(t.entries()[1].v == doctest::Approx(0.5));
}

TEST_CASE("symmetrize_tensor preserves the quadratic action") {
    const int n = 6;
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> idx(0, n - 1);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<TensorEntry> raw;
    for (int e = 0; e < 20; ++e) raw.push_back({idx(rng), idx(rng), idx(rng), val(rng)});
    auto sym = symmetrize_tensor(raw, n);

    auto raw_apply = [&](const Vector& y) {
        Vector out = Vector::Zero(n);
        for (const auto& e : raw) out[e.i] += e.v * y[e.j] * y[e.k];
        return out;
    };
    for (int trial = 0; trial < 20; ++trial) {
        Vector y = random_vector(n, rng);
        CHECK((raw_apply(y) - eval_quadratic(sym, y)).norm() <= 1e-13 * (1.0 + y.squaredNorm()));
    }
}

TEST_CASE("symmetrize_tensor rejects out-of-range indices") {
    CHECK_THROWS_AS(symmetrize_tensor({{0, 3, 1, 1.0}}, 3), IndexError);
}

TEST_CASE("quadratic homogeneity of degree 2") {
    auto H = random_tensor(5, 10, 29);
    std::mt19937_64 rng(31);
    Vector y = random_vector(5, rng);
    for (double s : {0.5, 2.0, -3.0}) {
        Vector lhs = eval_quadratic(H, s * y);
        Vector rhs = s * s * eval_quadratic(H, y);
        CHECK((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
    }
}

TEST_CASE("symmetry probe over 50 random pairs") {
    auto H = random_tensor(8, 24, 37);
    std::mt19937_64 rng(41);
    const double scale = H.entry_norm();
    for (int trial = 0; trial < 50; ++trial) {
        Vector z1 = random_vector(8, rng), z2 = random_vector(8, rng);
        double defect = (H.apply_bilinear(z1, z2) - H.apply_bilinear(z2, z1)).norm();
        CHECK(defect <= 1e-13 * (scale + 1.0) * z1.norm() * z2.norm());
    }
}

TEST_CASE("QuadraticSystem validate catches dimension slips") {
    QuadraticSystem sys;
    sys.E = Matrix::Identity(4, 4);
    sys.Astiff = Matrix::Identity(4, 4);
    sys.H = SymQuadTensor(4);
    sys.B = Matrix::Ones(3, 1);  // wrong row count
    sys.C = Matrix::Identity(4, 4);
    CHECK_THROWS_AS(sys.validate(), DimensionError);
}
