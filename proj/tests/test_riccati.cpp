#include <doctest.h>

#include <random>

#include "polyhjb/problems.hpp"
#include "polyhjb/riccati.hpp"

using namespace polyhjb;

namespace {

// Dense Kronecker oracle for A^T X E + E^T X A + Q = 0 at tiny dimension:
// vectorize to (E^T (x) A^T + A^T (x) E^T) vec(X) = -vec(Q).
Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

Matrix lyap_kron_oracle(const Matrix& A, const Matrix& E, const Matrix& Q) {
    const int n = static_cast<int>(A.rows());
    // vec(A^T X E) = (E^T (x) A^T) vec(X), vec(E^T X A) = (A^T (x) E^T) vec(X).
    Matrix L = kron(E.transpose(), A.transpose()) + kron(A.transpose(), E.transpose());
    Vector q = Eigen::Map<const Vector>(Q.data(), n * n);
    Vector x = L.partialPivLu().solve(-q);
    return Eigen::Map<Matrix>(x.data(), n, n);
}

ReducedSystem tiny_reduced(const Matrix& E, const Matrix& A, const Matrix& B, const Matrix& C) {
    QuadraticSystem sys;
    sys.E = E;
    sys.Astiff = A;
    sys.H = SymQuadTensor(static_cast<int>(E.rows()));
    sys.B = B;
    sys.C = C;
    return reduce_system(sys);
}

}  // namespace

TEST_CASE("scalar Riccati closed form") {
    // E=1, A=a, B=b, C=1: Pi = alpha (a + sqrt(a^2 + b^2/alpha)) / b^2.
    for (double a : {0.0, -1.0, 0.7})
        for (double b : {1.0, 2.0})
            for (double alpha : {1.0, 0.25}) {
                Matrix E = Matrix::Identity(1, 1), A = Matrix::Constant(1, 1, a),
                       B = Matrix::Constant(1, 1, b), C = Matrix::Identity(1, 1);
                auto red = tiny_reduced(E, A, B, C);
                auto sol = solve_are(red, alpha);
                double expect = alpha * (a + std::sqrt(a * a + b * b / alpha)) / (b * b);
                CHECK(sol.Pi(0, 0) == doctest::Approx(expect).epsilon(1e-12));
            }
}

TEST_CASE("a=0, b=1, alpha=1 gives Pi = 1") {
    auto red = tiny_reduced(Matrix::Identity(1, 1), Matrix::Zero(1, 1), Matrix::Identity(1, 1),
                            Matrix::Identity(1, 1));
    auto sol = solve_are(red, 1.0);
    CHECK(sol.Pi(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("B = 0 with stable pencil reduces to a generalized Lyapunov solve") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    const int n = 6;
    Matrix R(n, n), C(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            R(i, j) = val(rng);
            C(i, j) = val(rng);
        }
    Matrix E = R * R.transpose() + n * Matrix::Identity(n, n);
    auto stable = make_random_quad(n, 1, 77, true);
    Matrix A = E * stable.Astiff;  // pencil (E, A) has the abscissa of Astiff

    auto red = tiny_reduced(E, A, Matrix::Zero(n, 1), C);
    auto sol = solve_are(red, 1.0);
    Matrix expect = lyap_kron_oracle(A, E, C.transpose() * C);
    CHECK((sol.Pi - expect).norm() <= 1e-8 * (1.0 + expect.norm()));
}

TEST_CASE("C = 0 with stable pencil gives Pi = 0") {
    auto stable = make_random_quad(5, 2, 11, true);
    auto red = tiny_reduced(Matrix::Identity(5, 5), stable.Astiff, stable.B, Matrix::Zero(5, 5));
    auto sol = solve_are(red, 1.0);
    CHECK(sol.Pi.norm() <= 1e-10);
}

TEST_CASE("solve_lyap_generalized matches the Kronecker oracle") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        const int n = 7;
        Matrix R(n, n), Qr(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                R(i, j) = val(rng);
                Qr(i, j) = val(rng);
            }
        Matrix E = R * R.transpose() + n * Matrix::Identity(n, n);
        Matrix A = E * make_random_quad(n, 1, 1000 + trial, true).Astiff;
        Matrix Q = Qr * Qr.transpose();
        Matrix X = solve_lyap_generalized(A, E, Q);
        Matrix expect = lyap_kron_oracle(A, E, Q);
        CHECK((X - expect).norm() <= 1e-9 * (1.0 + expect.norm()));
    }
}

TEST_CASE("riccati invariants on built-in problems") {
    auto check_solution = [](const ReducedSystem& red, double alpha) {
        auto sol = solve_are(red, alpha);
        CHECK(sol.residual_norm <= 1e-8);
        CHECK((sol.Pi - sol.Pi.transpose()).norm() <= 1e-12 * (1.0 + sol.Pi.norm()));
        Eigen::SelfAdjointEigenSolver<Matrix> es(sol.Pi);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * (1.0 + sol.Pi.norm()));
        CHECK(pencil_abscissa(sol.Api, red.Et) < 0.0);
        CHECK(are_residual(red, alpha, sol.Pi) == doctest::Approx(sol.residual_norm));
    };
    check_solution(reduce_system(make_burgers(16, 0.05, 2.0, {{0.2, 0.5}})), 1.0);
    check_solution(reduce_system(make_oseen_mac(4, 4, 0.1, OseenZbarSpec{0.4, {}},
                                                {0.25, 0.75, 0.25, 0.75}, 1)), 1.0);
    check_solution(reduce_system(make_random_quad(8, 2, 13, false)), 1e-2);
}

TEST_CASE("are_residual: Pi = 0 and C = 0 give zero") {
    auto red = tiny_reduced(Matrix::Identity(3, 3), -Matrix::Identity(3, 3), Matrix::Ones(3, 1),
                            Matrix::Zero(3, 3));
    CHECK(are_residual(red, 1.0, Matrix::Zero(3, 3)) == 0.0);
}

TEST_CASE("are_residual grows linearly under small symmetric perturbations") {
    auto red = reduce_system(make_burgers(12, 0.08, 1.0, {{0.2, 0.6}}));
    auto sol = solve_are(red, 1.0);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    Matrix D(12, 12);
    for (int j = 0; j < 12; ++j)
        for (int i = 0; i < 12; ++i) D(i, j) = val(rng);
    D = (0.5 * (D + D.transpose())).eval();

    double r1 = are_residual(red, 1.0, sol.Pi + 1e-6 * D);
    double r2 = are_residual(red, 1.0, sol.Pi + 2e-6 * D);
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("alpha scaling: (alpha, B) equivalent to (1, B/sqrt(alpha))") {
    auto sys = make_burgers(10, 0.1, 1.5, {{0.3, 0.7}});
    auto red = reduce_system(sys);
    const double alpha = 0.37;
    auto sol_a = solve_are(red, alpha);

    QuadraticSystem scaled = sys;
    scaled.B = sys.B / std::sqrt(alpha);
    auto red_s = reduce_system(scaled);
    auto sol_1 = solve_are(red_s, 1.0);
    CHECK((sol_a.Pi - sol_1.Pi).norm() <= 1e-10 * (1.0 + sol_1.Pi.norm()));
}

TEST_CASE("unstabilizable pencil raises") {
    // Unstable mode outside the range of B: A = diag(1, -1), B = [0; 1].
    Matrix A(2, 2);
    A << 1, 0, 0, -1;
    Matrix B(2, 1);
    B << 0, 1;
    auto red = tiny_reduced(Matrix::Identity(2, 2), A, B, Matrix::Identity(2, 2));
    CHECK_THROWS_AS(solve_are(red, 1.0), Error);
}
