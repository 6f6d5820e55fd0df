#include "polyhjb/riccati.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include <lapacke.h>

namespace polyhjb {

std::vector<std::complex<double>> generalized_eigenvalues(const Matrix& A, const Matrix& E) {
    Eigen::GeneralizedEigenSolver<Matrix> ges;
    ges.compute(A, E, false);
    std::vector<std::complex<double>> out;
    for (int i = 0; i < ges.alphas().size(); ++i) {
        std::complex<double> a = ges.alphas()(i);
        double b = ges.betas()(i);
        if (std::abs(b) > 1e-14 * (1.0 + std::abs(a))) out.push_back(a / b);
    }
    return out;
}

double pencil_abscissa(const Matrix& A, const Matrix& E) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& ev : generalized_eigenvalues(A, E)) worst = std::max(worst, ev.real());
    return worst;
}

Matrix solve_lyap_generalized(const Matrix& A, const Matrix& E, const Matrix& Q) {
    const int n = static_cast<int>(A.rows());
    // Reduce to F^T X + X F = -Q' with F = A E^-1, Q' = E^-T Q E^-1.
    Eigen::PartialPivLU<Matrix> et_lu(E.transpose());
    Matrix F = et_lu.solve(A.transpose()).transpose();  // A E^-1
    Matrix Qp = et_lu.solve(et_lu.solve(Q.transpose()).transpose());

    Eigen::RealSchur<Matrix> schur(F);
    const Matrix& U = schur.matrixU();
    Matrix T = schur.matrixT();
    Matrix C = -(U.transpose() * Qp * U);

    double scale = 1.0;
    lapack_int info = LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'T', 'N', 1, n, n, T.data(), n,
                                     T.data(), n, C.data(), n, &scale);
    if (info < 0) throw Error("dtrsyl: illegal argument " + std::to_string(-info));
    if (info == 1)
        throw SingularOperatorError("solve_lyap_generalized: pencil has mirrored eigenvalues");
    Matrix X = U * (C / scale) * U.transpose();
    return 0.5 * (X + X.transpose());
}

namespace {

lapack_logical select_stable(const double* ar, const double* /*ai*/, const double* beta) {
    return ((*ar) * (*beta) < 0.0) ? 1 : 0;
}

// Stable deflating subspace of the extended pencil
//   L = [At, -S; -Q, -At^T],  M = diag(Et, Et^T),  S = Bt Bt^T / alpha,
// from which Pi = Z21 (Et Z11)^-1.
Matrix deflating_subspace_pi(const ReducedSystem& red, double alpha) {
    const int N = red.N();
    const Matrix S = red.Bt * red.Bt.transpose() / alpha;
    const Matrix Q = red.Ct.transpose() * red.Ct;

    const int nn = 2 * N;
    Matrix L = Matrix::Zero(nn, nn), M = Matrix::Zero(nn, nn);
    L.topLeftCorner(N, N) = red.At;
    L.topRightCorner(N, N) = -S;
    L.bottomLeftCorner(N, N) = -Q;
    L.bottomRightCorner(N, N) = -red.At.transpose();
    M.topLeftCorner(N, N) = red.Et;
    M.bottomRightCorner(N, N) = red.Et.transpose();

    Vector ar(nn), ai(nn), beta(nn);
    Matrix Z(nn, nn);
    lapack_int sdim = 0;
    lapack_int info = LAPACKE_dgges(LAPACK_COL_MAJOR, 'N', 'V', 'S', select_stable, nn,
                                    L.data(), nn, M.data(), nn, &sdim, ar.data(), ai.data(),
                                    beta.data(), nullptr, nn, Z.data(), nn);
    if (info < 0) throw Error("dgges: illegal argument " + std::to_string(-info));
    if (info > 0 && info <= nn)
        throw ConvergenceError("dgges: QZ iteration failed", static_cast<double>(info));
    if (info == nn + 2)
        throw SingularOperatorError("dgges: eigenvalue reordering failed");
    // info == nn + 1 (borderline eigenvalue moved by rounding) is tolerated;
    // the sdim check below rejects any genuine defect.
    if (sdim != N)
        throw SingularOperatorError(
            "solve_are: pencil not stabilizable/detectable (stable deflating subspace has "
            "dimension " + std::to_string(sdim) + ", expected " + std::to_string(N) + ")");

    Matrix Z11 = Z.topLeftCorner(N, N);
    Matrix Z21 = Z.bottomLeftCorner(N, N);
    Matrix EZ = red.Et * Z11;
    Eigen::FullPivLU<Matrix> lu(EZ.transpose());
    if (!lu.isInvertible())
        throw SingularOperatorError("solve_are: Et Z11 singular; no stabilizing solution");
    Matrix Pi = lu.solve(Z21.transpose()).transpose();  // Z21 (Et Z11)^-1
    return 0.5 * (Pi + Pi.transpose());
}

}  // namespace

double are_residual(const ReducedSystem& red, double alpha, const Matrix& Pi) {
    const Matrix Q = red.Ct.transpose() * red.Ct;
    Matrix PiE = Pi * red.Et;
    Matrix R = red.At.transpose() * PiE + PiE.transpose() * red.At -
               PiE.transpose() * red.Bt * (red.Bt.transpose() * PiE) / alpha + Q;
    return R.norm() / (Q.norm() + 1.0);
}

RiccatiSolution solve_are(const ReducedSystem& red, double alpha, const RiccatiOptions& opts) {
    if (alpha <= 0) throw InvalidArgumentError("solve_are: alpha must be positive");
    const int N = red.N();
    if (N > opts.max_dim)
        throw GuardError("solve_are: dense solver capped at N = " + std::to_string(opts.max_dim));

    Matrix Pi = deflating_subspace_pi(red, alpha);
    double resid = are_residual(red, alpha, Pi);

    // Newton-Kleinman refinement: each step a generalized Lyapunov solve
    // with the current closed-loop matrix.
    const Matrix Q = red.Ct.transpose() * red.Ct;
    for (int it = 0; it < opts.max_newton && resid > opts.tol; ++it) {
        Matrix K = red.Bt.transpose() * Pi * red.Et / alpha;  // m x N
        Matrix Acl = red.At - red.Bt * K;
        Matrix rhs = Q + alpha * K.transpose() * K;
        Matrix next = solve_lyap_generalized(Acl, red.Et, rhs);
        next = 0.5 * (next + next.transpose());
        double nresid = are_residual(red, alpha, next);
        if (!std::isfinite(nresid) || nresid >= resid) break;
        Pi = next;
        resid = nresid;
    }
    if (!(resid <= 1e-8))
        throw ConvergenceError("solve_are: residual stagnation above tolerance", resid);

    RiccatiSolution sol;
    sol.Pi = Pi;
    sol.alpha = alpha;
    sol.Api = red.At - red.Bt * (red.Bt.transpose() * Pi * red.Et) / alpha;
    sol.residual_norm = resid;

    if (pencil_abscissa(sol.Api, red.Et) >= 0)
        throw SingularOperatorError("solve_are: computed solution does not stabilize the pencil");
    return sol;
}

}  // namespace polyhjb
