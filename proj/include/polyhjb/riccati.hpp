#pragma once

#include <complex>
#include <vector>

#include "polyhjb/leray.hpp"

namespace polyhjb {

/// Stabilizing solution of the generalized algebraic Riccati equation
///   At^T Pi Et + Et^T Pi At - (1/alpha) Et^T Pi Bt Bt^T Pi Et + Ct^T Ct = 0.
struct RiccatiSolution {
    Matrix Pi;            // symmetric positive semidefinite
    double alpha = 1.0;
    Matrix Api;           // At - (1/alpha) Bt Bt^T Pi Et
    double residual_norm = 0.0;  // relative Frobenius residual
};

struct RiccatiOptions {
    double tol = 1e-9;        // residual target before refinement stops
    int max_newton = 4;       // Newton-Kleinman refinement steps
    int max_dim = 500;        // dense deflating-subspace method cap
};

/// Finite generalized eigenvalues of the pencil (E, A), i.e. lambda with
/// A v = lambda E v.
std::vector<std::complex<double>> generalized_eigenvalues(const Matrix& A, const Matrix& E);

/// Max real part over the finite spectrum of (E, A).
double pencil_abscissa(const Matrix& A, const Matrix& E);

/// Solve A^T X E + E^T X A + Q = 0 for symmetric Q and a stable pencil
/// (E, A), by Schur reduction and a quasi-triangular Sylvester solve.
Matrix solve_lyap_generalized(const Matrix& A, const Matrix& E, const Matrix& Q);

/// Deflating-subspace solve of the generalized Riccati equation (ordered
/// generalized Schur form of the extended pencil), followed by optional
/// Newton-Kleinman refinement. Throws SingularOperatorError when no
/// stabilizing solution exists and ConvergenceError on residual stagnation.
RiccatiSolution solve_are(const ReducedSystem& red, double alpha,
                          const RiccatiOptions& opts = {});

/// Relative Frobenius residual of the equation above at a given Pi.
double are_residual(const ReducedSystem& red, double alpha, const Matrix& Pi);

}  // namespace polyhjb
