#pragma once

#include "polyhjb/simulate.hpp"

namespace polyhjb {

/// Log-log scaling study: fitted_slope is the least-squares slope of
/// log(error) against log(scale).
struct RateReport {
    std::vector<double> scales;
    std::vector<double> errors;
    double fitted_slope = 0.0;
    double target_order = 0.0;
};

RateReport fit_rate(const std::vector<double>& scales, const std::vector<double>& errors,
                    double target_order);

/// Pointwise residual of the reduced Hamilton-Jacobi-Bellman equation at y
/// for the degree-d value approximation carried by the gain set:
///   grad V_d(y)^T Et^-1 (At y + Ht(y (x) y)) + 1/2 |Ct y|^2
///     - 1/(2 alpha) |Bt^T Et^-T grad V_d(y)|^2,
/// with grad V_2(y) = Et^T Pi Et y and the degree-3 addition
/// (1/2) X3(., Et y, Et y).
double hjb_residual(const ReducedSystem& red, const GainSet& g, const Vector& y);

/// Residual scaling study along s * y0; the expected slope is degree + 1.
RateReport hjb_slope(const ReducedSystem& red, const GainSet& g, const Vector& y0,
                     const std::vector<double>& scales);

/// Open-loop solution of the finite-horizon truncation of the optimal
/// control problem by adjoint-based descent.
struct OcpResult {
    std::vector<double> times;     // uniform grid
    std::vector<Vector> controls;  // piecewise-linear nodes
    std::vector<Vector> states;
    double J = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
};

/// Deliberately small and slow reference: nonlinear conjugate-gradient
/// descent on the control grid, forward state and backward costate by
/// fixed-substep RK4. Guards: N <= 4, m <= 2, grid_n <= 2000.
OcpResult ocp_oracle(const ReducedSystem& red, double alpha, const Vector& y0, double T,
                     int grid_n, double tol);

/// L2 distance between the oracle control and the closed-loop trace of each
/// gain set, swept over scales s * y0_dir; one report per gain set. The
/// horizon per scale is chosen so the LQR loop decays below 1e-8.
std::vector<RateReport> rate_check(const ReducedSystem& red, double alpha,
                                   const std::vector<GainSet>& gains, const Vector& y0_dir,
                                   const std::vector<double>& scales, int grid_n = 1200,
                                   double j_floor = 0.0);

}  // namespace polyhjb
