#pragma once

#include <string>

#include "polyhjb/riccati.hpp"
#include "polyhjb/symtensor.hpp"

namespace polyhjb {

/// Exponential-sum rule 1/x ~ sum_j w_j exp(-t_j x), accurate on [1, R],
/// from a sinc discretization of 1/x = int_0^inf exp(-t x) dt under the
/// substitution t = asinh(exp(tau)). The step h is tuned at construction to
/// minimize the recorded sup-error certificate on a log-spaced probe grid.
struct QuadratureRule {
    int r = 0;        // half-order: terms j = -r..r
    double h = 0.0;   // sinc step
    std::vector<double> nodes;    // t_j >= 0
    std::vector<double> weights;  // w_j > 0
    double lambda = 1.0;          // spectral scale (x_min convention)
    double R = 1.0;               // normalized interval [1, R]
    double certificate = 0.0;     // sup_{x in [1,R]} |1/x - sum w e^{-tx}|

    /// sum_j w_j exp(-t_j x) on the normalized axis.
    double evaluate(double x) const;
};

QuadratureRule build_quadrature(double x_min, double x_max, int r);

/// e^{tM} V by scaling-and-squaring Pade approximation.
Matrix expm_action(const Matrix& M, double t, const Matrix& V);

/// Right-hand side F = -2 (Ht^T (x) Et^T + Et^T (x) Ht^T +
/// (I (x) P^T)(Ht^T (x) Et^T)) vec(Pi) of the order-3 tensor equation,
/// assembled by sparse mode contractions (the N^3 x N^2 matrix is never
/// formed). F realizes the discrete third-derivative source and is a
/// symmetric order-3 tensor.
DenseTensorK assemble_F(const ReducedSystem& red, const Matrix& Pi);

/// Max slot-permutation defect of an order-3 tensor, inf-norm scaled.
double f_symmetry_defect(const DenseTensorK& F);

/// Dense solve of A^T X = F with A = Et (x) Et (x) Api + Et (x) Api (x) Et +
/// Api (x) Et (x) Et. Tiny-dimension oracle path (N <= 12).
DenseTensorK solve_dense_k3(const ReducedSystem& red, const RiccatiSolution& ric,
                            const DenseTensorK& F);

/// Cubic feedback gain K = (Et^T (x) Et^T (x) Bt^T) X in flat form; the
/// control channel indexes fastest. X3 is retained for value-gradient use.
struct Order3Gain {
    Vector Kt;  // length m * N^2
    double alpha = 1.0;
    int N = 0, m = 0;
    std::string provenance;       // "dense" or "quadrature(r=...)"
    double rule_certificate = 0.0;
    DenseTensorK X3;              // order-3 value-derivative tensor (Et-weighted)

    /// Contraction of the gain over its two state slots: out[c] =
    /// sum_{j,k} Kt[c + m j + m N k] y[j] z[k].
    Vector contract_states(const Vector& y, const Vector& z) const;
};

Order3Gain gain_k3_dense(const ReducedSystem& red, const RiccatiSolution& ric,
                         const DenseTensorK& X);

/// Quadrature evaluation of the gain: per node j the three exponential
/// factors are applied to F by mode contractions (X is never solved for
/// densely); terms are summed in fixed j order. The same pass accumulates
/// the X3 tensor. Terms may be computed on `threads` workers.
Order3Gain gain_k3_quadrature(const ReducedSystem& red, const RiccatiSolution& ric,
                              const QuadratureRule& rule, int threads = 1);

/// Build the rule for the closed-loop pencil: lambda = |max real part| of
/// the (Et, Api) spectrum, R = 2 * (sum of the three largest magnitudes) /
/// lambda.
QuadratureRule build_quadrature_for_pencil(const ReducedSystem& red, const RiccatiSolution& ric,
                                           int r);

/// Order-k right-hand side of the higher-derivative chain (k in {3, 4},
/// N <= 8): the multilinear form combining shuffle-symmetrized products of
/// lower value derivatives with the control pairing and the second
/// derivative of the quadratic drift. value_derivs holds the derivative
/// tensors of orders 2..k-1 in ascending order.
DenseTensorK assemble_Rk_dense(int k, std::span<const DenseTensorK> value_derivs,
                               const ReducedSystem& red, double alpha);

/// Dense solve of the order-k generalized Lyapunov equation
///   (sum_i Et (x) ... (x) Api(i-th) (x) ... (x) Et)^T x = vec(R_k),
/// the order-k analog of the order-3 system. The solution is the
/// Et-weighted tensor: D^k V(0)(z_1,...,z_k) = x(Et z_1, ..., Et z_k).
/// k in {3, 4}, N^k <= 4096.
DenseTensorK solve_dense_k(int k, const ReducedSystem& red, const RiccatiSolution& ric,
                           const DenseTensorK& Rk);

/// Bridge from the Et-weighted solution to the Euclidean derivative tensor:
/// every mode contracted with Et.
DenseTensorK weighted_to_derivative(const DenseTensorK& X, const Matrix& Et);

}  // namespace polyhjb
