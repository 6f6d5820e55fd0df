#pragma once

#include "polyhjb/tensor_lyap.hpp"

namespace polyhjb {

/// Polynomial feedback data: the linear LQR gain row block
/// L2 = -(1/alpha) Bt^T Pi Et plus, at degree 3, the cubic gain K3. The
/// degree-3 control adds -(1/(2 alpha)) K3(y, y), the 1/2 coming from the
/// 1/(k-1)! Taylor weight at k = 3.
struct GainSet {
    double alpha = 1.0;
    Matrix Pi;
    Matrix L2;  // m x N, precomputed
    Matrix Bt;  // N x m, kept for the closed-loop lift
    std::optional<Order3Gain> K3;
    int degree = 2;
};

GainSet make_gain_set(const ReducedSystem& red, const RiccatiSolution& ric, int degree,
                      std::optional<Order3Gain> K3 = {});

/// u_d(y): degree 2 is the linear law; degree 3 adds the quadratic term by
/// mode contraction of K3 (no Kronecker product is formed).
Vector eval_u(const GainSet& g, const Vector& y);

/// Closed-loop correction G_k(y) = Bt * (quadratic part of u_d at y);
/// only k = 3 is produced.
Vector eval_Gk(const GainSet& g, int k, const Vector& y);

}  // namespace polyhjb
