#pragma once

#include <memory>

#include "polyhjb/model.hpp"

namespace polyhjb {

/// Discrete Leray projector P = I - G (G^T E^-1 G)^-1 G^T E^-1. P acts on
/// equation right-hand sides; P^T fixes discretely divergence-free states
/// (G^T P^T = 0). Dense P is available at desk scale only; the factored
/// application works at any size.
class LerayProjector {
public:
    LerayProjector(const Matrix& E, const Matrix& G);

    int n() const { return n_; }
    int np() const { return np_; }

    Vector apply(const Vector& y) const;         // P y
    Vector project_state(const Vector& y) const; // P^T y, divergence-free output

    /// -(G^T E^-1 G)^-1 G^T E^-1 rhs: the multiplier eliminating rhs from
    /// the divergence-free subspace.
    Vector pressure_multiplier(const Vector& rhs) const;

    /// Dense P; throws GuardError above the desk-scale limit.
    const Matrix& dense() const;

    static constexpr int kDenseLimit = 2000;

private:
    int n_, np_;
    Matrix G_;
    Eigen::PartialPivLU<Matrix> E_lu_;
    Eigen::PartialPivLU<Matrix> ET_lu_;
    Eigen::PartialPivLU<Matrix> S_lu_;  // G^T E^-1 G
    Eigen::PartialPivLU<Matrix> ST_lu_;
    Matrix P_;
    bool has_dense_ = false;
};

/// Build the projector; throws SingularOperatorError when G^T E^-1 G is
/// numerically singular.
LerayProjector build_projector(const Matrix& E, const Matrix& G);

/// Factor P = ThetaL ThetaR^T with ThetaL^T ThetaR = I from a singular value
/// decomposition of P (rank = n - np, threshold 1e-10 on singular values).
std::pair<Matrix, Matrix> decompose_projector(const Matrix& P, int np);

/// Leray-projected reduced system
///   Et ytdot = At yt + Ht(yt (x) yt) + Bt u,   y = ThetaR yt.
struct ReducedSystem {
    Matrix Et, At, Bt, Ct;
    Matrix ThetaL, ThetaR;  // n x N
    std::shared_ptr<const QuadraticSystem> parent;
    bool identity_reduction = false;
    std::optional<SymQuadTensor> Ht;  // materialized when N <= kMaterializeLimit

    static constexpr int kMaterializeLimit = 64;

    int N() const { return static_cast<int>(Et.rows()); }
    int m() const { return static_cast<int>(Bt.cols()); }

    /// Ht(y (x) y), lazily through the parent when not materialized.
    Vector apply_H(const Vector& y) const;

    /// Ht(a (x) b).
    Vector apply_H_bilinear(const Vector& a, const Vector& b) const;

    /// Ht(a (x) b) + Ht(b (x) a): reduced Oseen-type linearization.
    Vector apply_H_linearized(const Vector& a, const Vector& b) const;

    /// Coordinate-list form of Ht; throws GuardError when not materialized.
    const SymQuadTensor& H_tensor() const;

    Vector lift(const Vector& yt) const { return ThetaR * yt; }
    Vector restrict_state(const Vector& y) const { return ThetaL.transpose() * y; }
};

/// Project out the algebraic constraint. Unconstrained systems reduce to
/// themselves with Theta = I. Invariants (P^2 = P, G^T E^-1 P = 0,
/// ThetaL^T ThetaR = I) are asserted on every construction.
ReducedSystem reduce_system(const QuadraticSystem& sys);

/// Pressure for a divergence-free state and control:
///   p = -(G^T E^-1 G)^-1 G^T E^-1 (Astiff y + H(y (x) y) + B u).
Vector recover_pressure(const QuadraticSystem& sys, const Vector& y, const Vector& u);

}  // namespace polyhjb
