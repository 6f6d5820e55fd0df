#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "polyhjb/errors.hpp"

namespace polyhjb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Vector/Kronecker convention used throughout the library: vec() stacks
// columns, and in a Kronecker product y (x) z the second factor indexes
// fastest, so vec(z y^T) = y (x) z. All tensor flattenings follow the same
// column-major multi-index rule (first index fastest).

/// One coordinate of a sparse 3-tensor: contributes v * y[j] * z[k] to
/// component i of H(y (x) z).
struct TensorEntry {
    int i;
    int j;
    int k;
    double v;
};

/// Sparse coordinate representation of the matricization H in R^{n x n^2}
/// of a quadratic nonlinearity, symmetric in the last two slots:
/// H(z1 (x) z2) = H(z2 (x) z1) for all z1, z2.
class SymQuadTensor {
public:
    SymQuadTensor() = default;

    /// Tensor with no entries (H(y (x) y) identically zero).
    explicit SymQuadTensor(int dim) : dim_(dim) {
        if (dim < 0) throw InvalidArgumentError("SymQuadTensor: negative dimension");
    }

    int dim() const { return dim_; }
    const std::vector<TensorEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    /// H(a (x) b) by contraction over the stored entries.
    Vector apply_bilinear(const Vector& a, const Vector& b) const;

    /// Matrix M with M z = H(w (x) z); used to freeze one slot (Picard).
    Matrix frozen_left(const Vector& w) const;

    /// Dense n x n^2 matricization. Test-oracle / tiny-dimension path only.
    Matrix dense_matricization() const;

    /// Sum of |v| over entries; scale reference for symmetry probes.
    double entry_norm() const;

    friend SymQuadTensor symmetrize_tensor(const std::vector<TensorEntry>& raw, int n);

private:
    int dim_ = 0;
    std::vector<TensorEntry> entries_;
};

/// H(y (x) y), never materializing the Kronecker product.
Vector eval_quadratic(const SymQuadTensor& H, const Vector& y);

/// H(ybar (x) z) + H(z (x) ybar): directional derivative of eval_quadratic
/// at ybar in direction z (discrete Oseen-type linearization).
Vector eval_linearized(const SymQuadTensor& H, const Vector& ybar, const Vector& z);

/// Canonical symmetrized tensor from a raw coordinate list: each entry is
/// split across (j,k) and (k,j), duplicates merged, entries sorted. The
/// action on any y (x) y is unchanged.
SymQuadTensor symmetrize_tensor(const std::vector<TensorEntry>& raw, int n);

/// Quadratic-in-state control system
///   E zdot = Astiff z + H(z (x) z) + B u + G p [+ f_z],   0 = G^T z [+ f_q].
/// Astiff already contains the linearization around the steady state zbar
/// (shifted form); f_z/f_q describe the forcing of the unshifted problem and
/// are consumed only by the steady-state solver.
struct QuadraticSystem {
    Matrix E;       // n x n mass matrix, invertible
    Matrix Astiff;  // n x n stiffness plus linearization
    SymQuadTensor H;
    Matrix B;  // n x m control operator
    Matrix C;  // q x n output map; cost weight is C^T C
    std::optional<Matrix> G;  // n x np constraint (discrete gradient), full column rank
    std::optional<Vector> f_z;
    std::optional<Vector> f_q;
    std::optional<Vector> zbar;

    int n() const { return static_cast<int>(E.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int q() const { return static_cast<int>(C.rows()); }
    int np() const { return G ? static_cast<int>(G->cols()) : 0; }

    /// Dimension consistency, G rank, H symmetry probe, and (when zbar and
    /// f_z are present) the stationary residual of the unshifted system.
    void validate(double stationary_tol = 1e-8) const;
};

}  // namespace polyhjb
