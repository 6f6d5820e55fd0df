#pragma once

#include <span>
#include <vector>

#include "polyhjb/model.hpp"

namespace polyhjb {

/// Dense order-k tensor over R^N, flattened column-major (first index
/// fastest): entry (i_1,...,i_k) lives at i_1 + N i_2 + ... + N^{k-1} i_k.
/// Capped at N^k <= 4e6 entries; dense tensors exist for oracles and the
/// quadrature solver's right-hand side only.
struct DenseTensorK {
    int order = 0;
    int dim = 0;
    Vector values;

    DenseTensorK() = default;
    DenseTensorK(int order_, int dim_);

    long size() const { return values.size(); }

    double& at(std::span<const int> idx);
    double at(std::span<const int> idx) const;

    /// Full contraction T(z_1,...,z_k); multilinear in each argument.
    double contract(std::span<const Vector> z) const;

    /// Mode-m product with M (a x N): contract index m (0-based) with M's
    /// columns. Result has mode m of size a.
    DenseTensorK mode_multiply(int mode, const Matrix& M) const;

    /// Max |T[sigma(idx)] - T[idx]| over all order! slot permutations,
    /// scaled by max |T| + 1.
    double symmetry_defect() const;
};

/// Apply the perfect-shuffle permutation P = [I (x) e_1, ..., I (x) e_N] to a
/// vector of length N^2, as an index permutation: P vec(M) = vec(M^T).
Vector perm_transpose_apply(const Vector& v);

/// (M1 (x) M2 (x) M3) v for Mi with N columns and v of length N^3.
/// Under the global convention M3 acts on the fastest index. Fixed
/// deterministic contraction order: mode 3 (M1), then mode 2 (M2), then
/// mode 1 (M3).
Vector kron3_apply(const Matrix& M1, const Matrix& M2, const Matrix& M3, const Vector& v);

/// Shuffle permutations S_{i,j}: sigma with sigma(1)<...<sigma(i) and
/// sigma(i+1)<...<sigma(i+j), enumerated in lexicographic order of the
/// first block's position set. Each inner vector is the image list
/// (sigma(1),...,sigma(i+j)), 0-based.
std::vector<std::vector<int>> shuffle_permutations(int i, int j);

/// Shuffle-average symmetrization Sym_{i,j}: mean over S_{i,j} of the
/// argument-permuted tensor. Linear in T; i + j must equal T.order (<= 6).
DenseTensorK sym_ij(const DenseTensorK& T, int i, int j);

/// T(z_1,...,z_k) evaluation bridge for multilinear-form identities.
double tensor_as_multilinear(const DenseTensorK& T, std::span<const Vector> z);

}  // namespace polyhjb
