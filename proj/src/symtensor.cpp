#include "polyhjb/symtensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace polyhjb {

namespace {

constexpr long kDenseCap = 4'000'000;

long pow_long(long base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

DenseTensorK::DenseTensorK(int order_, int dim_) : order(order_), dim(dim_) {
    if (order < 1 || dim < 0) throw InvalidArgumentError("DenseTensorK: bad shape");
    long total = pow_long(dim, order);
    if (total > kDenseCap)
        throw GuardError("DenseTensorK: N^k = " + std::to_string(total) +
                         " exceeds the dense cap of " + std::to_string(kDenseCap));
    values = Vector::Zero(total);
}

double& DenseTensorK::at(std::span<const int> idx) {
    long flat = 0, stride = 1;
    for (int m = 0; m < order; ++m) {
        flat += stride * idx[m];
        stride *= dim;
    }
    return values[flat];
}

double DenseTensorK::at(std::span<const int> idx) const {
    return const_cast<DenseTensorK*>(this)->at(idx);
}

double DenseTensorK::contract(std::span<const Vector> z) const {
    if (static_cast<int>(z.size()) != order)
        throw DimensionError("contract argument count", order, static_cast<long>(z.size()));
    for (const auto& zi : z)
        if (zi.size() != dim) throw DimensionError("contract argument length", dim, zi.size());
    // Contract the slowest mode repeatedly.
    Vector cur = values;
    for (int m = order - 1; m >= 1; --m) {
        long block = pow_long(dim, m);
        Vector next = Vector::Zero(block);
        for (int i = 0; i < dim; ++i) next += z[m][i] * cur.segment(i * block, block);
        cur = std::move(next);
    }
    return cur.dot(z[0]);
}

DenseTensorK DenseTensorK::mode_multiply(int mode, const Matrix& M) const {
    if (mode < 0 || mode >= order) throw IndexError("mode_multiply: bad mode");
    if (M.cols() != dim) throw DimensionError("mode_multiply M columns", dim, M.cols());
    const long a = M.rows();
    if (a != dim)
        throw InvalidArgumentError("mode_multiply: square factors only; use kron3_apply otherwise");
    const long inner = pow_long(dim, mode);              // strides below the mode
    const long outer = pow_long(dim, order - mode - 1);  // strides above
    DenseTensorK out;
    out.order = order;
    out.dim = dim;
    out.values = Vector::Zero(inner * a * outer);
    for (long o = 0; o < outer; ++o) {
        // Slice (inner x dim) of the input at outer index o, column-major.
        Eigen::Map<const Matrix> slice(values.data() + o * inner * dim, inner, dim);
        Eigen::Map<Matrix> dst(out.values.data() + o * inner * a, inner, a);
        dst = slice * M.transpose();
    }
    return out;
}

double DenseTensorK::symmetry_defect() const {
    std::vector<int> perm(order);
    std::iota(perm.begin(), perm.end(), 0);
    double scale = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
    double worst = 0.0;
    std::vector<int> idx(order), pidx(order);
    do {
        for (long flat = 0; flat < values.size(); ++flat) {
            long rest = flat;
            for (int m = 0; m < order; ++m) {
                idx[m] = static_cast<int>(rest % dim);
                rest /= dim;
            }
            for (int m = 0; m < order; ++m) pidx[m] = idx[perm[m]];
            worst = std::max(worst, std::abs(at(pidx) - at(idx)));
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return worst / (scale + 1.0);
}

Vector perm_transpose_apply(const Vector& v) {
    const long n2 = v.size();
    const long n = std::lround(std::sqrt(static_cast<double>(n2)));
    if (n * n != n2)
        throw DimensionError("perm_transpose_apply length (perfect square)", n * n, n2);
    Vector out(n2);
    for (long j = 0; j < n; ++j)
        for (long i = 0; i < n; ++i) out[i + n * j] = v[j + n * i];
    return out;
}

Vector kron3_apply(const Matrix& M1, const Matrix& M2, const Matrix& M3, const Vector& v) {
    const long n = M1.cols();
    if (M2.cols() != n) throw DimensionError("kron3_apply M2 columns", n, M2.cols());
    if (M3.cols() != n) throw DimensionError("kron3_apply M3 columns", n, M3.cols());
    if (v.size() != n * n * n) throw DimensionError("kron3_apply vector length", n * n * n, v.size());
    const long a = M1.rows(), b = M2.rows(), c = M3.rows();

    // Mode 3 (slowest index) with M1: view v as (n^2 x n), multiply by M1^T.
    Matrix t1(n * n, a);
    {
        Eigen::Map<const Matrix> V0(v.data(), n * n, n);
        t1.noalias() = V0 * M1.transpose();
    }
    // Mode 2 with M2: per slowest-slice (n x n) -> (n x b).
    Matrix t2(n * b, a);
    for (long s = 0; s < a; ++s) {
        Eigen::Map<const Matrix> S(t1.col(s).data(), n, n);
        Eigen::Map<Matrix> D(t2.col(s).data(), n, b);
        D.noalias() = S * M2.transpose();
    }
    // Mode 1 with M3: per slice (n x b) -> (c x b).
    Vector out(a * b * c);
    for (long s = 0; s < a; ++s) {
        Eigen::Map<const Matrix> S(t2.col(s).data(), n, b);
        Eigen::Map<Matrix> D(out.data() + s * b * c, c, b);
        D.noalias() = M3 * S;
    }
    return out;
}

std::vector<std::vector<int>> shuffle_permutations(int i, int j) {
    const int k = i + j;
    if (i < 0 || j < 0 || k > 6)
        throw GuardError("shuffle_permutations: i+j must be in [0, 6]");
    std::vector<std::vector<int>> out;
    // Choose the positions of the first block, lexicographically.
    std::vector<int> comb(i);
    std::iota(comb.begin(), comb.end(), 0);
    auto emit = [&]() {
        std::vector<int> sigma(k);
        std::vector<bool> taken(k, false);
        for (int t = 0; t < i; ++t) {
            sigma[t] = comb[t];
            taken[comb[t]] = true;
        }
        int pos = i;
        for (int p = 0; p < k; ++p)
            if (!taken[p]) sigma[pos++] = p;
        out.push_back(std::move(sigma));
    };
    if (i == 0 || i == k) {
        emit();
        return out;
    }
    while (true) {
        emit();
        int t = i - 1;
        while (t >= 0 && comb[t] == k - i + t) --t;
        if (t < 0) break;
        ++comb[t];
        for (int s = t + 1; s < i; ++s) comb[s] = comb[s - 1] + 1;
    }
    return out;
}

DenseTensorK sym_ij(const DenseTensorK& T, int i, int j) {
    if (i + j != T.order)
        throw DimensionError("sym_ij order", T.order, i + j);
    auto shuffles = shuffle_permutations(i, j);
    DenseTensorK out(T.order, T.dim);
    const double w = 1.0 / static_cast<double>(shuffles.size());
    std::vector<int> idx(T.order), pidx(T.order);
    for (const auto& sigma : shuffles) {
        for (long flat = 0; flat < T.values.size(); ++flat) {
            long rest = flat;
            for (int m = 0; m < T.order; ++m) {
                idx[m] = static_cast<int>(rest % T.dim);
                rest /= T.dim;
            }
            // Sym(T)[a_1..a_k] = mean over sigma of T[a_{sigma(1)},...].
            for (int m = 0; m < T.order; ++m) pidx[m] = idx[sigma[m]];
            out.values[flat] += w * T.at(pidx);
        }
    }
    return out;
}

double tensor_as_multilinear(const DenseTensorK& T, std::span<const Vector> z) {
    return T.contract(z);
}

}  // namespace polyhjb
