#include "polyhjb/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace polyhjb {

namespace {

void check_dim(const char* name, long expected, long got) {
    if (expected != got) throw DimensionError(name, expected, got);
}

}  // namespace

Vector SymQuadTensor::apply_bilinear(const Vector& a, const Vector& b) const {
    check_dim("SymQuadTensor first argument", dim_, a.size());
    check_dim("SymQuadTensor second argument", dim_, b.size());
    Vector out = Vector::Zero(dim_);
    for (const auto& e : entries_) out[e.i] += e.v * a[e.j] * b[e.k];
    return out;
}

Matrix SymQuadTensor::frozen_left(const Vector& w) const {
    check_dim("SymQuadTensor frozen argument", dim_, w.size());
    Matrix M = Matrix::Zero(dim_, dim_);
    for (const auto& e : entries_) M(e.i, e.k) += e.v * w[e.j];
    return M;
}

Matrix SymQuadTensor::dense_matricization() const {
    const long n = dim_;
    if (n * n * n > 4'000'000)
        throw GuardError("dense_matricization: n^3 exceeds the dense cap");
    Matrix M = Matrix::Zero(n, n * n);
    // Column index of the pair (j, k): j indexes slow, k fast (y (x) z).
    for (const auto& e : entries_) M(e.i, e.j * n + e.k) += e.v;
    return M;
}

double SymQuadTensor::entry_norm() const {
    double s = 0.0;
    for (const auto& e : entries_) s += std::abs(e.v);
    return s;
}

Vector eval_quadratic(const SymQuadTensor& H, const Vector& y) {
    check_dim("eval_quadratic state", H.dim(), y.size());
    Vector out = Vector::Zero(H.dim());
    for (const auto& e : H.entries()) out[e.i] += e.v * y[e.j] * y[e.k];
    return out;
}

Vector eval_linearized(const SymQuadTensor& H, const Vector& ybar, const Vector& z) {
    check_dim("eval_linearized base point", H.dim(), ybar.size());
    check_dim("eval_linearized direction", H.dim(), z.size());
    Vector out = Vector::Zero(H.dim());
    for (const auto& e : H.entries())
        out[e.i] += e.v * (ybar[e.j] * z[e.k] + z[e.j] * ybar[e.k]);
    return out;
}

SymQuadTensor symmetrize_tensor(const std::vector<TensorEntry>& raw, int n) {
    SymQuadTensor t(n);
    std::vector<TensorEntry> half;
    half.reserve(2 * raw.size());
    for (const auto& e : raw) {
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n || e.k < 0 || e.k >= n)
            throw IndexError("symmetrize_tensor: entry (" + std::to_string(e.i) + "," +
                             std::to_string(e.j) + "," + std::to_string(e.k) +
                             ") out of range for n=" + std::to_string(n));
        half.push_back({e.i, e.j, e.k, 0.5 * e.v});
        half.push_back({e.i, e.k, e.j, 0.5 * e.v});
    }
    std::sort(half.begin(), half.end(), [](const TensorEntry& a, const TensorEntry& b) {
        return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
    });
    for (const auto& e : half) {
        if (!t.entries_.empty()) {
            auto& last = t.entries_.back();
            if (last.i == e.i && last.j == e.j && last.k == e.k) {
                last.v += e.v;
                continue;
            }
        }
        t.entries_.push_back(e);
    }
    std::erase_if(t.entries_, [](const TensorEntry& e) { return e.v == 0.0; });
    return t;
}

void QuadraticSystem::validate(double stationary_tol) const {
    const long nn = E.rows();
    check_dim("E columns", nn, E.cols());
    check_dim("Astiff rows", nn, Astiff.rows());
    check_dim("Astiff columns", nn, Astiff.cols());
    check_dim("H dimension", nn, H.dim());
    check_dim("B rows", nn, B.rows());
    check_dim("C columns", nn, C.cols());
    if (G) {
        check_dim("G rows", nn, G->rows());
        if (G->cols() < 1 || G->cols() >= nn)
            throw DimensionError("G columns (0 < np < n)", nn - 1, G->cols());
        Eigen::ColPivHouseholderQR<Matrix> qr(*G);
        if (qr.rank() != G->cols())
            throw SingularOperatorError(
                "constraint matrix G is rank deficient: rank " + std::to_string(qr.rank()) +
                " < np = " + std::to_string(G->cols()));
    }
    if (f_z) check_dim("f_z size", nn, f_z->size());
    if (f_q) check_dim("f_q size", np(), f_q->size());
    if (zbar) check_dim("zbar size", nn, zbar->size());

    // H symmetry probe on fixed-seed random vectors.
    if (!H.empty()) {
        std::mt19937_64 rng(0x5eedULL);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        const double scale = H.entry_norm() + 1.0;
        for (int p = 0; p < 2; ++p) {
            Vector z1(nn), z2(nn);
            for (long i = 0; i < nn; ++i) z1[i] = unif(rng);
            for (long i = 0; i < nn; ++i) z2[i] = unif(rng);
            double defect = (H.apply_bilinear(z1, z2) - H.apply_bilinear(z2, z1)).norm();
            if (defect > 1e-13 * scale * z1.norm() * z2.norm())
                throw InvalidArgumentError("QuadraticSystem: H fails the symmetry probe");
        }
    }

    // Stationarity of zbar for the unshifted system, with Astiff already in
    // shifted form: -K zbar = Astiff zbar - 2 H(zbar (x) zbar), so the
    // velocity residual is Astiff zbar - H(zbar (x) zbar) + f_z + G q.
    if (zbar && f_z) {
        Vector r = Astiff * (*zbar) - eval_quadratic(H, *zbar) + *f_z;
        if (G) {
            // Best constrained fit: remove the range-of-G component.
            Vector q = G->colPivHouseholderQr().solve(-r);
            r += (*G) * q;
        }
        double ref = f_z->norm() + zbar->norm() + 1.0;
        if (r.norm() > stationary_tol * ref)
            throw InvalidArgumentError(
                "QuadraticSystem: zbar is not stationary for the declared forcing "
                "(residual " + std::to_string(r.norm()) + ")");
    }
}

}  // namespace polyhjb
