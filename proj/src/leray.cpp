#include "polyhjb/leray.hpp"

#include <Eigen/SVD>

namespace polyhjb {

LerayProjector::LerayProjector(const Matrix& E, const Matrix& G)
    : n_(static_cast<int>(E.rows())), np_(static_cast<int>(G.cols())), G_(G) {
    if (G.rows() != n_) throw DimensionError("G rows", n_, G.rows());
    E_lu_ = Eigen::PartialPivLU<Matrix>(E);
    ET_lu_ = Eigen::PartialPivLU<Matrix>(E.transpose());
    Matrix EiG = E_lu_.solve(G);
    Matrix S = G.transpose() * EiG;
    Eigen::FullPivLU<Matrix> s_rank(S);
    if (!s_rank.isInvertible() || s_rank.rcond() < 1e-12)
        throw SingularOperatorError(
            "build_projector: G^T E^-1 G numerically singular (rcond " +
            std::to_string(s_rank.isInvertible() ? s_rank.rcond() : 0.0) + ")");
    S_lu_ = Eigen::PartialPivLU<Matrix>(S);
    ST_lu_ = Eigen::PartialPivLU<Matrix>(S.transpose());
    if (n_ <= kDenseLimit) {
        P_ = Matrix::Identity(n_, n_) - G * S_lu_.solve(EiG.transpose());
        has_dense_ = true;
    }
}

Vector LerayProjector::apply(const Vector& y) const {
    return y - G_ * S_lu_.solve(G_.transpose() * E_lu_.solve(y));
}

Vector LerayProjector::project_state(const Vector& y) const {
    // P^T y = y - E^-T G (G^T E^-1 G)^-T G^T y.
    Vector w = ST_lu_.solve(G_.transpose() * y);
    return y - ET_lu_.solve(G_ * w);
}

Vector LerayProjector::pressure_multiplier(const Vector& rhs) const {
    return -S_lu_.solve(G_.transpose() * E_lu_.solve(rhs));
}

const Matrix& LerayProjector::dense() const {
    if (!has_dense_)
        throw GuardError("LerayProjector: dense P only available for n <= " +
                         std::to_string(kDenseLimit));
    return P_;
}

LerayProjector build_projector(const Matrix& E, const Matrix& G) {
    return LerayProjector(E, G);
}

std::pair<Matrix, Matrix> decompose_projector(const Matrix& P, int np) {
    const int n = static_cast<int>(P.rows());
    const int N = n - np;
    Eigen::BDCSVD<Matrix> svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    const double thresh = 1e-10 * sv(0);
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > thresh) ++rank;
    if (rank != N)
        throw SingularOperatorError("decompose_projector: numerical rank " +
                                    std::to_string(rank) + " != n - np = " + std::to_string(N));

    // For an idempotent P = U S V^T one has U_N^T V_N = S_N^-1, so scaling
    // both factors by sqrt(S) gives biorthogonal factors reproducing P.
    Vector sqrt_s = sv.head(N).cwiseSqrt();
    Matrix ThetaL = svd.matrixU().leftCols(N) * sqrt_s.asDiagonal();
    Matrix ThetaR = svd.matrixV().leftCols(N) * sqrt_s.asDiagonal();

    // Re-normalize the residual biorthogonality drift.
    Matrix W = ThetaL.transpose() * ThetaR;
    ThetaR = ThetaR * W.partialPivLu().inverse();
    return {ThetaL, ThetaR};
}

namespace {

void assert_reduction_invariants(const QuadraticSystem& sys, const LerayProjector& proj,
                                 const Matrix& ThetaL, const Matrix& ThetaR) {
    const Matrix& P = proj.dense();
    const int N = static_cast<int>(ThetaL.cols());
    double pn = P.norm();
    double idem = (P * P - P).norm();
    if (idem > 1e-12 * pn)
        throw SingularOperatorError("reduce_system: P^2 != P (defect " + std::to_string(idem) + ")");
    Matrix GtEiP = sys.G->transpose() * sys.E.partialPivLu().solve(P);
    if (GtEiP.norm() > 1e-12 * (1.0 + sys.G->norm()))
        throw SingularOperatorError("reduce_system: G^T E^-1 P != 0");
    double bio = (ThetaL.transpose() * ThetaR - Matrix::Identity(N, N)).norm();
    if (bio > 1e-12 * std::sqrt(static_cast<double>(N)))
        throw SingularOperatorError("reduce_system: ThetaL^T ThetaR != I (defect " +
                                    std::to_string(bio) + ")");
    double rec = (ThetaL * ThetaR.transpose() - P).norm();
    if (rec > 1e-11 * (1.0 + pn))
        throw SingularOperatorError("reduce_system: ThetaL ThetaR^T != P");
}

}  // namespace

Vector ReducedSystem::apply_H(const Vector& y) const {
    if (Ht) return eval_quadratic(*Ht, y);
    return ThetaR.transpose() * eval_quadratic(parent->H, ThetaR * y);
}

Vector ReducedSystem::apply_H_bilinear(const Vector& a, const Vector& b) const {
    if (Ht) return Ht->apply_bilinear(a, b);
    return ThetaR.transpose() * parent->H.apply_bilinear(ThetaR * a, ThetaR * b);
}

Vector ReducedSystem::apply_H_linearized(const Vector& a, const Vector& b) const {
    if (Ht) return eval_linearized(*Ht, a, b);
    return ThetaR.transpose() * eval_linearized(parent->H, ThetaR * a, ThetaR * b);
}

const SymQuadTensor& ReducedSystem::H_tensor() const {
    if (!Ht)
        throw GuardError("ReducedSystem: Ht not materialized (N > " +
                         std::to_string(kMaterializeLimit) + ")");
    return *Ht;
}

ReducedSystem reduce_system(const QuadraticSystem& sys) {
    ReducedSystem red;
    red.parent = std::make_shared<QuadraticSystem>(sys);

    if (!sys.G) {
        const int n = sys.n();
        red.Et = sys.E;
        red.At = sys.Astiff;
        red.Bt = sys.B;
        red.Ct = sys.C;
        red.ThetaL = Matrix::Identity(n, n);
        red.ThetaR = Matrix::Identity(n, n);
        red.Ht = sys.H;
        red.identity_reduction = true;
        return red;
    }

    LerayProjector proj(sys.E, *sys.G);
    auto [ThetaL, ThetaR] = decompose_projector(proj.dense(), sys.np());
    assert_reduction_invariants(sys, proj, ThetaL, ThetaR);

    red.ThetaL = ThetaL;
    red.ThetaR = ThetaR;
    red.Et = ThetaR.transpose() * sys.E * ThetaR;
    red.At = ThetaR.transpose() * sys.Astiff * ThetaR;
    red.Bt = ThetaR.transpose() * sys.B;
    red.Ct = sys.C * ThetaR;

    const int N = red.N();
    if (N <= ReducedSystem::kMaterializeLimit) {
        // Ht[:, (b,c)] = ThetaR^T H(ThetaR e_b (x) ThetaR e_c), symmetric fill.
        std::vector<TensorEntry> entries;
        for (int b = 0; b < N; ++b) {
            Vector tb = ThetaR.col(b);
            for (int c = b; c < N; ++c) {
                Vector col = ThetaR.transpose() * sys.H.apply_bilinear(tb, ThetaR.col(c));
                for (int i = 0; i < N; ++i) {
                    if (col[i] == 0.0) continue;
                    if (b == c) {
                        entries.push_back({i, b, c, col[i]});
                    } else {
                        entries.push_back({i, b, c, col[i]});
                        entries.push_back({i, c, b, col[i]});
                    }
                }
            }
        }
        red.Ht = symmetrize_tensor(entries, N);
    }
    return red;
}

Vector recover_pressure(const QuadraticSystem& sys, const Vector& y, const Vector& u) {
    if (!sys.G) throw InvalidArgumentError("recover_pressure: system has no constraint G");
    double div = (sys.G->transpose() * y).norm();
    if (div > 1e-8 * (1.0 + y.norm()))
        throw InvalidArgumentError(
            "recover_pressure: state is not discretely divergence-free (||G^T y|| = " +
            std::to_string(div) + ")");
    Vector rhs = sys.Astiff * y + eval_quadratic(sys.H, y) + sys.B * u;
    LerayProjector proj(sys.E, *sys.G);
    return proj.pressure_multiplier(rhs);
}

}  // namespace polyhjb
