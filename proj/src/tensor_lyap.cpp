#include "polyhjb/tensor_lyap.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <future>
#include <thread>

namespace polyhjb {

namespace {

// Stable asinh(exp(s)).
double node_from(double s) {
    if (s < -30.0) return std::exp(s);
    return s + std::log1p(std::sqrt(1.0 + std::exp(-2.0 * s)));
}

double weight_from(double s, double h) {
    if (s < -30.0) return h * std::exp(s);
    return h / std::sqrt(1.0 + std::exp(-2.0 * s));
}

double rule_error(int r, double h, double R) {
    // Deterministic log-spaced probe grid.
    const int probes = 600;
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        double x = std::exp(std::log(R) * p / (probes - 1));
        double s = 0.0;
        for (int j = -r; j <= r; ++j)
            s += weight_from(j * h, h) * std::exp(-node_from(j * h) * x);
        worst = std::max(worst, std::abs(1.0 / x - s));
    }
    return worst;
}

Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

}  // namespace

double QuadratureRule::evaluate(double x) const {
    double s = 0.0;
    for (size_t j = 0; j < nodes.size(); ++j) s += weights[j] * std::exp(-nodes[j] * x);
    return s;
}

QuadratureRule build_quadrature(double x_min, double x_max, int r) {
    if (!(x_min > 0) || x_max < x_min)
        throw InvalidArgumentError("build_quadrature: need 0 < x_min <= x_max");
    if (r < 1) throw InvalidArgumentError("build_quadrature: r must be >= 1");

    const double R = x_max / x_min;

    // Golden-section search for the step minimizing the certificate; the
    // error is unimodal in h for this substitution.
    double lo = 0.05, hi = 3.5;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = rule_error(r, a, R), fb = rule_error(r, b, R);
    for (int it = 0; it < 60; ++it) {
        if (fa < fb) {
            hi = b; b = a; fb = fa;
            a = hi - gr * (hi - lo);
            fa = rule_error(r, a, R);
        } else {
            lo = a; a = b; fa = fb;
            b = lo + gr * (hi - lo);
            fb = rule_error(r, b, R);
        }
    }
    double h = 0.5 * (lo + hi);

    QuadratureRule rule;
    rule.r = r;
    rule.h = h;
    rule.lambda = x_min;
    rule.R = R;
    for (int j = -r; j <= r; ++j) {
        rule.nodes.push_back(node_from(j * h));
        rule.weights.push_back(weight_from(j * h, h));
    }
    rule.certificate = rule_error(r, h, R);
    return rule;
}

Matrix expm_action(const Matrix& M, double t, const Matrix& V) {
    if (t < 0) throw InvalidArgumentError("expm_action: t must be nonnegative");
    if (M.rows() != M.cols()) throw DimensionError("expm_action M", M.rows(), M.cols());
    if (V.rows() != M.cols()) throw DimensionError("expm_action V rows", M.cols(), V.rows());
    if (!M.allFinite() || !V.allFinite())
        throw InvalidArgumentError("expm_action: non-finite input");
    if (t == 0.0) return V;
    Matrix E = (t * M).exp();
    if (!E.allFinite()) throw Error("expm_action: overflow in the matrix exponential");
    return E * V;
}

DenseTensorK assemble_F(const ReducedSystem& red, const Matrix& Pi) {
    const int N = red.N();
    if (N > 150) throw GuardError("assemble_F: dense right-hand side capped at N = 150");
    const SymQuadTensor& Ht = red.H_tensor();

    const Matrix W1 = red.Et.transpose() * Pi;  // Et^T Pi
    const Matrix W2 = Pi * red.Et;              // Pi Et
    const long N2 = static_cast<long>(N) * N;

    Vector T1 = Vector::Zero(N2 * N), T2 = Vector::Zero(N2 * N);
    for (const auto& e : Ht.entries()) {
        // T1[i, k, j] += W1(i, e.i) v  (modes: i fast, k mid, j slow)
        for (int i = 0; i < N; ++i)
            T1[i + static_cast<long>(N) * e.k + N2 * e.j] += W1(i, e.i) * e.v;
        // T2[k, j, l] += v W2(e.i, l)
        for (int l = 0; l < N; ++l)
            T2[e.k + static_cast<long>(N) * e.j + N2 * l] += e.v * W2(e.i, l);
    }

    DenseTensorK F(3, N);
    for (int c = 0; c < N; ++c)
        for (int b = 0; b < N; ++b)
            for (int a = 0; a < N; ++a) {
                long idx = a + static_cast<long>(N) * b + N2 * c;
                long swapped = b + static_cast<long>(N) * a + N2 * c;  // modes 1<->2
                F.values[idx] = -2.0 * (T1[idx] + T2[idx] + T1[swapped]);
            }
    return F;
}

double f_symmetry_defect(const DenseTensorK& F) {
    if (F.order != 3) throw DimensionError("f_symmetry_defect order", 3, F.order);
    return F.symmetry_defect();
}

DenseTensorK solve_dense_k3(const ReducedSystem& red, const RiccatiSolution& ric,
                            const DenseTensorK& F) {
    const int N = red.N();
    if (N > 12) throw GuardError("solve_dense_k3: dense solve capped at N = 12");
    if (F.dim != N || F.order != 3) throw DimensionError("solve_dense_k3 F dim", N, F.dim);
    if (pencil_abscissa(ric.Api, red.Et) >= 0)
        throw SingularOperatorError("solve_dense_k3: closed-loop pencil is not stable");

    const Matrix& E = red.Et;
    const Matrix& Api = ric.Api;
    Matrix A = kron(kron(E, E), Api) + kron(kron(E, Api), E) + kron(kron(Api, E), E);
    Eigen::PartialPivLU<Matrix> lu(A.transpose());
    DenseTensorK X(3, N);
    X.values = lu.solve(F.values);
    double resid = (A.transpose() * X.values - F.values).norm();
    if (!(resid <= 1e-10 * (F.values.norm() + 1.0)))
        throw SingularOperatorError("solve_dense_k3: singular operator (residual " +
                                    std::to_string(resid) + ")");
    return X;
}

Vector Order3Gain::contract_states(const Vector& y, const Vector& z) const {
    if (y.size() != N) throw DimensionError("gain contraction y", N, y.size());
    if (z.size() != N) throw DimensionError("gain contraction z", N, z.size());
    // Kt laid out channel-fastest: Kt[c + m j + m N k] y[j] z[k].
    Vector out = Vector::Zero(m);
    for (int k = 0; k < N; ++k) {
        if (z[k] == 0.0) continue;
        for (int j = 0; j < N; ++j) {
            const double w = y[j] * z[k];
            const long base = static_cast<long>(m) * (j + static_cast<long>(N) * k);
            for (int c = 0; c < m; ++c) out[c] += w * Kt[base + c];
        }
    }
    return out;
}

Order3Gain gain_k3_dense(const ReducedSystem& red, const RiccatiSolution& ric,
                         const DenseTensorK& X) {
    const int N = red.N();
    if (N > 12) throw GuardError("gain_k3_dense: capped at N = 12");
    Order3Gain g;
    g.alpha = ric.alpha;
    g.N = N;
    g.m = red.m();
    g.provenance = "dense";
    g.X3 = X;
    g.Kt = kron3_apply(red.Et.transpose(), red.Et.transpose(), red.Bt.transpose(), X.values);
    return g;
}

QuadratureRule build_quadrature_for_pencil(const ReducedSystem& red, const RiccatiSolution& ric,
                                           int r) {
    auto eigs = generalized_eigenvalues(ric.Api, red.Et);
    if (eigs.empty()) throw SingularOperatorError("build_quadrature_for_pencil: empty spectrum");
    double re_max = -std::numeric_limits<double>::infinity();
    std::vector<double> mags;
    for (const auto& ev : eigs) {
        re_max = std::max(re_max, ev.real());
        mags.push_back(std::abs(ev.real()));
    }
    if (re_max >= 0)
        throw SingularOperatorError("build_quadrature_for_pencil: pencil is not stable");
    std::sort(mags.rbegin(), mags.rend());
    const double lambda = std::abs(re_max);
    double top3 = 0.0;
    for (size_t i = 0; i < std::min<size_t>(3, mags.size()); ++i) top3 += mags[i];
    // Kronecker-sum eigenvalues are triple sums; 2x safety factor.
    const double x_max = 2.0 * top3;
    return build_quadrature(lambda, std::max(x_max, lambda), r);
}

Order3Gain gain_k3_quadrature(const ReducedSystem& red, const RiccatiSolution& ric,
                              const QuadratureRule& rule, int threads) {
    const int N = red.N(), m = red.m();
    if (pencil_abscissa(ric.Api, red.Et) >= 0)
        throw SingularOperatorError("gain_k3_quadrature: closed-loop pencil is not stable");

    DenseTensorK F = assemble_F(red, ric.Pi);

    Eigen::PartialPivLU<Matrix> et_lu(red.Et);
    Eigen::PartialPivLU<Matrix> ett_lu(red.Et.transpose());
    const Matrix M = et_lu.solve(ric.Api);        // Et^-1 Api
    const Matrix Z0 = et_lu.solve(red.Bt).transpose();  // Bt^T Et^-T, m x N

    const int terms = 2 * rule.r + 1;
    std::vector<Vector> k_terms(terms), x_terms(terms);

    auto compute = [&](int idx) {
        const double t = rule.nodes[idx] / rule.lambda;
        const double w = rule.weights[idx] / rule.lambda;
        const Matrix X = expm_action(M, t, Matrix::Identity(N, N));
        const Matrix XT = X.transpose();
        const Matrix Z = Z0 * XT;  // Bt^T Et^-T X^T
        k_terms[idx] = (-w) * kron3_apply(XT, XT, Z, F.values);
        const Matrix EX = ett_lu.solve(XT);  // Et^-T X^T
        x_terms[idx] = (-w) * kron3_apply(EX, EX, EX, F.values);
    };

    threads = std::max(1, threads);
    if (threads == 1) {
        for (int idx = 0; idx < terms; ++idx) compute(idx);
    } else {
        std::vector<std::future<void>> work;
        std::atomic<int> next{0};
        for (int w = 0; w < threads; ++w)
            work.push_back(std::async(std::launch::async, [&]() {
                for (int idx = next++; idx < terms; idx = next++) compute(idx);
            }));
        for (auto& f : work) f.get();
    }

    Order3Gain g;
    g.alpha = ric.alpha;
    g.N = N;
    g.m = m;
    g.provenance = "quadrature(r=" + std::to_string(rule.r) + ")";
    g.rule_certificate = rule.certificate;
    if (rule.certificate > 1e-3)
        g.provenance += " [warning: certificate " + std::to_string(rule.certificate) + "]";
    g.Kt = Vector::Zero(static_cast<long>(m) * N * N);
    g.X3 = DenseTensorK(3, N);
    for (int idx = 0; idx < terms; ++idx) {
        g.Kt += k_terms[idx];
        g.X3.values += x_terms[idx];
    }
    return g;
}

DenseTensorK assemble_Rk_dense(int k, std::span<const DenseTensorK> value_derivs,
                               const ReducedSystem& red, double alpha) {
    const int N = red.N();
    if (k != 3 && k != 4) throw GuardError("assemble_Rk_dense: k must be 3 or 4");
    if (N > 8) throw GuardError("assemble_Rk_dense: capped at N = 8");
    if (static_cast<int>(value_derivs.size()) != k - 2)
        throw InvalidArgumentError("assemble_Rk_dense: need derivative tensors of orders 2..k-1");
    for (int i = 0; i < k - 2; ++i)
        if (value_derivs[i].order != i + 2 || value_derivs[i].dim != N)
            throw DimensionError("assemble_Rk_dense derivative order", i + 2,
                                 value_derivs[i].order);

    Eigen::PartialPivLU<Matrix> et_lu(red.Et);
    Eigen::PartialPivLU<Matrix> ett_lu(red.Et.transpose());

    // Discrete D^2 F(0): columns D2F[:, (a,b)] = -2 Et^-1 Ht(e_a (x) e_b),
    // realized through the symmetric linearization of the parent tensor.
    std::vector<Vector> d2f(static_cast<size_t>(N) * N);
    for (int b = 0; b < N; ++b)
        for (int a = 0; a <= b; ++a) {
            Vector col = -et_lu.solve(
                red.apply_H_linearized(Vector::Unit(N, a), Vector::Unit(N, b)));
            d2f[a + static_cast<size_t>(N) * b] = col;
            d2f[b + static_cast<size_t>(N) * a] = col;
        }

    DenseTensorK R(k, N);

    // F-term: (k(k-1)/2) Sym_{k-2,2}( D^{k-1}V(0) (x) D^2F(0) ).
    {
        const DenseTensorK& Vk1 = value_derivs[k - 3];  // order k-1
        DenseTensorK U(k, N);
        std::vector<int> idx(k);
        for (long flat = 0; flat < U.values.size(); ++flat) {
            long rest = flat;
            for (int t = 0; t < k; ++t) {
                idx[t] = static_cast<int>(rest % N);
                rest /= N;
            }
            const Vector& g = d2f[idx[k - 2] + static_cast<size_t>(N) * idx[k - 1]];
            double s = 0.0;
            std::vector<int> vidx(k - 1);
            for (int t = 0; t < k - 2; ++t) vidx[t + 1] = idx[t];
            for (int i = 0; i < N; ++i) {
                vidx[0] = i;
                s += Vk1.at(vidx) * g[i];
            }
            U.values[flat] = s;
        }
        DenseTensorK symU = sym_ij(U, k - 2, 2);
        R.values = (k * (k - 1) / 2.0) * symU.values;
    }

    // Control pairing: (1/2alpha) sum_{i=2}^{k-2} binom(k,i)
    //   Sym_{i,k-i}( C_i (x) C_{k-i} ), nonempty from k = 4 on.
    for (int i = 2; i <= k - 2; ++i) {
        const DenseTensorK& Va = value_derivs[i - 1];      // order i+1
        const DenseTensorK& Vb = value_derivs[k - i - 1];  // order k-i+1
        const int mdim = red.m();
        const Matrix BtEinv = ett_lu.solve(red.Bt).transpose();  // Bt^T Et^-T, m x N

        // C_i[c, a_1..a_i] = sum_s BtEinv(c, s) V_{i+1}[s, a_1..a_i].
        auto build_c = [&](const DenseTensorK& V, int order) {
            std::vector<Vector> out(V.values.size() / N);  // indexed by trailing multi-index
            std::vector<int> vidx(order + 1);
            const long trail = V.values.size() / N;
            for (long tflat = 0; tflat < trail; ++tflat) {
                Vector slice(N);
                long rest = tflat;
                for (int t = 1; t <= order; ++t) {
                    vidx[t] = static_cast<int>(rest % N);
                    rest /= N;
                }
                for (int s = 0; s < N; ++s) {
                    vidx[0] = s;
                    slice[s] = V.at(vidx);
                }
                out[tflat] = BtEinv * slice;  // m-vector
            }
            return out;
        };
        auto Ca = build_c(Va, i);
        auto Cb = build_c(Vb, k - i);

        DenseTensorK T(k, N);
        const long lead = static_cast<long>(std::pow(N, i));
        for (long flat = 0; flat < T.values.size(); ++flat) {
            long a = flat % lead, b = flat / lead;
            T.values[flat] = Ca[a].dot(Cb[b]);
        }
        double binom = 1.0;
        for (int t = 0; t < i; ++t) binom = binom * (k - t) / (t + 1);
        DenseTensorK symT = sym_ij(T, i, k - i);
        R.values += (binom / (2.0 * alpha)) * symT.values;
        (void)mdim;
    }

    return R;
}

DenseTensorK solve_dense_k(int k, const ReducedSystem& red, const RiccatiSolution& ric,
                           const DenseTensorK& Rk) {
    const int N = red.N();
    if (k != 3 && k != 4) throw GuardError("solve_dense_k: k must be 3 or 4");
    long total = 1;
    for (int t = 0; t < k; ++t) total *= N;
    if (total > 4096) throw GuardError("solve_dense_k: N^k capped at 4096");
    if (Rk.order != k || Rk.dim != N) throw DimensionError("solve_dense_k Rk order", k, Rk.order);

    // Order-k Kronecker sum with Api rotating through the factor slots.
    Matrix L = Matrix::Zero(total, total);
    for (int mode = 0; mode < k; ++mode) {
        Matrix term = Matrix::Identity(1, 1);
        for (int pos = k - 1; pos >= 0; --pos)
            term = kron(term, pos == mode ? ric.Api : red.Et).eval();
        L += term;
    }
    Eigen::PartialPivLU<Matrix> lu(L.transpose());
    DenseTensorK X(k, N);
    X.values = lu.solve(Rk.values);
    double resid = (L.transpose() * X.values - Rk.values).norm();
    if (!(resid <= 1e-10 * (Rk.values.norm() + 1.0)))
        throw SingularOperatorError("solve_dense_k: singular chain operator");
    return X;
}

DenseTensorK weighted_to_derivative(const DenseTensorK& X, const Matrix& Et) {
    DenseTensorK out = X;
    for (int mode = 0; mode < X.order; ++mode)
        out = out.mode_multiply(mode, Et.transpose());
    return out;
}

}  // namespace polyhjb
