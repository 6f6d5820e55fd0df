#include "polyhjb/verify.hpp"

#include <cmath>

namespace polyhjb {

namespace {

double trapezoid_l2(const std::vector<double>& t, const std::vector<double>& sq) {
    double acc = 0.0;
    for (size_t i = 1; i < t.size(); ++i)
        acc += 0.5 * (sq[i] + sq[i - 1]) * (t[i] - t[i - 1]);
    return std::sqrt(acc);
}

}  // namespace

RateReport fit_rate(const std::vector<double>& scales, const std::vector<double>& errors,
                    double target_order) {
    if (scales.size() != errors.size() || scales.size() < 2)
        throw InvalidArgumentError("fit_rate: need matching scale/error lists");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const long n = static_cast<long>(scales.size());
    for (long i = 0; i < n; ++i) {
        double lx = std::log(scales[i]), ly = std::log(errors[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    RateReport rep;
    rep.scales = scales;
    rep.errors = errors;
    rep.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.target_order = target_order;
    return rep;
}

double hjb_residual(const ReducedSystem& red, const GainSet& g, const Vector& y) {
    const int N = red.N();
    if (y.size() != N) throw DimensionError("hjb_residual state", N, y.size());
    Eigen::PartialPivLU<Matrix> et_lu(red.Et);
    Eigen::PartialPivLU<Matrix> ett_lu(red.Et.transpose());

    Vector grad = red.Et.transpose() * (g.Pi * (red.Et * y));
    if (g.degree >= 3) {
        if (!g.K3) throw InvalidArgumentError("hjb_residual: degree-3 gain set without K3");
        Vector v = red.Et * y;
        Vector w = kron3_apply(v.transpose(), v.transpose(), Matrix::Identity(N, N),
                               g.K3->X3.values);
        grad += 0.5 * red.Et.transpose() * w;
    }

    const Vector drift = et_lu.solve(red.At * y + red.apply_H(y));
    const Vector bu = red.Bt.transpose() * ett_lu.solve(grad);
    return grad.dot(drift) + 0.5 * (red.Ct * y).squaredNorm() -
           bu.squaredNorm() / (2.0 * g.alpha);
}

RateReport hjb_slope(const ReducedSystem& red, const GainSet& g, const Vector& y0,
                     const std::vector<double>& scales) {
    std::vector<double> errs;
    for (double s : scales) errs.push_back(std::abs(hjb_residual(red, g, s * y0)));
    return fit_rate(scales, errs, g.degree + 1.0);
}

namespace {

// Forward path sampled at substep resolution with derivatives, enabling
// cubic Hermite evaluation anywhere inside the horizon.
struct ForwardPath {
    double dt_sub;
    std::vector<Vector> y;
    std::vector<Vector> f;

    Vector eval(double t) const {
        const double sN = static_cast<double>(y.size() - 1);
        double pos = std::clamp(t / dt_sub, 0.0, sN);
        size_t i = std::min(static_cast<size_t>(pos), y.size() - 2);
        double s = pos - i;
        double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y[i] + (s3 - 2 * s2 + s) * dt_sub * f[i] +
               (-2 * s3 + 3 * s2) * y[i + 1] + (s3 - s2) * dt_sub * f[i + 1];
    }
};

// Discretize-then-optimize workspace: the state marches with fixed-substep
// RK4, the cost uses composite Simpson weights on the substep grid, and the
// gradient is the exact reverse-mode adjoint of those discrete maps, so the
// descent can drive the discrete gradient to rounding level.
class OcpWorkspace {
public:
    OcpWorkspace(const ReducedSystem& red, double alpha, const Vector& y0, double T, int grid_n)
        : red_(red), alpha_(alpha), y0_(y0), grid_n_(grid_n),
          et_lu_(red.Et), ett_lu_(red.Et.transpose()), Q_(red.Ct.transpose() * red.Ct),
          EiB_(et_lu_.solve(red.Bt)) {
        dt_ = T / grid_n;
        h_ = dt_ / kSub;
        times_.resize(grid_n + 1);
        for (int i = 0; i <= grid_n; ++i) times_[i] = i * dt_;
        // Composite Simpson on the substep grid (kSub is even).
        const long M = static_cast<long>(grid_n) * kSub;
        w_.assign(M + 1, 0.0);
        for (long s = 0; s + 2 <= M; s += 2) {
            w_[s] += h_ / 3.0;
            w_[s + 1] += 4.0 * h_ / 3.0;
            w_[s + 2] += h_ / 3.0;
        }
    }

    static constexpr int kSub = 4;

    Vector control_at(const std::vector<Vector>& u, double t) const {
        double pos = std::clamp(t / dt_, 0.0, static_cast<double>(grid_n_));
        size_t i = std::min(static_cast<size_t>(pos), u.size() - 2);
        double s = pos - i;
        return (1.0 - s) * u[i] + s * u[i + 1];
    }

    Vector rhs(const std::vector<Vector>& u, double t, const Vector& y) const {
        return et_lu_.solve(red_.At * y + red_.apply_H(y) + red_.Bt * control_at(u, t));
    }

    ForwardPath forward(const std::vector<Vector>& u) const {
        ForwardPath path;
        path.dt_sub = h_;
        Vector y = y0_;
        path.y.push_back(y);
        path.f.push_back(rhs(u, 0.0, y));
        for (long step = 0; step < static_cast<long>(grid_n_) * kSub; ++step) {
            double t = step * h_;
            Vector k1 = path.f.back();
            Vector k2 = rhs(u, t + 0.5 * h_, y + 0.5 * h_ * k1);
            Vector k3 = rhs(u, t + 0.5 * h_, y + 0.5 * h_ * k2);
            Vector k4 = rhs(u, t + h_, y + h_ * k3);
            y += h_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            path.y.push_back(y);
            path.f.push_back(rhs(u, t + h_, y));
        }
        return path;
    }

    double cost(const std::vector<Vector>& u, const ForwardPath& path) const {
        double acc = 0.0;
        for (size_t s = 0; s < path.y.size(); ++s) {
            double t = s * h_;
            acc += w_[s] * ((red_.Ct * path.y[s]).squaredNorm() +
                            alpha_ * control_at(u, t).squaredNorm());
        }
        return 0.5 * acc;
    }

    // Exact adjoint of forward() composed with cost(): reverse sweep over
    // the RK4 substeps with stage recomputation.
    std::vector<Vector> gradient(const std::vector<Vector>& u, const ForwardPath& path) const {
        const long M = static_cast<long>(grid_n_) * kSub;
        std::vector<Vector> grad(grid_n_ + 1, Vector::Zero(red_.m()));

        auto scatter_u = [&](double t, const Vector& gu) {
            double pos = std::clamp(t / dt_, 0.0, static_cast<double>(grid_n_));
            size_t i = std::min(static_cast<size_t>(pos), static_cast<size_t>(grid_n_ - 1));
            double s = pos - i;
            grad[i] += (1.0 - s) * gu;
            grad[i + 1] += s * gu;
        };

        // Direct quadrature contributions of the control.
        for (long s = 0; s <= M; ++s) {
            double t = s * h_;
            scatter_u(t, w_[s] * alpha_ * control_at(u, t));
        }

        // Jacobian-transpose action of the drift at a stage state.
        auto JT = [&](const Vector& ystage, const Vector& v) {
            Vector w = ett_lu_.solve(v);
            Vector out = red_.At.transpose() * w;
            const SymQuadTensor& Ht = red_.H_tensor();
            for (const auto& e : Ht.entries()) {
                out[e.k] += e.v * ystage[e.j] * w[e.i];
                out[e.j] += e.v * ystage[e.k] * w[e.i];
            }
            return out;
        };
        auto BuT = [&](const Vector& v) { return Vector(EiB_.transpose() * v); };

        Vector lam = w_[M] * (Q_ * path.y[M]);
        for (long step = M - 1; step >= 0; --step) {
            double t = step * h_;
            const Vector& y = path.y[step];
            // Recompute the stages of this substep.
            Vector k1 = path.f[step];
            Vector y2 = y + 0.5 * h_ * k1;
            Vector k2 = rhs(u, t + 0.5 * h_, y2);
            Vector y3 = y + 0.5 * h_ * k2;
            Vector k3 = rhs(u, t + 0.5 * h_, y3);
            Vector y4 = y + h_ * k3;

            Vector a4 = (h_ / 6.0) * lam;
            Vector j4 = JT(y4, a4);
            Vector a3 = (h_ / 3.0) * lam + h_ * j4;
            Vector j3 = JT(y3, a3);
            Vector a2 = (h_ / 3.0) * lam + 0.5 * h_ * j3;
            Vector j2 = JT(y2, a2);
            Vector a1 = (h_ / 6.0) * lam + 0.5 * h_ * j2;
            Vector j1 = JT(y, a1);

            scatter_u(t + h_, BuT(a4));
            scatter_u(t + 0.5 * h_, BuT(a2 + a3));
            scatter_u(t, BuT(a1));

            lam += j1 + j2 + j3 + j4;
            lam += w_[step] * (Q_ * y);  // quadrature contribution at node step
        }
        return grad;
    }

    // L2-calibrated norm of a node-indexed gradient: the raw entries carry
    // the quadrature weight ~dt per node.
    double grad_l2(const std::vector<Vector>& g) const {
        double acc = 0.0;
        for (size_t i = 0; i < g.size(); ++i) acc += g[i].squaredNorm() / dt_;
        return std::sqrt(acc);
    }

    double inner(const std::vector<Vector>& a, const std::vector<Vector>& b) const {
        double acc = 0.0;
        for (size_t i = 0; i < a.size(); ++i) acc += a[i].dot(b[i]);
        return acc;
    }

    const std::vector<double>& times() const { return times_; }
    double dt() const { return dt_; }

private:
    const ReducedSystem& red_;
    double alpha_;
    Vector y0_;
    int grid_n_;
    Eigen::PartialPivLU<Matrix> et_lu_;
    Eigen::PartialPivLU<Matrix> ett_lu_;
    Matrix Q_;
    Matrix EiB_;  // Et^-1 Bt
    double dt_ = 0.0, h_ = 0.0;
    std::vector<double> times_;
    std::vector<double> w_;  // Simpson weights on the substep grid
};

}  // namespace

OcpResult ocp_oracle(const ReducedSystem& red, double alpha, const Vector& y0, double T,
                     int grid_n, double tol) {
    if (red.N() > 4) throw GuardError("ocp_oracle: N capped at 4");
    if (red.m() > 2) throw GuardError("ocp_oracle: m capped at 2");
    if (grid_n > 2000) throw GuardError("ocp_oracle: grid capped at 2000");
    if (y0.size() != red.N()) throw DimensionError("ocp_oracle y0", red.N(), y0.size());

    OcpWorkspace ws(red, alpha, y0, T, grid_n);
    std::vector<Vector> u(grid_n + 1, Vector::Zero(red.m()));

    ForwardPath path = ws.forward(u);
    double J = ws.cost(u, path);
    std::vector<Vector> grad = ws.gradient(u, path);
    double gnorm = ws.l2_norm(grad);

    std::vector<Vector> dir(grid_n + 1), grad_old;
    for (int i = 0; i <= grid_n; ++i) dir[i] = -grad[i];
    double step = 1.0 / alpha;

    const int max_iter = 3000;
    int it = 0;
    for (; it < max_iter && gnorm > tol; ++it) {
        // Quadratic-fit line search along dir with a backtracking safeguard.
        double d0 = ws.l2_inner(grad, dir);
        if (d0 >= 0) {  // reset to steepest descent
            for (int i = 0; i <= grid_n; ++i) dir[i] = -grad[i];
            d0 = -gnorm * gnorm;
        }
        auto trial_cost = [&](double beta) {
            std::vector<Vector> ut(grid_n + 1);
            for (int i = 0; i <= grid_n; ++i) ut[i] = u[i] + beta * dir[i];
            ForwardPath pt = ws.forward(ut);
            return ws.cost(ut, pt);
        };
        double beta = step;
        double J1 = trial_cost(beta);
        // One-parabola fit through J(0), J'(0), J(beta).
        double denom = J1 - J - d0 * beta;
        if (denom > 0) {
            double bstar = -0.5 * d0 * beta * beta / denom;
            if (bstar > 1e-12 * step && std::isfinite(bstar)) {
                double Js = trial_cost(bstar);
                if (Js < J1) {
                    beta = bstar;
                    J1 = Js;
                }
            }
        }
        int backtrack = 0;
        while (J1 >= J && backtrack < 40) {
            beta *= 0.5;
            J1 = trial_cost(beta);
            ++backtrack;
        }
        if (J1 >= J)
            throw ConvergenceError("ocp_oracle: descent stagnation", gnorm);

        for (int i = 0; i <= grid_n; ++i) u[i] += beta * dir[i];
        step = beta;

        path = ws.forward(u);
        J = J1;
        grad_old = grad;
        grad = ws.gradient(u, path);
        double gnorm_old = gnorm;
        gnorm = ws.l2_norm(grad);

        // Polak-Ribiere update with periodic restart.
        double num = 0.0;
        for (int i = 0; i <= grid_n; ++i) num += grad[i].dot(grad[i] - grad_old[i]);
        double pr = num / (gnorm_old * gnorm_old + 1e-300);
        if (pr < 0 || it % 25 == 24) pr = 0.0;
        for (int i = 0; i <= grid_n; ++i) dir[i] = -grad[i] + pr * dir[i];
    }
    if (gnorm > tol)
        throw ConvergenceError("ocp_oracle: gradient tolerance not reached", gnorm);

    OcpResult res;
    res.times = ws.times();
    res.controls = u;
    res.states.resize(grid_n + 1);
    for (int i = 0; i <= grid_n; ++i)
        res.states[i] = path.y[static_cast<size_t>(i) * OcpWorkspace::kSub];
    res.J = J;
    res.gradient_norm = gnorm;
    res.iterations = it;
    return res;
}

std::vector<RateReport> rate_check(const ReducedSystem& red, double alpha,
                                   const std::vector<GainSet>& gains, const Vector& y0_dir,
                                   const std::vector<double>& scales, int grid_n, double) {
    if (gains.empty()) throw InvalidArgumentError("rate_check: no gain sets supplied");

    // Horizon from the slowest closed-loop mode of the first gain set.
    Matrix Api = red.At + red.Bt * gains.front().L2;
    double sigma = -pencil_abscissa(Api, red.Et);
    if (sigma <= 0) throw SingularOperatorError("rate_check: closed loop is not stable");
    const double T = 1.25 * std::log(1e8) / sigma;

    std::vector<std::vector<double>> errs(gains.size());
    for (double s : scales) {
        Vector y0 = s * y0_dir;
        double tol = std::max(1e-13, 1e-4 * s * s * s);
        OcpResult opt = ocp_oracle(red, alpha, y0, T, grid_n, tol);

        for (size_t gi = 0; gi < gains.size(); ++gi) {
            IntegrateOptions opts;
            opts.T = T;
            opts.rtol = 1e-10;
            opts.atol = 1e-14;
            opts.n_output = grid_n;
            Trajectory traj = integrate_closed_loop(red, gains[gi], y0, opts);

            // Trace u_d on the oracle grid by linear interpolation of the
            // dense output.
            std::vector<double> sq(opt.times.size());
            size_t k = 0;
            for (size_t i = 0; i < opt.times.size(); ++i) {
                double t = opt.times[i];
                while (k + 1 < traj.times.size() && traj.times[k + 1] < t) ++k;
                Vector ud;
                if (k + 1 >= traj.times.size()) {
                    ud = traj.controls.back();
                } else {
                    double t0 = traj.times[k], t1 = traj.times[k + 1];
                    double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
                    w = std::clamp(w, 0.0, 1.0);
                    ud = (1.0 - w) * traj.controls[k] + w * traj.controls[k + 1];
                }
                sq[i] = (opt.controls[i] - ud).squaredNorm();
            }
            errs[gi].push_back(trapezoid_l2(opt.times, sq));
        }
    }

    std::vector<RateReport> reports;
    for (size_t gi = 0; gi < gains.size(); ++gi)
        reports.push_back(fit_rate(scales, errs[gi], gains[gi].degree));
    return reports;
}

}  // namespace polyhjb
