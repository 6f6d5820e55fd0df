#include "polyhjb/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace polyhjb {

namespace {

struct StepRecord {
    double t;
    Vector y;
    Vector f;  // derivative at t, for Hermite interpolation
};

Vector hermite(const StepRecord& a, const StepRecord& b, double t) {
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * a.y + (s3 - 2 * s2 + s) * h * a.f +
           (-2 * s3 + 3 * s2) * b.y + (s3 - s2) * h * b.f;
}

}  // namespace

Trajectory integrate_closed_loop(const ReducedSystem& red, const GainSet& g, const Vector& y0,
                                 const IntegrateOptions& opts) {
    if (opts.T <= 0) throw InvalidArgumentError("integrate_closed_loop: T must be positive");
    if (y0.size() != red.N())
        throw DimensionError("integrate_closed_loop y0", red.N(), y0.size());

    Eigen::PartialPivLU<Matrix> et_lu(red.Et);
    auto rhs = [&](const Vector& y) {
        return Vector(et_lu.solve(red.At * y + red.apply_H(y) + red.Bt * eval_u(g, y)));
    };

    const double ynorm0 = y0.norm();
    const double blowup = 1e6 * (1.0 + ynorm0);

    std::vector<StepRecord> path;
    path.push_back({0.0, y0, rhs(y0)});

    // Bogacki-Shampine 2(3) with FSAL.
    double t = 0.0, h = opts.T / 100.0;
    Vector y = y0, k1 = path.back().f;
    long steps = 0;
    while (t < opts.T) {
        if (++steps > opts.max_steps)
            throw ConvergenceError("integrate_closed_loop: step budget exhausted", t);
        h = std::min(h, opts.T - t);
        Vector k2 = rhs(y + 0.5 * h * k1);
        Vector k3 = rhs(y + 0.75 * h * k2);
        Vector ynew = y + h * (2.0 / 9.0 * k1 + 1.0 / 3.0 * k2 + 4.0 / 9.0 * k3);
        Vector k4 = rhs(ynew);
        Vector err = h * (-5.0 / 72.0 * k1 + 1.0 / 12.0 * k2 + 1.0 / 9.0 * k3 - 1.0 / 8.0 * k4);

        double enorm = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            enorm += (err[i] / sc) * (err[i] / sc);
        }
        enorm = std::sqrt(enorm / y.size());

        if (!ynew.allFinite() || ynew.norm() > blowup)
            throw ConvergenceError("integrate_closed_loop: solution blow-up detected", y.norm());

        if (enorm <= 1.0) {
            t += h;
            y = ynew;
            k1 = k4;  // FSAL
            path.push_back({t, y, k1});
        }
        // Step proposal targets a fraction of the tolerance; the accepted
        // solution is the locally extrapolated third-order one.
        const double target = 0.35;
        double factor = enorm > 0 ? 0.9 * std::pow(target / enorm, 1.0 / 3.0) : 4.0;
        h *= std::clamp(factor, 0.2, 4.0);
        if (h < 1e-14 * std::max(1.0, t))
            throw ConvergenceError("integrate_closed_loop: step size underflow", y.norm());
    }

    // Output grid: uniform points, requested extras, and accepted steps.
    std::vector<double> out_times;
    for (int i = 0; i <= opts.n_output; ++i) out_times.push_back(opts.T * i / opts.n_output);
    for (double te : opts.extra_output)
        if (te >= 0 && te <= opts.T) out_times.push_back(te);
    for (const auto& rec : path) out_times.push_back(rec.t);
    std::sort(out_times.begin(), out_times.end());
    out_times.erase(std::unique(out_times.begin(), out_times.end(),
                                [&](double a, double b) { return std::abs(a - b) < 1e-12 * opts.T; }),
                    out_times.end());

    Trajectory traj;
    size_t seg = 0;
    for (double to : out_times) {
        while (seg + 1 < path.size() - 1 && path[seg + 1].t <= to) ++seg;
        Vector yo = (to <= path.front().t) ? path.front().y
                    : (to >= path.back().t) ? path.back().y
                                            : hermite(path[seg], path[seg + 1], to);
        traj.times.push_back(to);
        traj.states.push_back(yo);
        traj.controls.push_back(eval_u(g, yo));
    }
    return traj;
}

double cost_J(Trajectory& traj, double alpha, const ReducedSystem& red) {
    if (traj.times.empty()) throw InvalidArgumentError("cost_J: empty trajectory");
    const size_t n = traj.times.size();

    auto integrand = [&](size_t i) {
        double state = 0.5 * (red.Ct * traj.states[i]).squaredNorm();
        double ctrl = 0.5 * alpha * traj.controls[i].squaredNorm();
        return state + ctrl;
    };

    traj.J_running.assign(n, 0.0);
    double acc = 0.0, prev = integrand(0);
    for (size_t i = 1; i < n; ++i) {
        double cur = integrand(i);
        acc += 0.5 * (prev + cur) * (traj.times[i] - traj.times[i - 1]);
        traj.J_running[i] = acc;
        prev = cur;
    }

    // Tail: fit |y(t)|^2 ~ c exp(-2 sigma t) over the trailing time decade.
    const double T = traj.times.back();
    double sxx = 0, sx = 0, sy = 0, sxy = 0;
    long cnt = 0;
    for (size_t i = 0; i < n; ++i) {
        if (traj.times[i] < T / 10.0) continue;
        double norm2 = traj.states[i].squaredNorm();
        if (norm2 <= 0) continue;
        double lx = traj.times[i], ly = std::log(norm2);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    const double gT = integrand(n - 1);
    if (gT == 0.0) {
        traj.J_tail = 0.0;
        traj.decay_rate = 0.0;
    } else if (cnt < 2) {
        traj.J_tail = std::numeric_limits<double>::infinity();
        traj.tail_diverged = true;
    } else {
        double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        double sigma = -0.5 * slope;
        traj.decay_rate = sigma;
        if (sigma <= 0) {
            traj.J_tail = std::numeric_limits<double>::infinity();
            traj.tail_diverged = true;
        } else {
            traj.J_tail = gT / (2.0 * sigma);
        }
    }
    traj.J_total = acc + traj.J_tail;
    traj.tail_fraction = traj.J_total > 0 ? traj.J_tail / traj.J_total : 0.0;
    return traj.J_total;
}

Vector make_perturbation(const Vector& zbar, double ratio, std::uint64_t seed) {
    if (ratio <= 0) throw InvalidArgumentError("make_perturbation: ratio must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double base = zbar.norm() > 0 ? zbar.norm() : 1.0;
    Vector delta(zbar.size());
    for (long i = 0; i < zbar.size(); ++i) delta[i] = gauss(rng);
    return (ratio * base) * delta;
}

}  // namespace polyhjb
