#pragma once

#include <cstdint>

#include "polyhjb/feedback.hpp"

namespace polyhjb {

/// Closed-loop path: states and controls on the output grid, with the
/// accumulated cost and its exponential tail estimate.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;    // reduced coordinates
    std::vector<Vector> controls;
    std::vector<double> J_running;  // cumulative cost at each output time
    double J_tail = 0.0;
    double J_total = 0.0;
    double tail_fraction = 0.0;
    double decay_rate = 0.0;  // fitted sigma of |y(t)|^2 ~ c exp(-2 sigma t)
    bool tail_diverged = false;
};

struct IntegrateOptions {
    double T = 10.0;
    double rtol = 1e-3;
    double atol = 1e-8;
    int n_output = 400;      // uniform output grid resolution
    long max_steps = 200000;
    std::vector<double> extra_output;  // additional requested sample times
};

/// Adaptive Bogacki-Shampine 2(3) integration of
///   Et ydot = At y + Ht(y (x) y) + Bt u_d(y)
/// with Et factored once. Accepted steps are Hermite-interpolated onto the
/// uniform output grid. Throws on blow-up or step-size underflow.
Trajectory integrate_closed_loop(const ReducedSystem& red, const GainSet& g, const Vector& y0,
                                 const IntegrateOptions& opts);

/// Trapezoidal cost 1/2 |Ct y|^2 + (alpha/2) |u|^2 over the output grid plus
/// a closed-form exponential tail fitted on the trailing time decade.
/// Fills the J fields of the trajectory and returns J_total.
double cost_J(Trajectory& traj, double alpha, const ReducedSystem& red);

/// Seeded standard-normal perturbation delta with |delta| proportional to
/// ratio * |zbar| (unit reference when zbar = 0). Callers Leray-project the
/// result before use.
Vector make_perturbation(const Vector& zbar, double ratio, std::uint64_t seed);

}  // namespace polyhjb
