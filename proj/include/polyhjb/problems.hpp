#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "polyhjb/model.hpp"

namespace polyhjb {

/// Divergence-free reference field for the Oseen problem. Built from a
/// nodal streamfunction (exactly divergence-free on the MAC grid) unless a
/// raw velocity field is supplied, which is then checked for
/// discrete divergence-freeness.
struct OseenZbarSpec {
    double amplitude = 0.0;
    std::optional<Vector> raw;
};

/// Axis-aligned control patch [x0,x1] x [y0,y1] inside the unit square.
struct ControlRegion {
    double x0, x1, y0, y1;
};

/// Description of a built-in (or external) test system.
struct ProblemSpec {
    enum class Kind { burgers1d, oseen_mac, random_quad, external };
    Kind kind = Kind::burgers1d;
    int n = 16;           // burgers1d / random_quad state dimension
    int nx = 4, ny = 4;   // oseen_mac grid
    int m = 1;            // control count (random_quad; shapes for oseen)
    double nu = 0.05;     // viscosity 1/Re
    double shift = 0.0;   // reaction coefficient c (instability knob)
    double amplitude = 0.0;  // oseen streamfunction amplitude
    std::vector<std::pair<double, double>> control_intervals = {{0.25, 0.45}};
    ControlRegion control_region = {0.25, 0.5, 0.25, 0.75};
    std::uint64_t seed = 1;
    bool stable = true;   // random_quad spectral shift
    std::string external_path;
};

/// 1-D viscous Burgers on (0,1), homogeneous Dirichlet, n interior points.
/// E = I, Astiff = nu * second difference + c * I, H = skew-split convection
/// (energy-neutral: <H(y (x) y), y> = 0), B = interval indicators,
/// C = sqrt(h) * I.
QuadraticSystem make_burgers(int n, double nu, double c,
                             const std::vector<std::pair<double, double>>& control_intervals);

/// 2-D Oseen system on a MAC staggered grid over the unit square, linearized
/// around the divergence-free zbar; saddle-point form with the discrete
/// gradient G (one pressure DOF pinned so G^T E^-1 G is nonsingular).
/// The forcing f_z is manufactured so zbar is an exact steady state.
QuadraticSystem make_oseen_mac(int nx, int ny, double nu, const OseenZbarSpec& zbar_spec,
                               const ControlRegion& region, int m, double shift = 0.0);

/// Seed-deterministic random quadratic system; if stable, the spectral
/// abscissa of Astiff is shifted to exactly -0.5.
QuadraticSystem make_random_quad(int n, int m, std::uint64_t seed, bool stable);

/// Dispatch a ProblemSpec to the builders above (external handled in io).
QuadraticSystem make_system(const ProblemSpec& spec);

/// Picard iteration for the stationary system
///   Astiff z + H(z (x) z) + G q + f_z = 0,  G^T z + f_q = 0,
/// freezing H(z_prev (x) .) in each step. Returns z with the full nonlinear
/// residual below tol; throws ConvergenceError otherwise.
Vector solve_steady_picard(const QuadraticSystem& sys, double tol = 1e-10, int max_iter = 50);

/// Shifted system around zbar: Astiff += H(zbar (x) .) + H(. (x) zbar),
/// zbar recorded. Forcing vectors are retained for bookkeeping.
QuadraticSystem shift_around(const QuadraticSystem& sys, const Vector& zbar);

}  // namespace polyhjb
