#include "polyhjb/problems.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace polyhjb {

namespace {

// MAC grid index helpers. u-velocities sit at (i*hx, (j+1/2)*hy) for
// i in [1, nx-1], j in [0, ny-1]; v-velocities at ((i+1/2)*hx, j*hy) for
// i in [0, nx-1], j in [1, ny-1]; pressures at cell centers.
struct MacGrid {
    int nx, ny;
    double hx, hy;

    int nu_dof() const { return (nx - 1) * ny; }
    int nv_dof() const { return nx * (ny - 1); }
    int n() const { return nu_dof() + nv_dof(); }

    int iu(int i, int j) const { return (i - 1) + (nx - 1) * j; }
    int iv(int i, int j) const { return nu_dof() + i + nx * (j - 1); }
    int ip(int i, int j) const { return i + nx * j; }

    bool u_valid(int i, int j) const { return i >= 1 && i <= nx - 1 && j >= 0 && j <= ny - 1; }
    bool v_valid(int i, int j) const { return i >= 0 && i <= nx - 1 && j >= 1 && j <= ny - 1; }

    double xu(int i) const { return i * hx; }
    double yu(int j) const { return (j + 0.5) * hy; }
    double xv(int i) const { return (i + 0.5) * hx; }
    double yv(int j) const { return j * hy; }
};

// Laplacian row for a velocity component with Dirichlet walls. Neighbors
// across a wall-normal boundary vanish (the DOF sits on the wall); neighbors
// across a tangential wall fold back with the no-slip ghost value -u.
void add_laplacian(Matrix& A, const MacGrid& g, double nu, bool ucomp) {
    const double cx = nu / (g.hx * g.hx), cy = nu / (g.hy * g.hy);
    if (ucomp) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 1; i <= g.nx - 1; ++i) {
                int r = g.iu(i, j);
                A(r, r) -= 2.0 * (cx + cy);
                if (g.u_valid(i - 1, j)) A(r, g.iu(i - 1, j)) += cx;
                if (g.u_valid(i + 1, j)) A(r, g.iu(i + 1, j)) += cx;
                if (g.u_valid(i, j - 1)) A(r, g.iu(i, j - 1)) += cy; else A(r, r) -= cy;
                if (g.u_valid(i, j + 1)) A(r, g.iu(i, j + 1)) += cy; else A(r, r) -= cy;
            }
    } else {
        for (int j = 1; j <= g.ny - 1; ++j)
            for (int i = 0; i < g.nx; ++i) {
                int r = g.iv(i, j);
                A(r, r) -= 2.0 * (cx + cy);
                if (g.v_valid(i, j - 1)) A(r, g.iv(i, j - 1)) += cy;
                if (g.v_valid(i, j + 1)) A(r, g.iv(i, j + 1)) += cy;
                if (g.v_valid(i - 1, j)) A(r, g.iv(i - 1, j)) += cx; else A(r, r) -= cx;
                if (g.v_valid(i + 1, j)) A(r, g.iv(i + 1, j)) += cx; else A(r, r) -= cx;
            }
    }
}

// Centered MAC convection -(z . grad) z as raw 3-tensor entries. Advecting
// velocities at a point are face averages of the transverse component.
std::vector<TensorEntry> mac_convection(const MacGrid& g) {
    std::vector<TensorEntry> raw;
    const double cx = 1.0 / (2.0 * g.hx), cy = 1.0 / (2.0 * g.hy);

    // u-momentum: -(u du/dx + vbar du/dy) at u-point (i,j).
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i <= g.nx - 1; ++i) {
            int r = g.iu(i, j);
            // -u * (u_{i+1} - u_{i-1}) / (2hx); out-of-range u is on the wall (zero).
            if (g.u_valid(i + 1, j)) raw.push_back({r, g.iu(i, j), g.iu(i + 1, j), -cx});
            if (g.u_valid(i - 1, j)) raw.push_back({r, g.iu(i, j), g.iu(i - 1, j), cx});
            // -vbar * (u_{j+1} - u_{j-1}) / (2hy) with tangential ghost u = -u.
            int vns[4][2] = {{i - 1, j}, {i, j}, {i - 1, j + 1}, {i, j + 1}};
            for (auto& vn : vns) {
                if (!g.v_valid(vn[0], vn[1])) continue;  // wall v vanishes
                int vdof = g.iv(vn[0], vn[1]);
                if (g.u_valid(i, j + 1)) raw.push_back({r, vdof, g.iu(i, j + 1), -0.25 * cy});
                else raw.push_back({r, vdof, g.iu(i, j), 0.25 * cy});
                if (g.u_valid(i, j - 1)) raw.push_back({r, vdof, g.iu(i, j - 1), 0.25 * cy});
                else raw.push_back({r, vdof, g.iu(i, j), -0.25 * cy});
            }
        }

    // v-momentum: -(ubar dv/dx + v dv/dy) at v-point (i,j).
    for (int j = 1; j <= g.ny - 1; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int r = g.iv(i, j);
            if (g.v_valid(i, j + 1)) raw.push_back({r, g.iv(i, j), g.iv(i, j + 1), -cy});
            if (g.v_valid(i, j - 1)) raw.push_back({r, g.iv(i, j), g.iv(i, j - 1), cy});
            int uns[4][2] = {{i, j - 1}, {i + 1, j - 1}, {i, j}, {i + 1, j}};
            for (auto& un : uns) {
                if (!g.u_valid(un[0], un[1])) continue;
                int udof = g.iu(un[0], un[1]);
                if (g.v_valid(i + 1, j)) raw.push_back({r, udof, g.iv(i + 1, j), -0.25 * cx});
                else raw.push_back({r, udof, g.iv(i, j), 0.25 * cx});
                if (g.v_valid(i - 1, j)) raw.push_back({r, udof, g.iv(i - 1, j), 0.25 * cx});
                else raw.push_back({r, udof, g.iv(i, j), -0.25 * cx});
            }
        }
    return raw;
}

// Discrete gradient with the last pressure DOF pinned (gauge fix).
Matrix mac_gradient(const MacGrid& g) {
    const int np = g.nx * g.ny - 1;
    Matrix G = Matrix::Zero(g.n(), np);
    auto set = [&](int row, int cell, double v) {
        if (cell < np) G(row, cell) += v;
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i <= g.nx - 1; ++i) {
            set(g.iu(i, j), g.ip(i, j), 1.0 / g.hx);
            set(g.iu(i, j), g.ip(i - 1, j), -1.0 / g.hx);
        }
    for (int j = 1; j <= g.ny - 1; ++j)
        for (int i = 0; i < g.nx; ++i) {
            set(g.iv(i, j), g.ip(i, j), 1.0 / g.hy);
            set(g.iv(i, j), g.ip(i, j - 1), -1.0 / g.hy);
        }
    return G;
}

// Streamfunction-derived velocity: u = d(psi)/dy, v = -d(psi)/dx with psi on
// grid nodes; discretely divergence-free by construction.
Vector mac_streamfunction_field(const MacGrid& g, double amplitude) {
    auto psi = [&](int i, int j) {
        double x = i * g.hx, y = j * g.hy;
        return amplitude * std::sin(M_PI * x) * std::sin(M_PI * y);
    };
    Vector z = Vector::Zero(g.n());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i <= g.nx - 1; ++i)
            z[g.iu(i, j)] = (psi(i, j + 1) - psi(i, j)) / g.hy;
    for (int j = 1; j <= g.ny - 1; ++j)
        for (int i = 0; i < g.nx; ++i)
            z[g.iv(i, j)] = -(psi(i + 1, j) - psi(i, j)) / g.hx;
    return z;
}

}  // namespace

QuadraticSystem make_burgers(int n, double nu, double c,
                             const std::vector<std::pair<double, double>>& control_intervals) {
    if (n < 4) throw InvalidArgumentError("make_burgers: n must be >= 4");
    if (nu <= 0) throw InvalidArgumentError("make_burgers: nu must be positive");
    const double h = 1.0 / (n + 1);

    QuadraticSystem sys;
    sys.E = Matrix::Identity(n, n);
    sys.Astiff = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        sys.Astiff(i, i) = -2.0 * nu / (h * h) + c;
        if (i > 0) sys.Astiff(i, i - 1) = nu / (h * h);
        if (i + 1 < n) sys.Astiff(i, i + 1) = nu / (h * h);
    }

    // Energy-neutral skew split of -y y_x: -(1/3)[y (Dy) + D(y y)] with the
    // centered antisymmetric difference D, so <H(y (x) y), y> = 0 exactly.
    std::vector<TensorEntry> raw;
    const double cd = 1.0 / (2.0 * h);
    for (int i = 0; i < n; ++i) {
        if (i + 1 < n) {
            raw.push_back({i, i, i + 1, -cd / 3.0});      // -1/3 y_i (y_{i+1})'
            raw.push_back({i, i + 1, i + 1, -cd / 3.0});  // -1/3 (y^2)_{i+1}'
        }
        if (i > 0) {
            raw.push_back({i, i, i - 1, cd / 3.0});
            raw.push_back({i, i - 1, i - 1, cd / 3.0});
        }
    }
    sys.H = symmetrize_tensor(raw, n);

    const int m = static_cast<int>(control_intervals.size());
    if (m == 0) throw InvalidArgumentError("make_burgers: at least one control interval");
    sys.B = Matrix::Zero(n, m);
    for (int col = 0; col < m; ++col) {
        auto [a, b] = control_intervals[col];
        int hits = 0;
        for (int i = 0; i < n; ++i) {
            double x = (i + 1) * h;
            if (x >= a && x <= b) {
                sys.B(i, col) = 1.0;
                ++hits;
            }
        }
        if (hits == 0)
            throw InvalidArgumentError("make_burgers: control interval [" + std::to_string(a) +
                                       "," + std::to_string(b) + "] contains no grid point");
    }
    sys.C = std::sqrt(h) * Matrix::Identity(n, n);
    sys.zbar = Vector::Zero(n);
    return sys;
}

QuadraticSystem make_oseen_mac(int nx, int ny, double nu, const OseenZbarSpec& zbar_spec,
                               const ControlRegion& region, int m, double shift) {
    if (nx < 3 || ny < 3) throw InvalidArgumentError("make_oseen_mac: nx, ny must be >= 3");
    if (m < 1) throw InvalidArgumentError("make_oseen_mac: m must be >= 1");
    if (region.x0 < 0 || region.x1 > 1 || region.y0 < 0 || region.y1 > 1 ||
        region.x0 >= region.x1 || region.y0 >= region.y1)
        throw InvalidArgumentError("make_oseen_mac: control region outside the unit square");

    MacGrid g{nx, ny, 1.0 / nx, 1.0 / ny};
    const int n = g.n();

    QuadraticSystem sys;
    sys.E = Matrix::Identity(n, n);
    sys.H = symmetrize_tensor(mac_convection(g), n);
    sys.G = mac_gradient(g);

    Matrix stokes = Matrix::Zero(n, n);
    add_laplacian(stokes, g, nu, true);
    add_laplacian(stokes, g, nu, false);
    stokes += shift * Matrix::Identity(n, n);

    Vector zbar;
    if (zbar_spec.raw) {
        zbar = *zbar_spec.raw;
        if (zbar.size() != n) throw DimensionError("oseen zbar size", n, zbar.size());
        Vector div = sys.G->transpose() * zbar;
        if (div.norm() > 1e-10)
            throw InvalidArgumentError("make_oseen_mac: zbar is not discretely divergence-free "
                                       "(||G^T zbar|| = " + std::to_string(div.norm()) + ")");
    } else {
        zbar = mac_streamfunction_field(g, zbar_spec.amplitude);
    }

    // Shifted form: Astiff = -K + H(zbar (x) I + I (x) zbar) with -K = stokes.
    sys.Astiff = stokes + 2.0 * sys.H.frozen_left(zbar);

    // Manufactured forcing so zbar solves the unshifted stationary system.
    Vector rhs = stokes * zbar + eval_quadratic(sys.H, zbar);
    Vector q = (sys.G->transpose() * *sys.G)
                   .ldlt()
                   .solve(-(sys.G->transpose() * rhs));
    sys.f_z = -(rhs + *sys.G * q);
    sys.f_q = Vector::Zero(sys.G->cols());
    sys.zbar = zbar;

    // Controls: m piecewise-linear shapes in y, constant in x; each shape
    // drives the y-velocity (first m columns) and x-velocity (next m).
    sys.B = Matrix::Zero(n, 2 * m);
    const double y0 = region.y0, y1 = region.y1;
    auto hat = [&](int l, double y) {
        double node = y0 + (l + 1) * (y1 - y0) / (m + 1);
        double width = (y1 - y0) / (m + 1);
        return std::max(0.0, 1.0 - std::abs(y - node) / width);
    };
    int hits = 0;
    for (int l = 0; l < m; ++l) {
        for (int j = 1; j <= ny - 1; ++j)
            for (int i = 0; i < nx; ++i) {
                double x = g.xv(i), y = g.yv(j);
                if (x >= region.x0 && x <= region.x1 && y >= y0 && y <= y1) {
                    sys.B(g.iv(i, j), l) = hat(l, y);
                    ++hits;
                }
            }
        for (int j = 0; j < ny; ++j)
            for (int i = 1; i <= nx - 1; ++i) {
                double x = g.xu(i), y = g.yu(j);
                if (x >= region.x0 && x <= region.x1 && y >= y0 && y <= y1) {
                    sys.B(g.iu(i, j), m + l) = hat(l, y);
                    ++hits;
                }
            }
    }
    if (hits == 0)
        throw InvalidArgumentError("make_oseen_mac: control region contains no velocity DOF");

    sys.C = std::sqrt(g.hx * g.hy) * Matrix::Identity(n, n);
    return sys;
}

QuadraticSystem make_random_quad(int n, int m, std::uint64_t seed, bool stable) {
    if (n < 1) throw InvalidArgumentError("make_random_quad: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_int_distribution<int> uidx(0, n - 1);

    QuadraticSystem sys;
    sys.E = Matrix::Identity(n, n);
    sys.Astiff = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) sys.Astiff(i, j) = unif(rng);
    if (stable) {
        Eigen::EigenSolver<Matrix> es(sys.Astiff, false);
        double abscissa = es.eigenvalues().real().maxCoeff();
        sys.Astiff -= (abscissa + 0.5) * Matrix::Identity(n, n);
    }

    std::vector<TensorEntry> raw;
    for (int e = 0; e < 3 * n; ++e) {
        int i = uidx(rng), j = uidx(rng), k = uidx(rng);
        raw.push_back({i, j, k, unif(rng)});
    }
    sys.H = symmetrize_tensor(raw, n);

    sys.B = Matrix::Zero(n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) sys.B(i, j) = unif(rng);
    sys.C = Matrix::Identity(n, n);
    sys.zbar = Vector::Zero(n);
    return sys;
}

QuadraticSystem make_system(const ProblemSpec& spec) {
    switch (spec.kind) {
        case ProblemSpec::Kind::burgers1d:
            return make_burgers(spec.n, spec.nu, spec.shift, spec.control_intervals);
        case ProblemSpec::Kind::oseen_mac:
            return make_oseen_mac(spec.nx, spec.ny, spec.nu, OseenZbarSpec{spec.amplitude, {}},
                                  spec.control_region, spec.m, spec.shift);
        case ProblemSpec::Kind::random_quad:
            return make_random_quad(spec.n, spec.m, spec.seed, spec.stable);
        case ProblemSpec::Kind::external:
            throw InvalidArgumentError("make_system: external systems are loaded via io");
    }
    throw InvalidArgumentError("make_system: unknown kind");
}

Vector solve_steady_picard(const QuadraticSystem& sys, double tol, int max_iter) {
    if (!sys.f_z) throw InvalidArgumentError("solve_steady_picard: system carries no forcing f_z");
    const int n = sys.n(), np = sys.np();
    const Vector fz = *sys.f_z;
    const Vector fq = sys.f_q ? *sys.f_q : Vector::Zero(np);

    Vector z = Vector::Zero(n);
    double resid = std::numeric_limits<double>::infinity();
    const double ref = 1.0 + fz.norm();

    auto residual = [&](const Vector& zz, const Vector& qq) {
        Vector r = sys.Astiff * zz + eval_quadratic(sys.H, zz) + fz;
        if (sys.G) r += *sys.G * qq;
        double rn = r.norm();
        if (sys.G) rn = std::hypot(rn, (sys.G->transpose() * zz + fq).norm());
        return rn;
    };

    for (int it = 0; it < max_iter; ++it) {
        Matrix frozen = sys.Astiff + sys.H.frozen_left(z);
        Vector q = Vector::Zero(np);
        Vector znew;
        if (sys.G) {
            Matrix kkt = Matrix::Zero(n + np, n + np);
            kkt.topLeftCorner(n, n) = frozen;
            kkt.topRightCorner(n, np) = *sys.G;
            kkt.bottomLeftCorner(np, n) = sys.G->transpose();
            Vector rhs(n + np);
            rhs.head(n) = -fz;
            rhs.tail(np) = -fq;
            Eigen::FullPivLU<Matrix> lu(kkt);
            if (!lu.isInvertible())
                throw SingularOperatorError("solve_steady_picard: singular saddle-point system");
            Vector sol = lu.solve(rhs);
            znew = sol.head(n);
            q = sol.tail(np);
        } else {
            Eigen::FullPivLU<Matrix> lu(frozen);
            if (!lu.isInvertible())
                throw SingularOperatorError("solve_steady_picard: singular linear system");
            znew = lu.solve(-fz);
        }
        if (!znew.allFinite() || znew.norm() > 1e8 * ref)
            throw ConvergenceError("solve_steady_picard: iteration diverged", resid);
        z = znew;
        resid = residual(z, q);
        if (resid <= tol * ref) return z;
    }
    throw ConvergenceError("solve_steady_picard: no convergence after " +
                           std::to_string(max_iter) + " iterations", resid);
}

QuadraticSystem shift_around(const QuadraticSystem& sys, const Vector& zbar) {
    QuadraticSystem out = sys;
    out.Astiff += 2.0 * sys.H.frozen_left(zbar);
    out.zbar = zbar;
    return out;
}

}  // namespace polyhjb
