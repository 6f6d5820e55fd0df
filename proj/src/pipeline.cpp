#include "polyhjb/pipeline.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "polyhjb/tensor_lyap.hpp"

namespace polyhjb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int env_threads() {
    const char* v = std::getenv("POLYHJB_THREADS");
    if (!v) return 1;
    int t = std::atoi(v);
    return t >= 1 ? t : 1;
}

ProblemSpec parse_problem(const json& j) {
    ProblemSpec p;
    const std::string kind = j.value("kind", "burgers1d");
    if (kind == "burgers1d") p.kind = ProblemSpec::Kind::burgers1d;
    else if (kind == "oseen_mac") p.kind = ProblemSpec::Kind::oseen_mac;
    else if (kind == "random_quad") p.kind = ProblemSpec::Kind::random_quad;
    else if (kind == "external") p.kind = ProblemSpec::Kind::external;
    else throw InvalidArgumentError("config: unknown problem kind '" + kind + "'");

    p.n = j.value("n", p.n);
    p.nx = j.value("nx", p.nx);
    p.ny = j.value("ny", p.ny);
    p.m = j.value("m", p.m);
    p.nu = j.value("nu", p.nu);
    p.shift = j.value("shift", p.shift);
    p.amplitude = j.value("amplitude", p.amplitude);
    p.seed = j.value("seed", p.seed);
    p.stable = j.value("stable", p.stable);
    p.external_path = j.value("path", p.external_path);
    if (j.contains("control_intervals")) {
        p.control_intervals.clear();
        for (const auto& iv : j["control_intervals"])
            p.control_intervals.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
    }
    if (j.contains("control_region")) {
        const auto& r = j["control_region"];
        p.control_region = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                            r.at(3).get<double>()};
    }
    return p;
}

json problem_to_json(const ProblemSpec& p) {
    json j;
    switch (p.kind) {
        case ProblemSpec::Kind::burgers1d: j["kind"] = "burgers1d"; break;
        case ProblemSpec::Kind::oseen_mac: j["kind"] = "oseen_mac"; break;
        case ProblemSpec::Kind::random_quad: j["kind"] = "random_quad"; break;
        case ProblemSpec::Kind::external: j["kind"] = "external"; break;
    }
    j["n"] = p.n;
    j["nx"] = p.nx;
    j["ny"] = p.ny;
    j["m"] = p.m;
    j["nu"] = p.nu;
    j["shift"] = p.shift;
    j["amplitude"] = p.amplitude;
    j["seed"] = p.seed;
    j["stable"] = p.stable;
    j["path"] = p.external_path;
    json ivs = json::array();
    for (auto& [a, b] : p.control_intervals) ivs.push_back({a, b});
    j["control_intervals"] = ivs;
    j["control_region"] = {p.control_region.x0, p.control_region.x1, p.control_region.y0,
                           p.control_region.y1};
    return j;
}

json config_to_json(const RunConfig& cfg) {
    json j;
    j["problem"] = problem_to_json(cfg.problem);
    j["alpha"] = cfg.alpha;
    j["degrees"] = cfg.degrees;
    j["quadrature_r"] = cfg.quadrature_r;
    j["horizon"] = cfg.horizon;
    j["rtol"] = cfg.rtol;
    j["atol"] = cfg.atol;
    j["seed"] = cfg.seed;
    j["perturbation_ratio"] = cfg.perturbation_ratio;
    j["run_rate_check"] = cfg.run_rate_check;
    return j;
}

// RAII lock file guarding an output directory.
class DirLock {
public:
    explicit DirLock(const fs::path& dir) : lock_(dir / ".lock") {
        fs::create_directories(dir);
        if (fs::exists(lock_))
            throw IoError("output directory is locked by another run: " + lock_.string());
        std::ofstream out(lock_);
        out << "locked\n";
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(lock_, ec);
    }

private:
    fs::path lock_;
};

void write_json(const fs::path& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << j.dump(2) << "\n";
}

json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    return json::parse(in);
}

struct Stage {
    std::string name;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

Vector initial_reduced_state(const QuadraticSystem& sys, const ReducedSystem& red,
                             const RunConfig& cfg) {
    const int n = sys.n();
    Vector delta;
    if (cfg.perturbation_ratio == 0.0) {
        delta = Vector::Zero(n);
    } else {
        Vector zbar = sys.zbar ? *sys.zbar : Vector::Zero(n);
        delta = make_perturbation(zbar, cfg.perturbation_ratio, cfg.seed);
    }
    if (sys.G) {
        LerayProjector proj(sys.E, *sys.G);
        delta = proj.project_state(delta);
    }
    return red.ThetaL.transpose() * delta;
}

void write_trajectory_csv(const fs::path& file, const Trajectory& traj,
                          const ReducedSystem& red) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    const int m = static_cast<int>(traj.controls.front().size());
    out << "t,ynorm";
    for (int c = 1; c <= m; ++c) out << ",u" << c;
    out << "\n";
    char buf[64];
    for (size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[i]);
        out << buf;
        std::snprintf(buf, sizeof buf, "%.17g", (red.ThetaR * traj.states[i]).norm());
        out << "," << buf;
        for (int c = 0; c < m; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", traj.controls[i][c]);
            out << "," << buf;
        }
        out << "\n";
    }
}

void write_controlnorm_csv(const fs::path& file, const Trajectory& traj) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << "t,unorm_sq\n";
    char buf[64];
    for (size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[i]);
        out << buf;
        std::snprintf(buf, sizeof buf, "%.17g", traj.controls[i].squaredNorm());
        out << "," << buf << "\n";
    }
}

json cost_to_json(const Trajectory& traj) {
    json j;
    j["J_running"] = traj.J_running.empty() ? 0.0 : traj.J_running.back();
    j["J_tail"] = traj.tail_diverged ? json("inf") : json(traj.J_tail);
    j["J_total"] = traj.tail_diverged ? json("inf") : json(traj.J_total);
    j["tail_fraction"] = traj.tail_fraction;
    j["decay_rate"] = traj.decay_rate;
    return j;
}

}  // namespace

RunConfig parse_config(const fs::path& file) {
    json j = read_json(file);
    RunConfig cfg;
    if (j.contains("problem")) cfg.problem = parse_problem(j["problem"]);
    cfg.alpha = j.value("alpha", cfg.alpha);
    if (j.contains("degrees")) cfg.degrees = j["degrees"].get<std::vector<int>>();
    cfg.quadrature_r = j.value("quadrature_r", cfg.quadrature_r);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.rtol = j.value("rtol", cfg.rtol);
    cfg.atol = j.value("atol", cfg.atol);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.perturbation_ratio = j.value("perturbation_ratio", cfg.perturbation_ratio);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.run_rate_check = j.value("run_rate_check", cfg.run_rate_check);
    cfg.threads = env_threads();

    if (cfg.alpha <= 0) throw InvalidArgumentError("config: alpha must be positive");
    if (cfg.degrees.empty()) throw InvalidArgumentError("config: degrees must be nonempty");
    for (int d : cfg.degrees)
        if (d != 2 && d != 3) throw InvalidArgumentError("config: degrees are 2 and/or 3");
    return cfg;
}

std::string config_hash(const RunConfig& cfg) {
    std::string dump = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

QuadraticSystem build_system(const RunConfig& cfg) {
    if (cfg.problem.kind == ProblemSpec::Kind::external) {
        if (cfg.problem.external_path.empty())
            throw InvalidArgumentError("config: external problem needs a path");
        return load_system(cfg.problem.external_path);
    }
    QuadraticSystem sys = make_system(cfg.problem);
    sys.validate();
    return sys;
}

int cmd_gains(const RunConfig& cfg) {
    const fs::path dir = cfg.output_dir;
    std::vector<fs::path> written;
    json timings;
    try {
        DirLock lock(dir);
        Stage total{"total"};

        Stage s1{"build"};
        QuadraticSystem sys = build_system(cfg);
        timings["build_s"] = s1.seconds();

        Stage s2{"reduce"};
        ReducedSystem red = reduce_system(sys);
        timings["reduce_s"] = s2.seconds();

        Stage s3{"riccati"};
        RiccatiSolution ric = solve_are(red, cfg.alpha);
        timings["riccati_s"] = s3.seconds();

        json meta;
        meta["config_hash"] = config_hash(cfg);
        meta["system_hash"] = system_hash(sys);
        meta["alpha"] = cfg.alpha;
        meta["degrees"] = cfg.degrees;
        meta["N"] = red.N();
        meta["m"] = red.m();
        meta["riccati_residual"] = ric.residual_norm;

        write_matrix_market(dir / "Pi.mtx", ric.Pi);
        written.push_back(dir / "Pi.mtx");

        const bool want_k3 =
            std::find(cfg.degrees.begin(), cfg.degrees.end(), 3) != cfg.degrees.end();
        if (want_k3) {
            Stage s4{"gain_k3"};
            QuadratureRule rule = build_quadrature_for_pencil(red, ric, cfg.quadrature_r);
            Order3Gain K3 = gain_k3_quadrature(red, ric, rule, cfg.threads);
            timings["gain_k3_s"] = s4.seconds();
            meta["quadrature_r"] = rule.r;
            meta["quadrature_certificate"] = rule.certificate;
            meta["lambda"] = rule.lambda;
            meta["R"] = rule.R;
            meta["k3_provenance"] = K3.provenance;
            write_vec(dir / "K3.vec", K3.Kt);
            written.push_back(dir / "K3.vec");
            write_vec(dir / "X3.vec", K3.X3.values);
            written.push_back(dir / "X3.vec");
        }

        write_json(dir / "meta.json", meta);
        written.push_back(dir / "meta.json");
        timings["total_s"] = total.seconds();
        write_json(dir / "timings.json", timings);  // wall times; not covered
                                                    // by the determinism contract
        std::cerr << "gains written to " << dir << "\n";
        return 0;
    } catch (const std::exception& ex) {
        for (const auto& f : written) {
            std::error_code ec;
            fs::remove(f, ec);
        }
        std::cerr << "gains stage failed: " << ex.what() << "\n";
        return 1;
    }
}

int cmd_simulate(const RunConfig& cfg, const fs::path& gains_dir) {
    try {
        QuadraticSystem sys = build_system(cfg);
        json meta = read_json(gains_dir / "meta.json");
        if (meta.value("system_hash", "") != system_hash(sys))
            throw InvalidArgumentError(
                "simulate: system/gain hash mismatch (gains were computed for a different "
                "system)");

        ReducedSystem red = reduce_system(sys);
        RiccatiSolution ric;
        ric.alpha = cfg.alpha;
        ric.Pi = read_matrix_market(gains_dir / "Pi.mtx");
        ric.Api = red.At - red.Bt * (red.Bt.transpose() * ric.Pi * red.Et) / cfg.alpha;
        ric.residual_norm = are_residual(red, cfg.alpha, ric.Pi);

        const fs::path dir = cfg.output_dir;
        DirLock lock(dir);

        Vector y0 = initial_reduced_state(sys, red, cfg);
        json summary;
        summary["config_hash"] = config_hash(cfg);
        summary["system_hash"] = meta.value("system_hash", "");

        for (int degree : cfg.degrees) {
            std::optional<Order3Gain> K3;
            if (degree == 3) {
                Order3Gain g3;
                g3.alpha = cfg.alpha;
                g3.N = red.N();
                g3.m = red.m();
                g3.Kt = read_vec(gains_dir / "K3.vec");
                g3.X3 = DenseTensorK(3, red.N());
                g3.X3.values = read_vec(gains_dir / "X3.vec");
                g3.provenance = meta.value("k3_provenance", "quadrature");
                K3 = std::move(g3);
            }
            GainSet g = make_gain_set(red, ric, degree, std::move(K3));

            IntegrateOptions opts;
            opts.T = cfg.horizon;
            opts.rtol = cfg.rtol;
            opts.atol = cfg.atol;
            Trajectory traj = integrate_closed_loop(red, g, y0, opts);
            cost_J(traj, cfg.alpha, red);

            const std::string tag = "u" + std::to_string(degree);
            write_trajectory_csv(dir / ("traj_" + tag + ".csv"), traj, red);
            write_controlnorm_csv(dir / ("controlnorm_" + tag + ".csv"), traj);
            write_json(dir / ("cost_" + tag + ".json"), cost_to_json(traj));

            json deg = cost_to_json(traj);
            double n0 = traj.states.front().norm();
            double nT = traj.states.back().norm();
            deg["norm_ratio_T"] = n0 > 0 ? nT / n0 : 0.0;
            if (sys.G) {
                double worst = 0.0;
                for (const auto& y : traj.states)
                    worst = std::max(worst, (sys.G->transpose() * (red.ThetaR * y)).norm());
                deg["max_divergence"] = worst;
            }
            summary[tag] = deg;
        }
        write_json(dir / "costs.json", summary);
        std::cerr << "simulation results written to " << dir << "\n";
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "simulate stage failed: " << ex.what() << "\n";
        return 1;
    }
}

namespace {

json gate(double value, double threshold, bool pass_below = true) {
    json g;
    g["value"] = value;
    g["threshold"] = threshold;
    g["pass"] = pass_below ? (value <= threshold) : (value >= threshold);
    return g;
}

json skipped(const std::string& why) {
    json g;
    g["skipped"] = true;
    g["reason"] = why;
    return g;
}

bool gate_ok(const json& g) { return g.value("skipped", false) || g.value("pass", false); }

}  // namespace

int cmd_verify(const RunConfig& cfg) {
    const fs::path dir = cfg.output_dir;
    json report;
    report["config_hash"] = config_hash(cfg);
    json& gates = report["gates"];

    try {
        DirLock lock(dir);
        QuadraticSystem sys = build_system(cfg);
        ReducedSystem red = reduce_system(sys);
        RiccatiSolution ric = solve_are(red, cfg.alpha);
        gates["riccati_residual"] = gate(ric.residual_norm, 1e-8);

        // Leray invariants (constrained systems only).
        if (sys.G) {
            LerayProjector proj(sys.E, *sys.G);
            const Matrix& P = proj.dense();
            gates["leray_idempotence"] = gate((P * P - P).norm() / (1.0 + P.norm()), 1e-12);
            Matrix GtEiP = sys.G->transpose() * sys.E.partialPivLu().solve(P);
            gates["leray_annihilation"] =
                gate(GtEiP.norm() / (1.0 + sys.G->norm()), 1e-12);
            Matrix W = red.ThetaL.transpose() * red.ThetaR;
            gates["leray_biorthogonality"] =
                gate((W - Matrix::Identity(red.N(), red.N())).norm(), 1e-12 * 3);
        } else {
            gates["leray_idempotence"] = skipped("unconstrained problem");
            gates["leray_annihilation"] = skipped("unconstrained problem");
            gates["leray_biorthogonality"] = skipped("unconstrained problem");
        }

        // Tensor right-hand side symmetry on the configured problem.
        if (red.N() <= 64) {
            DenseTensorK F = assemble_F(red, ric.Pi);
            gates["f_symmetry_defect"] = gate(f_symmetry_defect(F), 1e-12);
        } else {
            gates["f_symmetry_defect"] = skipped("N above the dense cap");
        }

        // Quadrature certificate at the configured order over [1, 100].
        QuadratureRule cert_rule = build_quadrature(1.0, 100.0, cfg.quadrature_r);
        gates["quadrature_certificate"] = gate(cert_rule.certificate, 1e-6);

        // Dense-vs-quadrature gain agreement and r-monotonicity.
        if (red.N() <= 10) {
            DenseTensorK F = assemble_F(red, ric.Pi);
            DenseTensorK X = solve_dense_k3(red, ric, F);
            Order3Gain dense = gain_k3_dense(red, ric, X);
            double dn = dense.Kt.norm() + 1e-300;
            std::vector<double> errs;
            for (int r : {5, 10, 20, 30}) {
                QuadratureRule rule = build_quadrature_for_pencil(red, ric, r);
                Order3Gain q = gain_k3_quadrature(red, ric, rule, cfg.threads);
                errs.push_back((q.Kt - dense.Kt).norm() / dn);
            }
            gates["gain_quadrature_vs_dense"] = gate(errs.back(), 1e-4);
            bool mono = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] > errs[3];
            json m;
            m["errors"] = errs;
            m["pass"] = mono;
            gates["gain_error_monotone"] = m;
        } else {
            gates["gain_quadrature_vs_dense"] = skipped("N above the dense-solve guard");
            gates["gain_error_monotone"] = skipped("N above the dense-solve guard");
        }

        // Structural chain checks at fixed tiny dimensions.
        {
            auto tiny = make_random_quad(3, 1, 12345, true);
            auto tred = reduce_system(tiny);
            auto tric = solve_are(tred, 1.0);
            DenseTensorK F = assemble_F(tred, tric.Pi);
            DenseTensorK X2(2, 3);
            Matrix D2 = tred.Et.transpose() * tric.Pi * tred.Et;
            X2.values = Eigen::Map<Vector>(D2.data(), 9);
            DenseTensorK R3 = assemble_Rk_dense(3, std::span<const DenseTensorK>(&X2, 1), tred, 1.0);
            gates["rk3_consistency"] =
                gate((R3.values - F.values).norm() / (1.0 + F.values.norm()), 1e-10);
        }
        {
            auto tiny = make_random_quad(2, 1, 54321, true);
            auto tred = reduce_system(tiny);
            auto tric = solve_are(tred, 1.0);
            DenseTensorK F = assemble_F(tred, tric.Pi);
            DenseTensorK X3 = weighted_to_derivative(solve_dense_k(3, tred, tric, F), tred.Et);
            DenseTensorK X2(2, 2);
            Matrix D2 = tred.Et.transpose() * tric.Pi * tred.Et;
            X2.values = Eigen::Map<Vector>(D2.data(), 4);
            std::array<DenseTensorK, 2> derivs = {X2, X3};
            DenseTensorK R4 = assemble_Rk_dense(4, derivs, tred, 1.0);
            gates["rk4_symmetry"] = gate(R4.symmetry_defect(), 1e-12);
        }

        // HJB residual slopes on the configured problem.
        {
            std::vector<double> scales;
            for (double s = 1e-1; s >= 1e-3 * 0.99; s /= std::sqrt(10.0)) scales.push_back(s);
            Vector y0 = Vector::Ones(red.N()).normalized();

            GainSet g2 = make_gain_set(red, ric, 2);
            RateReport rep2 = hjb_slope(red, g2, y0, scales);
            json j2;
            j2["slope"] = rep2.fitted_slope;
            j2["threshold"] = 2.8;
            j2["pass"] = rep2.fitted_slope >= 2.8;
            gates["hjb_slope_deg2"] = j2;

            QuadratureRule rule = build_quadrature_for_pencil(red, ric, cfg.quadrature_r);
            Order3Gain K3 = gain_k3_quadrature(red, ric, rule, cfg.threads);
            GainSet g3 = make_gain_set(red, ric, 3, K3);
            RateReport rep3 = hjb_slope(red, g3, y0, scales);
            json j3;
            j3["slope"] = rep3.fitted_slope;
            j3["threshold"] = 3.8;
            j3["pass"] = rep3.fitted_slope >= 3.8;
            gates["hjb_slope_deg3"] = j3;
        }

        // Theorem-rate study against the brute-force oracle (fixed tiny
        // system; the oracle is deliberately slow).
        if (cfg.run_rate_check) {
            auto tiny = make_random_quad(2, 1, 2024, true);
            auto tred = reduce_system(tiny);
            auto tric = solve_are(tred, 1.0);
            QuadratureRule rule = build_quadrature_for_pencil(tred, tric, 30);
            Order3Gain K3 = gain_k3_quadrature(tred, tric, rule, cfg.threads);
            std::vector<GainSet> gsets = {make_gain_set(tred, tric, 2),
                                          make_gain_set(tred, tric, 3, K3)};
            Vector dir0 = Vector::Ones(2).normalized();
            std::vector<double> scales = {0.3, 0.15, 0.06, 0.03, 0.012, 0.003};
            auto reports = rate_check(tred, 1.0, gsets, dir0, scales);
            json j2, j3;
            j2["slope"] = reports[0].fitted_slope;
            j2["threshold"] = 1.8;
            j2["pass"] = reports[0].fitted_slope >= 1.8;
            j2["errors"] = reports[0].errors;
            j3["slope"] = reports[1].fitted_slope;
            j3["threshold"] = 2.7;
            j3["pass"] = reports[1].fitted_slope >= 2.7;
            j3["errors"] = reports[1].errors;
            gates["rate_slope_deg2"] = j2;
            gates["rate_slope_deg3"] = j3;
        } else {
            gates["rate_slope_deg2"] = skipped("disabled in config");
            gates["rate_slope_deg3"] = skipped("disabled in config");
        }

        // Stabilization and the LQR value identity on the configured problem.
        {
            Vector y0 = initial_reduced_state(sys, red, cfg);
            if (y0.norm() == 0.0) {
                gates["stabilization_deg2"] = skipped("zero perturbation");
                gates["stabilization_deg3"] = skipped("zero perturbation");
                gates["lqr_value_identity"] = skipped("zero perturbation");
            } else {
                QuadratureRule rule = build_quadrature_for_pencil(red, ric, cfg.quadrature_r);
                Order3Gain K3 = gain_k3_quadrature(red, ric, rule, cfg.threads);
                for (int degree : {2, 3}) {
                    GainSet g = degree == 2 ? make_gain_set(red, ric, 2)
                                            : make_gain_set(red, ric, 3, K3);
                    IntegrateOptions opts;
                    opts.T = cfg.horizon;
                    opts.rtol = cfg.rtol;
                    opts.atol = cfg.atol;
                    Trajectory traj = integrate_closed_loop(red, g, y0, opts);
                    cost_J(traj, cfg.alpha, red);
                    double ratio = traj.states.back().norm() / y0.norm();
                    json jg = gate(ratio, 1e-3);
                    jg["J_total"] = traj.J_total;
                    gates["stabilization_deg" + std::to_string(degree)] = jg;
                }

                // Linearized loop: simulated cost vs (1/2) y0^T Et^T Pi Et y0.
                ReducedSystem lin = red;
                lin.Ht = SymQuadTensor(red.N());  // materialized empty tensor: Ht = 0
                RiccatiSolution lric = solve_are(lin, cfg.alpha);
                GainSet lg = make_gain_set(lin, lric, 2);
                IntegrateOptions opts;
                opts.T = cfg.horizon;
                opts.rtol = 1e-6;
                opts.atol = 1e-12;
                Trajectory traj = integrate_closed_loop(lin, lg, y0, opts);
                cost_J(traj, cfg.alpha, lin);
                double predicted = 0.5 * y0.dot(lin.Et.transpose() * lric.Pi * lin.Et * y0);
                double rel = std::abs(traj.J_total - predicted) / (std::abs(predicted) + 1e-300);
                gates["lqr_value_identity"] = gate(rel, 0.01);
            }
        }
        bool all = true;
        for (const auto& item : gates.items()) all = all && gate_ok(item.value());
        report["all_pass"] = all;
        write_json(dir / "verify_report.json", report);
        std::cout << report.dump(2) << "\n";
        return all ? 0 : 1;
    } catch (const std::exception& ex) {
        report["error"] = ex.what();
        write_json(dir / "verify_report.json", report);
        std::cerr << "verify failed: " << ex.what() << "\n";
        return 2;
    }
}

int cmd_info(const fs::path& dir) {
    try {
        json meta = read_json(dir / "meta.json");
        std::cout << "gains directory: " << dir << "\n" << meta.dump(2) << "\n";
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "info failed: " << ex.what() << "\n";
        return 1;
    }
}

}  // namespace polyhjb
