#pragma once

#include <filesystem>

#include "polyhjb/io.hpp"
#include "polyhjb/problems.hpp"
#include "polyhjb/verify.hpp"

namespace polyhjb {

/// One pipeline run: problem, penalty, feedback degrees, quadrature order,
/// integration horizon and tolerances, seeds, output location.
struct RunConfig {
    ProblemSpec problem;
    double alpha = 1.0;
    std::vector<int> degrees = {2, 3};
    int quadrature_r = 30;
    double horizon = 10.0;
    double rtol = 1e-3;
    double atol = 1e-8;
    std::uint64_t seed = 1;
    double perturbation_ratio = 1.0 / 2000.0;
    std::string output_dir = "out";
    bool run_rate_check = true;  // verify-only: the slow N=2 oracle study
    int threads = 1;             // capped by POLYHJB_THREADS
};

RunConfig parse_config(const std::filesystem::path& file);

/// Hash of the canonical JSON form of the configuration.
std::string config_hash(const RunConfig& cfg);

/// Build (or load) the configured system.
QuadraticSystem build_system(const RunConfig& cfg);

/// Synthesize gains and persist them (Pi.mtx, K3.vec, X3.vec, meta.json).
/// Returns the process exit code.
int cmd_gains(const RunConfig& cfg);

/// Closed-loop simulation against persisted gains: per-degree trajectory
/// and control-norm CSVs plus cost JSONs and a side-by-side summary.
int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& gains_dir);

/// Full verification report (deterministic JSON); nonzero exit when an
/// executed gate fails. Guard-skipped gates are reported but do not fail.
int cmd_verify(const RunConfig& cfg);

/// Print a summary of a gains/output directory.
int cmd_info(const std::filesystem::path& dir);

}  // namespace polyhjb
