#pragma once

// Subcommands of the `ifista` executable. Each returns a process exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ifista_app/config.hpp"

namespace ifista::app {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_divergence = 2,
    exit_inner_cap = 3,
    exit_verification = 4,
};

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;        // --seed
    std::optional<std::uint64_t> env_seed;    // IFISTA_SEED
    std::optional<unsigned> workers;
    std::optional<std::size_t> max_iters;
};

/// Applies --seed, the environment seed (only when the config has no seed key)
/// and --max-iters to a parsed config.
ExperimentConfig apply_overrides(const nlohmann::json& raw, const CommonOptions& opts);

struct RunOutcome {
    int exit_code = exit_ok;
    std::string message;
    nlohmann::json summary;  // empty unless the solver finished
};

/// Runs one configured experiment and writes config.json, trace.csv and
/// summary.json into out_dir (stochastic runs add aggregate.csv and one
/// trace_repNNN.csv per replication).
RunOutcome execute_run(const ExperimentConfig& cfg, const std::string& out_dir, unsigned workers);

int cmd_run(const CommonOptions& opts, std::ostream& out, std::ostream& err);

/// Grid file: {"base": <config>, "grid": {"alpha": [...], "p": [...], "q": [...],
/// "r": [...], "sigma": [...]}, "fit_window": [k_min, k_max]}. Writes sweep.csv
/// and one point_NNN directory per grid point.
int cmd_sweep(const CommonOptions& opts, std::ostream& out, std::ostream& err);

int cmd_verify_bounds(const std::string& trace_path, std::ostream& out, std::ostream& err);
int cmd_verify_lemmas(std::uint64_t seed, std::ostream& out);
int cmd_verify_prox_certs(std::uint64_t seed, std::ostream& out);

}  // namespace ifista::app
