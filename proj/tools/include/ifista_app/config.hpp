#pragma once

// Experiment configuration: JSON in, canonical JSON out.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <ifista/inexact.hpp>
#include <ifista/params.hpp>
#include <ifista/problems.hpp>
#include <ifista/solvers.hpp>

namespace ifista::app {

/// Malformed configuration; the message names the offending field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SolverMode { deterministic, stochastic, baseline };
std::string to_string(SolverMode mode);

struct VectorSpec {
    enum class Kind { explicit_values, uniform, gaussian };
    Kind kind = Kind::uniform;
    std::vector<double> values;
    double lo = -1.0, hi = 1.0;  // uniform
    double scale = 1.0;          // gaussian
    friend bool operator==(const VectorSpec&, const VectorSpec&) = default;
};

struct ProblemSpec {
    std::string kind = "quadratic";  // quadratic | box_qp | lasso | tv1d
    Index n = 10;
    Index m = 0;                     // lasso / tv1d rows; 0 picks 2n (lasso) or 6n/5 (tv1d)
    std::uint64_t seed = 0;
    VectorSpec c;                    // quadratic / box_qp center
    double curvature_decades = 0.0;  // quadratic / box_qp
    double lower = -1.0, upper = 1.0;
    double lambda = 0.1;             // lasso / tv1d
    double noise = 0.1;
    double sparsity = 0.2;
    double column_decades = 0.0;

    friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

struct ScheduleSpec {
    double c = 0.0;
    double p = 0.0;
    std::vector<double> values;
    friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
    ErrorSchedule build() const;
};

struct ParamsSpec {
    std::string family = "critical";  // constant_one | linear | critical | power | explicit
    double a = 2.0;
    double alpha = 1.0;
    std::string base = "critical";
    std::vector<double> values;
    friend bool operator==(const ParamsSpec&, const ParamsSpec&) = default;
    ParamSequence build() const;
    /// Growth exponent used for feasibility checks.
    double alpha_equivalent() const;
};

struct ExperimentConfig {
    ProblemSpec problem;
    SolverMode solver = SolverMode::deterministic;
    std::optional<double> gamma;   // absolute step
    double gamma_factor = 1.0;     // gamma = factor / L when gamma is absent
    ParamsSpec params;
    ScheduleSpec delta;
    ScheduleSpec b;
    std::string b_direction = "seeded";
    std::string prox_direction = "seeded_random";
    bool weak = false;
    std::string bound_mode = "conservative";
    double q = 0.0;
    double r = 0.0;
    std::string noise_family = "sphere";
    double sigma = 0.0;
    std::size_t max_iters = 1000;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    double reference_tol = 1e-12;
    std::optional<std::pair<std::size_t, std::size_t>> fit_window;
    bool store_points = false;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Strict parse: unknown keys and type mismatches raise ConfigError with the
/// field path. Missing keys take their defaults.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Every field, sorted keys.
nlohmann::json to_json(const ExperimentConfig& cfg);
std::string canonical_dump(const ExperimentConfig& cfg);

/// 16 hex digits of the FNV-1a hash of the canonical dump.
std::string run_id(const ExperimentConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);

/// Builds the problem. Quadratic and box problems carry their analytic reference.
CompositeProblem build_problem(const ProblemSpec& spec);

/// Step size after resolving gamma / gamma_factor against L.
double resolve_gamma(const ExperimentConfig& cfg, double lipschitz);

DeterministicConfig build_deterministic(const ExperimentConfig& cfg, double lipschitz);
StochasticConfig build_stochastic(const ExperimentConfig& cfg, double lipschitz);

}  // namespace ifista::app
