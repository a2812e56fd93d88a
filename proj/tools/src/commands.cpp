#include "ifista_app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <ifista/analysis.hpp>
#include <ifista/types.hpp>

#include "ifista_app/suites.hpp"
#include "ifista_app/trace_io.hpp"

namespace ifista::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Smallest decay exponent over the nonzero error schedules; infinity when all are zero.
std::optional<double> effective_error_exponent(const ExperimentConfig& cfg)
{
    double p = kInf;
    for (const ScheduleSpec* s : {&cfg.delta, &cfg.b}) {
        if (!s->values.empty()) {
            if (std::any_of(s->values.begin(), s->values.end(), [](double v) { return v != 0.0; }))
                return std::nullopt;
            continue;
        }
        if (s->c != 0.0) p = std::min(p, s->p);
    }
    return p;
}

json feasibility_json(const ExperimentConfig& cfg)
{
    const auto p = effective_error_exponent(cfg);
    if (!p) return json{{"verdict", nullptr}, {"reason", "explicit error lists have no decay exponent"}};
    Feasibility f;
    try {
        f = schedule_feasibility(cfg.params.alpha_equivalent(), *p, cfg.q, cfg.r);
    } catch (const std::invalid_argument& e) {
        return json{{"verdict", nullptr}, {"reason", e.what()}};
    }
    bool verdict = f.iterate_convergence_guaranteed;
    if (cfg.solver != SolverMode::stochastic) verdict = cfg.weak ? f.weak_condition : f.deterministic_condition;
    return json{{"verdict", verdict},
                {"iterate_convergence_guaranteed", f.iterate_convergence_guaranteed},
                {"deterministic_condition", f.deterministic_condition},
                {"weak_condition", f.weak_condition},
                {"predicted_rate_exponent", f.predicted_rate_exponent},
                {"log_power", f.log_power},
                {"error_exponent", number_or_null(*p)},
                {"reason", f.reason}};
}

std::optional<RateFit> fit_gap(const std::vector<double>& gaps, const ExperimentConfig& cfg)
{
    if (gaps.size() < 2) return std::nullopt;
    std::size_t k_min = std::max<std::size_t>(1, gaps.size() / 100);
    std::size_t k_max = gaps.size() - 1;
    if (cfg.fit_window) {
        k_min = cfg.fit_window->first;
        k_max = std::min(cfg.fit_window->second, gaps.size() - 1);
    }
    if (std::any_of(gaps.begin() + static_cast<std::ptrdiff_t>(std::min(k_min, gaps.size())),
                    gaps.begin() + static_cast<std::ptrdiff_t>(std::min(k_max + 1, gaps.size())),
                    [](double g) { return !std::isfinite(g); }))
        return std::nullopt;
    try {
        return rate_fit(gaps, k_min, k_max);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

double max_violation(const SolverTrace& trace)
{
    double worst = 0.0;
    for (const auto& row : trace.rows)
        if (std::isfinite(row.bound_rhs) && std::isfinite(row.F_gap))
            worst = std::max(worst, row.F_gap - row.bound_rhs);
    return worst;
}

std::string rep_file(std::size_t rep)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_rep%03zu.csv", rep);
    return buf;
}

}  // namespace

ExperimentConfig apply_overrides(const json& raw, const CommonOptions& opts)
{
    ExperimentConfig cfg = parse_config(raw);
    if (opts.seed)
        cfg.seed = *opts.seed;
    else if (opts.env_seed && !(raw.is_object() && raw.contains("seed")))
        cfg.seed = *opts.env_seed;
    if (opts.max_iters) {
        if (*opts.max_iters == 0) throw ConfigError("--max-iters: must be at least 1");
        cfg.max_iters = *opts.max_iters;
    }
    return cfg;
}

RunOutcome execute_run(const ExperimentConfig& cfg, const std::string& out_dir, unsigned workers)
{
    RunOutcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
        fs::create_directories(out_dir);
        CompositeProblem problem = build_problem(cfg.problem);
        if (!problem.reference) {
            ReferenceOptions ro;
            ro.tol = cfg.reference_tol;
            problem.reference = reference_optimum(problem, ro);
        }
        const double L = problem.lipschitz();
        write_text_file((fs::path(out_dir) / "config.json").string(), canonical_dump(cfg) + "\n");

        json summary;
        summary["run_id"] = run_id(cfg);
        summary["solver"] = to_string(cfg.solver);
        summary["problem"] = problem.name;
        summary["lipschitz"] = L;
        summary["gamma"] = resolve_gamma(cfg, L);
        summary["reference"] = json{{"F_star", problem.reference->F_star},
                                    {"provenance", to_string(problem.reference->provenance)},
                                    {"tolerance", problem.reference->tolerance}};

        SolverTrace main_trace;
        if (cfg.solver == SolverMode::stochastic) {
            auto sc = build_stochastic(cfg, L);
            sc.workers = workers;
            const StochasticResult result = run_stochastic_fista(problem, sc);
            main_trace = aggregate_as_trace(result);
            for (std::size_t rep = 0; rep < result.replications.size(); ++rep)
                write_trace_csv((fs::path(out_dir) / rep_file(rep)).string(), result.replications[rep]);
            write_aggregate_csv((fs::path(out_dir) / "aggregate.csv").string(), result);
            summary["replications"] = result.replications.size();
        } else {
            const auto dc = build_deterministic(cfg, L);
            main_trace = cfg.solver == SolverMode::baseline ? run_proximal_gradient(problem, dc)
                                                            : run_inexact_fista(problem, dc);
        }
        write_trace_csv((fs::path(out_dir) / "trace.csv").string(), main_trace);

        std::vector<double> gaps;
        gaps.reserve(main_trace.rows.size());
        for (const auto& row : main_trace.rows) gaps.push_back(row.F_gap);
        const auto fit = fit_gap(gaps, cfg);

        summary["iterations"] = main_trace.rows.size();
        summary["final_F_gap"] = number_or_null(gaps.empty() ? kNaN : gaps.back());
        // a window of clipped zeros carries no rate information
        summary["slope"] = fit && fit->clipped < fit->points ? json(fit->slope) : json(nullptr);
        if (fit) summary["fit"] = json{{"intercept", fit->intercept}, {"residual", fit->residual},
                                       {"points", fit->points}, {"clipped", fit->clipped}};
        summary["max_bound_violation"] = max_violation(main_trace);
        summary["feasibility"] = feasibility_json(cfg);
        summary["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text_file((fs::path(out_dir) / "summary.json").string(), summary.dump(2) + "\n");
        outcome.summary = std::move(summary);
    } catch (const ConfigError& e) {
        outcome = {exit_config, e.what(), {}};
    } catch (const std::invalid_argument& e) {
        outcome = {exit_config, e.what(), {}};
    } catch (const ReferenceError& e) {
        outcome = {exit_config, std::string("reference solution: ") + e.what(), {}};
    } catch (const DivergenceError& e) {
        outcome = {exit_divergence, e.what(), {}};
    } catch (const InnerSolverCapError& e) {
        outcome = {exit_inner_cap, e.what(), {}};
    } catch (const fs::filesystem_error& e) {
        outcome = {exit_config, e.what(), {}};
    }
    return outcome;
}

int cmd_run(const CommonOptions& opts, std::ostream& out, std::ostream& err)
{
    ExperimentConfig cfg;
    try {
        cfg = apply_overrides(read_json(opts.config_path), opts);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
    const RunOutcome r = execute_run(cfg, opts.out_dir, opts.workers.value_or(0));
    if (r.exit_code != exit_ok) {
        err << "error: " << r.message << '\n';
        return r.exit_code;
    }
    out << "run " << r.summary["run_id"].get<std::string>() << ": " << r.summary["iterations"].get<std::size_t>()
        << " iterations, final F_gap " << r.summary["final_F_gap"].dump() << ", slope " << r.summary["slope"].dump()
        << ", max bound violation " << r.summary["max_bound_violation"].dump() << '\n';
    return exit_ok;
}

// Sweeps ---------------------------------------------------------------------

namespace {

struct GridPoint {
    std::size_t index = 0;
    json raw;                 // base with the grid values applied
    double alpha = kNaN, p = kNaN, q = kNaN, r = kNaN, sigma = kNaN;
};

struct SweepRow {
    GridPoint point;
    int exit_code = exit_ok;
    std::string message;
    json summary;
};

std::vector<double> axis(const json& grid, const char* key)
{
    if (!grid.contains(key)) return {};
    const json& v = grid.at(key);
    if (!v.is_array()) throw ConfigError(std::string("grid.") + key + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(std::string("grid.") + key + ": expected a list of numbers");
        out.push_back(e.get<double>());
    }
    if (out.empty()) throw ConfigError(std::string("grid.") + key + ": empty list");
    return out;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string json_cell(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return "";
    const json& v = j.at(key);
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return format_number(v.get<double>());
    return csv_field(v.is_string() ? v.get<std::string>() : v.dump());
}

}  // namespace

int cmd_sweep(const CommonOptions& opts, std::ostream& out, std::ostream& err)
{
    std::vector<GridPoint> points;
    std::vector<std::optional<ExperimentConfig>> configs;
    std::vector<std::string> config_errors;
    try {
        const json spec = read_json(opts.config_path);
        if (!spec.is_object()) throw ConfigError("sweep file: expected an object");
        for (const auto& [key, _] : spec.items())
            if (key != "base" && key != "grid" && key != "fit_window")
                throw ConfigError("sweep file: unknown key '" + key + "'");
        if (!spec.contains("grid") || !spec.at("grid").is_object()) throw ConfigError("grid: missing or not an object");
        const json& grid = spec.at("grid");
        for (const auto& [key, _] : grid.items())
            if (key != "alpha" && key != "p" && key != "q" && key != "r" && key != "sigma")
                throw ConfigError("grid." + key + ": unknown axis (expected alpha, p, q, r, sigma)");
        const std::vector<std::vector<double>> axes = {axis(grid, "alpha"), axis(grid, "p"), axis(grid, "q"),
                                                       axis(grid, "r"), axis(grid, "sigma")};
        if (std::all_of(axes.begin(), axes.end(), [](const auto& a) { return a.empty(); }))
            throw ConfigError("grid: empty grid (no axis has values)");

        json base = spec.value("base", json::object());
        if (spec.contains("fit_window")) base["fit_window"] = spec.at("fit_window");

        std::size_t total = 1;
        for (const auto& a : axes)
            if (!a.empty()) total *= a.size();
        for (std::size_t n = 0; n < total; ++n) {
            // mixed-radix decode, last axis fastest
            std::vector<std::optional<double>> v(axes.size());
            std::size_t rest = n;
            for (std::size_t a = axes.size(); a-- > 0;) {
                if (axes[a].empty()) continue;
                v[a] = axes[a][rest % axes[a].size()];
                rest /= axes[a].size();
            }
            GridPoint gp;
            gp.index = n;
            gp.raw = base;
            if (v[0]) gp.raw["params"] = json{{"family", "power"}, {"alpha", *v[0]}, {"base", "critical"}};
            if (v[1])
                for (const char* s : {"delta", "b"}) gp.raw[s]["p"] = *v[1];
            if (v[2]) gp.raw["step"]["q"] = *v[2];
            if (v[3]) gp.raw["step"]["r"] = *v[3];
            if (v[4]) gp.raw["noise"]["sigma"] = *v[4];

            gp.alpha = v[0].value_or(kNaN);
            gp.p = v[1].value_or(kNaN);
            gp.q = v[2].value_or(kNaN);
            gp.r = v[3].value_or(kNaN);
            gp.sigma = v[4].value_or(kNaN);
            try {
                ExperimentConfig cfg = apply_overrides(gp.raw, opts);
                if (!v[0]) gp.alpha = cfg.params.alpha_equivalent();
                if (!v[1]) gp.p = cfg.delta.c != 0.0 ? cfg.delta.p : cfg.b.p;
                if (!v[2]) gp.q = cfg.q;
                if (!v[3]) gp.r = cfg.r;
                if (!v[4]) gp.sigma = cfg.sigma;
                configs.emplace_back(std::move(cfg));
                config_errors.emplace_back();
            } catch (const ConfigError& e) {
                configs.emplace_back();
                config_errors.emplace_back(e.what());
            }
            points.push_back(std::move(gp));
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const json::exception& e) {
        err << "error: sweep file: " << e.what() << '\n';
        return exit_config;
    }

    try {
        fs::create_directories(opts.out_dir);
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    std::vector<SweepRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    unsigned workers = opts.workers.value_or(0);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, points.size()));
    auto work = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            char dir[32];
            std::snprintf(dir, sizeof dir, "point_%03zu", i);
            const RunOutcome r = configs[i] ? execute_run(*configs[i], (fs::path(opts.out_dir) / dir).string(), 1)
                                            : RunOutcome{exit_config, config_errors[i], {}};
            rows[i] = {points[i], r.exit_code, r.message, r.summary};
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::ostringstream csv;
    csv << "point,alpha,p,q,r,sigma,exit_code,status,run_id,final_F_gap,slope,max_bound_violation,"
           "feasible,deterministic_condition,weak_condition,predicted_rate_exponent,wall_clock_seconds,message\n";
    std::size_t failed = 0;
    for (const auto& row : rows) {
        const auto& gp = row.point;
        const json feas = row.summary.is_object() ? row.summary.value("feasibility", json::object()) : json::object();
        if (row.exit_code != exit_ok) ++failed;
        const char* status = row.exit_code == exit_ok           ? "ok"
                             : row.exit_code == exit_divergence ? "divergence"
                             : row.exit_code == exit_inner_cap  ? "inner_cap"
                                                                : "error";
        csv << gp.index << ',' << format_number(gp.alpha) << ',' << format_number(gp.p) << ','
            << format_number(gp.q) << ',' << format_number(gp.r) << ',' << format_number(gp.sigma) << ','
            << row.exit_code << ',' << status << ',' << json_cell(row.summary, "run_id") << ','
            << json_cell(row.summary, "final_F_gap") << ',' << json_cell(row.summary, "slope") << ','
            << json_cell(row.summary, "max_bound_violation") << ',' << json_cell(feas, "verdict") << ','
            << json_cell(feas, "deterministic_condition") << ',' << json_cell(feas, "weak_condition") << ','
            << json_cell(feas, "predicted_rate_exponent") << ',' << json_cell(row.summary, "wall_clock_seconds")
            << ',' << csv_field(row.message) << '\n';
    }
    write_text_file((fs::path(opts.out_dir) / "sweep.csv").string(), csv.str());
    out << "sweep: " << rows.size() << " points, " << failed << " failed\n";
    return exit_ok;
}

// Verification ---------------------------------------------------------------

int cmd_verify_bounds(const std::string& trace_path, std::ostream& out, std::ostream& err)
{
    TraceTable table;
    try {
        table = read_trace_csv(trace_path);
    } catch (const TraceFormatError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
    const auto& k = table.col("k");
    const auto& t = table.col("t_k");
    const auto& gamma = table.col("gamma_k");
    const auto& delta = table.col("delta_k");
    const auto& b = table.col("b_norm");
    const auto& gap = table.col("F_gap");
    const auto& energy_col = table.col("energy");
    const auto& bound = table.col("bound_rhs");
    const auto& dist = table.col("x_dist_to_ref");
    const std::size_t n = table.rows();

    // Replay of the conservative deterministic bound for traces without a stored bound.
    const bool constant_gamma = n > 0 && std::all_of(gamma.begin(), gamma.end(), [&](double g) { return g == gamma[0]; });
    const bool can_replay = constant_gamma && n > 0 && std::isfinite(dist[0]);

    std::size_t checked = 0, replayed = 0, violations = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (!std::isfinite(gap[i])) continue;
        double rhs = bound[i];
        if (!std::isfinite(rhs) && can_replay) {
            DeterministicBoundInputs in;
            in.initial_dist2 = dist[0] * dist[0];
            in.gamma = gamma[0];
            in.t = std::span<const double>(t.data(), i);
            in.delta1 = std::span<const double>(delta.data(), i);
            in.delta2 = std::span<const double>(delta.data(), i);
            in.b_norm = std::span<const double>(b.data(), i);
            rhs = theorem_bound_deterministic(i, in);
            ++replayed;
        }
        if (std::isfinite(rhs)) {
            ++checked;
            const double tol = 1e-9 * std::max(std::abs(rhs), 1e-300) + 1e-15;
            if (gap[i] > rhs + tol) {
                ++violations;
                out << "violation k=" << format_number(k[i]) << ": F_gap " << format_number(gap[i])
                    << " > bound " << format_number(rhs) << '\n';
                continue;
            }
        }
        // E_k = 2 gamma_k t_{k-1}^2 r_k + ||v_k - x_*||^2 must dominate its first term.
        if (std::isfinite(energy_col[i])) {
            const double lead = 2.0 * gamma[i] * t[i - 1] * t[i - 1] * gap[i];
            if (lead > energy_col[i] + 1e-9 * std::max(std::abs(energy_col[i]), 1e-300) + 1e-15) {
                ++violations;
                out << "violation k=" << format_number(k[i]) << ": energy " << format_number(energy_col[i])
                    << " < 2 gamma t_{k-1}^2 F_gap = " << format_number(lead) << '\n';
            }
        }
    }
    out << "bounds: " << checked << " rows checked (" << replayed << " replayed), " << violations
        << " violations: " << (violations == 0 ? "PASS" : "FAIL") << '\n';
    return violations == 0 ? exit_ok : exit_verification;
}

namespace {

int report(const std::vector<SuiteCheck>& checks, const char* title, std::ostream& out)
{
    bool ok = true;
    for (const auto& c : checks) {
        ok = ok && c.pass();
        out << (c.pass() ? "PASS " : "FAIL ") << title << '/' << c.name << ": " << c.instances << " instances, "
            << c.failures << " above tolerance " << format_number(c.tolerance) << ", worst excess "
            << format_number(c.worst) << '\n';
    }
    out << title << ": " << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? exit_ok : exit_verification;
}

}  // namespace

int cmd_verify_lemmas(std::uint64_t seed, std::ostream& out)
{
    return report(run_lemma_suite(seed), "lemmas", out);
}

int cmd_verify_prox_certs(std::uint64_t seed, std::ostream& out)
{
    return report(run_prox_cert_suite(seed), "prox-certs", out);
}

}  // namespace ifista::app
