#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ifista_app/commands.hpp"
#include "ifista_app/config.hpp"
#include "ifista_app/trace_io.hpp"

using namespace ifista;
using namespace ifista::app;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("ifista_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_config(const fs::path& dir, const json& j, const std::string& file = "config.json")
{
    const auto path = (dir / file).string();
    write_text_file(path, j.dump(2));
    return path;
}

struct Result {
    int code;
    std::string out, err;
};

Result run(const std::string& config, const fs::path& out_dir, std::optional<std::uint64_t> seed = std::nullopt)
{
    CommonOptions opts;
    opts.config_path = config;
    opts.out_dir = out_dir.string();
    opts.seed = seed;
    std::ostringstream o, e;
    const int code = cmd_run(opts, o, e);
    return {code, o.str(), e.str()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path)
{
    std::ifstream in(path);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

void write_csv(const fs::path& path, const std::vector<std::vector<std::string>>& rows)
{
    std::ofstream out(path);
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << '\n';
    }
}

const json kQuadratic = {{"problem", {{"kind", "quadratic"}, {"n", 5}}}, {"max_iters", 40}};

json box_config(std::size_t iters)
{
    return {{"problem",
             {{"kind", "box_qp"}, {"n", 20}, {"seed", 3}, {"curvature_decades", 1.0},
              {"c", {{"dist", "uniform"}, {"lo", -2.0}, {"hi", 2.0}}}}},
            {"max_iters", iters}};
}

}  // namespace

TEST(Config, RoundTripIsCanonical)
{
    json j = box_config(100);
    j["delta"] = {{"c", 0.01}, {"p", 2.5}};
    j["b"] = {{"c", 0.01}, {"p", 2.5}, {"direction", "fixed_unit"}};
    j["params"] = {{"family", "power"}, {"alpha", 0.5}};
    j["step"] = {{"q", 1.5}, {"r", 0.5}};
    j["noise"] = {{"family", "gaussian_iid"}, {"sigma", 0.1}};
    j["solver"] = "stochastic";
    j["fit_window"] = {10, 90};
    const auto cfg = parse_config(j);
    const auto again = parse_config(to_json(cfg));
    EXPECT_EQ(cfg, again);
    EXPECT_EQ(canonical_dump(cfg), canonical_dump(again));
    EXPECT_EQ(run_id(cfg), run_id(again));

    // key order and omitted defaults do not change the id
    const auto reordered = parse_config(json::parse(R"({"max_iters": 40, "problem": {"n": 5, "kind": "quadratic"}})"));
    EXPECT_EQ(run_id(reordered), run_id(parse_config(kQuadratic)));
    auto other = parse_config(kQuadratic);
    other.seed = 1;
    EXPECT_NE(run_id(other), run_id(parse_config(kQuadratic)));
}

TEST(Config, FieldLevelErrors)
{
    try {
        parse_config(json::parse(R"({"problem": {"kind": "quadratic", "n": "five"}})"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("problem.n"), std::string::npos) << e.what();
    }
    try {
        parse_config(json::parse(R"({"delta": {"c": 1, "q": 2}})"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("delta.q"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_config(json::parse(R"({"solver": "newton"})")), ConfigError);
}

TEST(CmdRun, MinimalQuadratic)
{
    const auto dir = scratch("minimal");
    const auto r = run(write_config(dir, kQuadratic), dir / "out");
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const auto table = read_trace_csv((dir / "out" / "trace.csv").string());
    EXPECT_EQ(table.rows(), 40u);
    const auto summary = json::parse(read_text_file((dir / "out" / "summary.json").string()));
    for (const char* key : {"run_id", "final_F_gap", "slope", "max_bound_violation", "wall_clock_seconds", "feasibility"})
        EXPECT_TRUE(summary.contains(key)) << key;
    EXPECT_EQ(summary["max_bound_violation"].get<double>(), 0.0);
}

TEST(CmdRun, ByteIdenticalReruns)
{
    const auto dir = scratch("determinism");
    json j = box_config(300);
    j["delta"] = {{"c", 0.05}, {"p", 2.0}};
    j["b"] = {{"c", 0.05}, {"p", 2.0}};
    const auto cfg = write_config(dir, j);
    ASSERT_EQ(run(cfg, dir / "a", 11).code, exit_ok);
    ASSERT_EQ(run(cfg, dir / "b", 11).code, exit_ok);
    EXPECT_EQ(read_text_file((dir / "a" / "trace.csv").string()), read_text_file((dir / "b" / "trace.csv").string()));
    ASSERT_EQ(run(cfg, dir / "c", 12).code, exit_ok);
    EXPECT_NE(read_text_file((dir / "a" / "trace.csv").string()), read_text_file((dir / "c" / "trace.csv").string()));
}

TEST(CmdRun, SeedPrecedence)
{
    json j = kQuadratic;
    CommonOptions opts;
    opts.env_seed = 5;
    EXPECT_EQ(apply_overrides(j, opts).seed, 5u);
    j["seed"] = 9;
    EXPECT_EQ(apply_overrides(j, opts).seed, 9u);
    opts.seed = 13;
    EXPECT_EQ(apply_overrides(j, opts).seed, 13u);
    opts.max_iters = 7;
    EXPECT_EQ(apply_overrides(j, opts).max_iters, 7u);
}

TEST(CmdRun, StepAboveInverseLipschitz)
{
    const auto dir = scratch("gamma");
    json j = kQuadratic;
    j["gamma"] = 2.0;
    const auto r = run(write_config(dir, j), dir / "out");
    EXPECT_EQ(r.code, exit_config);
    EXPECT_NE(r.err.find("step-size constraint"), std::string::npos) << r.err;
}

TEST(CmdRun, MalformedConfig)
{
    const auto dir = scratch("malformed");
    write_text_file((dir / "broken.json").string(), "{\"problem\": ");
    EXPECT_EQ(run((dir / "broken.json").string(), dir / "out").code, exit_config);
    const auto r = run(write_config(dir, json{{"problem", {{"kind", "lasso"}, {"lambda", -1.0}}}}), dir / "out");
    EXPECT_EQ(r.code, exit_config);
    EXPECT_NE(r.err.find("problem.lambda"), std::string::npos) << r.err;
    EXPECT_EQ(run((dir / "missing.json").string(), dir / "out").code, exit_config);
}

TEST(CmdRun, DivergenceExitCode)
{
    const auto dir = scratch("divergence");
    json j = box_config(500);
    j["problem"] = {{"kind", "quadratic"}, {"n", 10}};
    j["b"] = {{"c", 1e8}, {"p", 0.0}, {"direction", "fixed_unit"}};
    EXPECT_EQ(run(write_config(dir, j), dir / "out").code, exit_divergence);
}

TEST(CmdRun, InnerCapExitCode)
{
    const auto dir = scratch("innercap");
    const json j = {{"problem", {{"kind", "tv1d"}, {"n", 20}}}, {"max_iters", 5}};
    EXPECT_EQ(run(write_config(dir, j), dir / "out").code, exit_inner_cap);
}

TEST(CmdRun, StochasticOutputs)
{
    const auto dir = scratch("stochastic");
    json j = box_config(200);
    j["solver"] = "stochastic";
    j["replications"] = 3;
    j["noise"] = {{"sigma", 0.1}};
    j["step"] = {{"q", 1.5}, {"r", 0.5}};
    const auto r = run(write_config(dir, j), dir / "out");
    ASSERT_EQ(r.code, exit_ok) << r.err;
    for (const char* f : {"trace.csv", "aggregate.csv", "trace_rep000.csv", "trace_rep002.csv", "summary.json"})
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    EXPECT_EQ(read_trace_csv((dir / "out" / "trace_rep001.csv").string()).rows(), 200u);
}

TEST(CmdSweep, EmptyGrid)
{
    const auto dir = scratch("sweep_empty");
    CommonOptions opts;
    opts.out_dir = (dir / "out").string();
    std::ostringstream o, e;
    opts.config_path = write_config(dir, json{{"base", kQuadratic}, {"grid", json::object()}});
    EXPECT_EQ(cmd_sweep(opts, o, e), exit_config);
    opts.config_path = write_config(dir, json{{"base", kQuadratic}, {"grid", {{"alpha", json::array()}}}});
    EXPECT_EQ(cmd_sweep(opts, o, e), exit_config);
    opts.config_path = write_config(dir, json{{"base", kQuadratic}, {"grid", {{"beta", {1.0}}}}});
    EXPECT_EQ(cmd_sweep(opts, o, e), exit_config);
}

TEST(CmdSweep, RateRegimesAndFeasibility)
{
    const auto dir = scratch("sweep_alpha");
    const json base = {{"problem",
                        {{"kind", "quadratic"}, {"n", 200}, {"seed", 3}, {"curvature_decades", 8.0},
                         {"c", {{"dist", "gaussian"}, {"scale", 1.0}}}}},
                       {"max_iters", 10'001}};
    const json spec = {{"base", base}, {"grid", {{"alpha", {0.25, 0.5, 1.0}}}}, {"fit_window", {100, 10'000}}};
    CommonOptions opts;
    opts.config_path = write_config(dir, spec);
    opts.out_dir = (dir / "out").string();
    opts.workers = 3;
    std::ostringstream o, e;
    ASSERT_EQ(cmd_sweep(opts, o, e), exit_ok) << e.str();
    const auto rows = read_csv(dir / "out" / "sweep.csv");
    ASSERT_EQ(rows.size(), 4u);
    const auto& h = rows[0];
    const auto col = [&](const char* name) {
        return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
    };
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double alpha = std::stod(rows[i][col("alpha")]);
        const double slope = std::stod(rows[i][col("slope")]);
        EXPECT_EQ(rows[i][col("status")], "ok");
        EXPECT_LE(slope, -2.0 * alpha + 0.15) << "alpha " << alpha;
        EXPECT_TRUE(fs::exists(dir / "out" / ("point_00" + std::to_string(i - 1)) / "trace.csv"));
    }

    // below-threshold decay: verdict false, run still executed
    json low = base;
    low["max_iters"] = 300;
    low["delta"] = {{"c", 0.01}};
    const json spec2 = {{"base", low}, {"grid", {{"alpha", {1.0}}, {"p", {1.5, 2.5}}}}};
    opts.config_path = write_config(dir, spec2, "grid2.json");
    opts.out_dir = (dir / "out2").string();
    ASSERT_EQ(cmd_sweep(opts, o, e), exit_ok);
    const auto rows2 = read_csv(dir / "out2" / "sweep.csv");
    ASSERT_EQ(rows2.size(), 3u);
    EXPECT_EQ(rows2[1][col("p")], "1.5");
    EXPECT_EQ(rows2[1][col("feasible")], "false");
    EXPECT_EQ(rows2[1][col("status")], "ok");
    EXPECT_FALSE(rows2[1][col("final_F_gap")].empty());
    EXPECT_EQ(rows2[2][col("feasible")], "true");
}

TEST(CmdSweep, PartialFailuresRecorded)
{
    const auto dir = scratch("sweep_partial");
    json base = kQuadratic;
    const json spec = {{"base", base}, {"grid", {{"alpha", {0.0, 1.0}}}}};
    CommonOptions opts;
    opts.config_path = write_config(dir, spec);
    opts.out_dir = (dir / "out").string();
    std::ostringstream o, e;
    ASSERT_EQ(cmd_sweep(opts, o, e), exit_ok);
    const auto rows = read_csv(dir / "out" / "sweep.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1][7], "error");
    EXPECT_EQ(rows[2][7], "ok");
}

TEST(CmdVerify, BoundsOnExactAndCorruptedTraces)
{
    const auto dir = scratch("verify_bounds");
    ASSERT_EQ(run(write_config(dir, box_config(200)), dir / "out").code, exit_ok);
    const auto trace = dir / "out" / "trace.csv";
    std::ostringstream o, e;
    EXPECT_EQ(cmd_verify_bounds(trace.string(), o, e), exit_ok) << o.str();
    EXPECT_NE(o.str().find(" 0 violations"), std::string::npos);

    for (std::size_t k : {3u, 50u, 150u}) {
        auto rows = read_csv(trace);
        rows[k + 1][5] = format_number(10.0 * std::stod(rows[k + 1][5]));
        const auto bad = dir / ("bad_" + std::to_string(k) + ".csv");
        write_csv(bad, rows);
        std::ostringstream bo, be;
        EXPECT_EQ(cmd_verify_bounds(bad.string(), bo, be), exit_verification);
        EXPECT_NE(bo.str().find("violation k=" + std::to_string(k) + ":"), std::string::npos) << bo.str();
        EXPECT_NE(bo.str().find(" 1 violations"), std::string::npos) << bo.str();
    }
}

TEST(CmdVerify, SchemaDeviations)
{
    const auto dir = scratch("verify_schema");
    ASSERT_EQ(run(write_config(dir, kQuadratic), dir / "out").code, exit_ok);
    auto rows = read_csv(dir / "out" / "trace.csv");
    auto missing = rows;
    for (auto& r : missing) r.erase(r.begin() + 7);
    write_csv(dir / "missing.csv", missing);
    std::ostringstream o, e;
    EXPECT_EQ(cmd_verify_bounds((dir / "missing.csv").string(), o, e), exit_config);
    EXPECT_NE(e.str().find("bound_rhs"), std::string::npos) << e.str();

    auto extra = rows;
    extra[0].push_back("note");
    for (std::size_t i = 1; i < extra.size(); ++i) extra[i].push_back("0");
    write_csv(dir / "extra.csv", extra);
    EXPECT_EQ(cmd_verify_bounds((dir / "extra.csv").string(), o, e), exit_config);
}

TEST(CmdVerify, LemmaSuiteIsDeterministic)
{
    std::ostringstream a, b;
    const int ca = cmd_verify_lemmas(123, a);
    const int cb = cmd_verify_lemmas(123, b);
    EXPECT_EQ(ca, cb);
    EXPECT_EQ(a.str(), b.str());
    // the 10/9 closed form of the square-root recurrence is the only failing check
    std::istringstream lines(a.str());
    std::vector<std::string> failing;
    for (std::string line; std::getline(lines, line);)
        if (line.rfind("FAIL lemmas/", 0) == 0) failing.push_back(line.substr(5, line.find(':') - 5));
    ASSERT_EQ(failing.size(), 1u);
    EXPECT_EQ(failing[0], "lemmas/recurrence_10_9_form");
    EXPECT_EQ(ca, exit_verification);
}

TEST(CmdVerify, ProxCertificateBattery)
{
    std::ostringstream o;
    EXPECT_EQ(cmd_verify_prox_certs(2024, o), exit_ok) << o.str();
    EXPECT_EQ(o.str().find("FAIL"), std::string::npos);
}
