#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ifista_app/commands.hpp"

namespace {

std::optional<std::uint64_t> env_seed()
{
    const char* s = std::getenv("IFISTA_SEED");
    if (!s || !*s) return std::nullopt;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used, 0);
        if (used == std::string(s).size()) return v;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring IFISTA_SEED='" << s << "' (not an unsigned integer)\n";
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace ifista::app;

    CLI::App app{"Inexact FISTA experiments: run, sweep and verify"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::size_t max_iters = 0;
    std::vector<CLI::Option*> seed_options;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "Experiment (run) or grid (sweep) JSON file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
        seed_options.push_back(sub->add_option("--seed", seed, "Master seed (overrides the config and IFISTA_SEED)"));
        sub->add_option("--workers", workers, "Concurrent replications or grid points (0: all cores)");
        sub->add_option("--max-iters", max_iters, "Override the iteration budget")->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "Run one experiment");
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "Run every point of a parameter grid");
    add_common(sweep);

    auto* verify = app.add_subcommand("verify", "Check bounds, lemma oracles or prox certificates");
    verify->require_subcommand(1);
    std::string trace_path;
    auto* vb = verify->add_subcommand("bounds", "Replay the rate bound against a trace CSV");
    vb->add_option("trace", trace_path, "Trace CSV")->required();
    auto* vl = verify->add_subcommand("lemmas", "Sequence-lemma oracle suites");
    auto* vp = verify->add_subcommand("prox-certs", "Inexact prox certificate battery");
    for (auto* sub : {vl, vp})
        seed_options.push_back(sub->add_option("--seed", seed, "Suite seed (default IFISTA_SEED or 0)"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    if (std::any_of(seed_options.begin(), seed_options.end(), [](const CLI::Option* o) { return o->count() > 0; }))
        opts.seed = seed;
    opts.env_seed = env_seed();
    if (workers) opts.workers = workers;
    if (max_iters) opts.max_iters = max_iters;

    if (run->parsed()) return cmd_run(opts, std::cout, std::cerr);
    if (sweep->parsed()) return cmd_sweep(opts, std::cout, std::cerr);
    if (vb->parsed()) return cmd_verify_bounds(trace_path, std::cout, std::cerr);
    const std::uint64_t suite_seed = opts.seed.value_or(opts.env_seed.value_or(0));
    if (vl->parsed()) return cmd_verify_lemmas(suite_seed, std::cout);
    return cmd_verify_prox_certs(suite_seed, std::cout);
}
