#include "ifista_app/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <ifista/random.hpp>

namespace ifista::app {

using nlohmann::json;

std::string to_string(SolverMode mode)
{
    switch (mode) {
    case SolverMode::deterministic: return "deterministic";
    case SolverMode::stochastic: return "stochastic";
    case SolverMode::baseline: return "baseline";
    }
    return "?";
}

namespace {

// Reads fields of one JSON object, remembering which keys were consumed.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& msg)
    {
        throw ConfigError("config field '" + path + "': " + msg);
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key)
    {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(at(key), "expected a number");
            out = v->get<double>();
        }
    }

    void optional_number(const std::string& key, std::optional<double>& out)
    {
        if (const json* v = find(key)) {
            if (v->is_null()) return;
            if (!v->is_number()) fail(at(key), "expected a number");
            out = v->get<double>();
        }
    }

    template <class T>
    void integer(const std::string& key, T& out, long long min_value = 0)
    {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail(at(key), "expected an integer");
            if (v->is_number_unsigned()) {
                const auto u = v->get<std::uint64_t>();
                if (static_cast<long double>(u) < min_value) fail(at(key), "must be >= " + std::to_string(min_value));
                out = static_cast<T>(u);
            } else {
                const auto s = v->get<long long>();
                if (s < min_value) fail(at(key), "must be >= " + std::to_string(min_value));
                out = static_cast<T>(s);
            }
        }
    }

    void boolean(const std::string& key, bool& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail(at(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out, std::initializer_list<const char*> allowed)
    {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(at(key), "expected a string");
            out = v->get<std::string>();
            for (const char* a : allowed)
                if (out == a) return;
            std::string msg = "unknown value '" + out + "' (expected one of:";
            for (const char* a : allowed) msg += std::string(" ") + a;
            fail(at(key), msg + ")");
        }
    }

    void numbers(const std::string& key, std::vector<double>& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_array()) fail(at(key), "expected an array of numbers");
            out.clear();
            for (std::size_t i = 0; i < v->size(); ++i) {
                if (!(*v)[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
                out.push_back((*v)[i].get<double>());
            }
        }
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& path, const std::string& msg)
{
    if (!ok) Fields::fail(path, msg);
}

VectorSpec parse_vector_spec(const json& j, const std::string& path)
{
    VectorSpec v;
    if (j.is_array()) {
        v.kind = VectorSpec::Kind::explicit_values;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) Fields::fail(path + "[" + std::to_string(i) + "]", "expected a number");
            v.values.push_back(j[i].get<double>());
        }
        return v;
    }
    Fields f(j, path);
    std::string dist = "uniform";
    f.string("dist", dist, {"uniform", "gaussian"});
    if (dist == "uniform") {
        v.kind = VectorSpec::Kind::uniform;
        f.number("lo", v.lo);
        f.number("hi", v.hi);
        require(v.lo <= v.hi, f.at("lo"), "lo must not exceed hi");
    } else {
        v.kind = VectorSpec::Kind::gaussian;
        f.number("scale", v.scale);
    }
    f.finish();
    return v;
}

json vector_spec_json(const VectorSpec& v)
{
    switch (v.kind) {
    case VectorSpec::Kind::explicit_values: return v.values;
    case VectorSpec::Kind::uniform: return json{{"dist", "uniform"}, {"lo", v.lo}, {"hi", v.hi}};
    case VectorSpec::Kind::gaussian: return json{{"dist", "gaussian"}, {"scale", v.scale}};
    }
    return json();
}

ScheduleSpec parse_schedule(const json& j, const std::string& path, std::string* direction)
{
    ScheduleSpec s;
    Fields f(j, path);
    f.number("c", s.c);
    f.number("p", s.p);
    f.numbers("values", s.values);
    if (direction) f.string("direction", *direction, {"seeded", "fixed_unit"});
    f.finish();
    require(s.c >= 0.0, f.at("c"), "must be >= 0");
    require(s.p >= 0.0, f.at("p"), "must be >= 0");
    for (double v : s.values) require(v >= 0.0 && std::isfinite(v), f.at("values"), "entries must be >= 0");
    return s;
}

json schedule_json(const ScheduleSpec& s)
{
    return json{{"c", s.c}, {"p", s.p}, {"values", s.values}};
}

}  // namespace

ErrorSchedule ScheduleSpec::build() const
{
    if (!values.empty()) return ErrorSchedule::list(values);
    return ErrorSchedule::power(c, p);
}

ParamSequence ParamsSpec::build() const
{
    if (family == "constant_one") return ParamSequence(ParamFamily::constant_one());
    if (family == "linear") return ParamSequence(ParamFamily::linear(a));
    if (family == "critical") return ParamSequence(ParamFamily::critical());
    if (family == "power")
        return ParamSequence(ParamFamily::power(
            alpha, base == "linear_half" ? ParamFamily::PowerBase::linear_half : ParamFamily::PowerBase::critical));
    return ParamSequence::from_values(values);
}

double ParamsSpec::alpha_equivalent() const
{
    if (family == "power") return alpha;
    if (family == "constant_one") return 0.0;
    return 1.0;
}

ExperimentConfig parse_config(const json& j)
{
    ExperimentConfig cfg;
    Fields root(j, "");

    if (const json* pj = root.find("problem")) {
        Fields f(*pj, "problem");
        auto& p = cfg.problem;
        f.string("kind", p.kind, {"quadratic", "box_qp", "lasso", "tv1d"});
        f.integer("n", p.n, 1);
        f.integer("m", p.m, 0);
        f.integer("seed", p.seed, 0);
        if (const json* c = f.find("c")) p.c = parse_vector_spec(*c, "problem.c");
        f.number("curvature_decades", p.curvature_decades);
        f.number("lower", p.lower);
        f.number("upper", p.upper);
        f.number("lambda", p.lambda);
        f.number("noise", p.noise);
        f.number("sparsity", p.sparsity);
        f.number("column_decades", p.column_decades);
        f.finish();
        require(p.curvature_decades >= 0.0, "problem.curvature_decades", "must be >= 0");
        require(p.column_decades >= 0.0, "problem.column_decades", "must be >= 0");
        require(p.lower <= p.upper, "problem.lower", "empty box: lower > upper");
        require(p.lambda > 0.0, "problem.lambda", "must be > 0");
        require(p.sparsity > 0.0 && p.sparsity <= 1.0, "problem.sparsity", "must lie in (0, 1]");
        require(p.noise >= 0.0, "problem.noise", "must be >= 0");
        if (p.kind == "tv1d") require(p.n >= 2, "problem.n", "tv1d needs n >= 2");
        if (p.c.kind == VectorSpec::Kind::explicit_values)
            require(static_cast<Index>(p.c.values.size()) == p.n, "problem.c", "must have n entries");
    }

    std::string solver = "deterministic";
    root.string("solver", solver, {"deterministic", "stochastic", "baseline"});
    cfg.solver = solver == "stochastic" ? SolverMode::stochastic
                 : solver == "baseline" ? SolverMode::baseline
                                        : SolverMode::deterministic;

    root.optional_number("gamma", cfg.gamma);
    if (cfg.gamma) require(*cfg.gamma > 0.0, "gamma", "must be > 0");
    root.number("gamma_factor", cfg.gamma_factor);
    require(cfg.gamma_factor > 0.0, "gamma_factor", "must be > 0");

    if (const json* pj = root.find("params")) {
        Fields f(*pj, "params");
        auto& p = cfg.params;
        f.string("family", p.family, {"constant_one", "linear", "critical", "power", "explicit"});
        f.number("a", p.a);
        f.number("alpha", p.alpha);
        f.string("base", p.base, {"linear_half", "critical"});
        f.numbers("values", p.values);
        f.finish();
        if (p.family == "linear") require(p.a >= 2.0, "params.a", "linear family needs a >= 2");
        if (p.family == "power") require(p.alpha > 0.0 && p.alpha <= 1.0, "params.alpha", "must lie in (0, 1]");
        if (p.family == "explicit") {
            require(!p.values.empty(), "params.values", "explicit family needs values");
            require(p.values.front() == 1.0, "params.values", "t_0 must equal 1");
        }
    }

    if (const json* d = root.find("delta")) cfg.delta = parse_schedule(*d, "delta", nullptr);
    if (const json* b = root.find("b")) cfg.b = parse_schedule(*b, "b", &cfg.b_direction);

    root.string("prox_direction", cfg.prox_direction, {"seeded_random", "fixed_unit", "adversarial"});
    root.boolean("weak", cfg.weak);
    root.string("bound_mode", cfg.bound_mode, {"conservative", "certified"});

    if (const json* sj = root.find("step")) {
        Fields f(*sj, "step");
        f.number("q", cfg.q);
        f.number("r", cfg.r);
        f.finish();
        require(cfg.q >= 0.0, "step.q", "must be >= 0");
        require(cfg.r >= 0.0, "step.r", "must be >= 0");
    }
    if (const json* nj = root.find("noise")) {
        Fields f(*nj, "noise");
        f.string("family", cfg.noise_family, {"sphere", "gaussian_iid"});
        f.number("sigma", cfg.sigma);
        f.finish();
        require(cfg.sigma >= 0.0, "noise.sigma", "must be >= 0");
    }

    root.integer("max_iters", cfg.max_iters, 1);
    root.integer("replications", cfg.replications, 1);
    root.integer("seed", cfg.seed, 0);
    root.number("reference_tol", cfg.reference_tol);
    require(cfg.reference_tol > 0.0, "reference_tol", "must be > 0");
    root.boolean("store_points", cfg.store_points);

    if (const json* w = root.find("fit_window")) {
        if (!w->is_null()) {
            const auto count = [](const json& e) { return e.is_number_integer() && e.get<std::int64_t>() >= 0; };
            if (!w->is_array() || w->size() != 2 || !count((*w)[0]) || !count((*w)[1]))
                Fields::fail("fit_window", "expected [k_min, k_max] with nonnegative integers");
            const auto lo = (*w)[0].get<std::size_t>(), hi = (*w)[1].get<std::size_t>();
            require(lo >= 1 && hi > lo, "fit_window", "need 1 <= k_min < k_max");
            cfg.fit_window = std::make_pair(lo, hi);
        }
    }
    root.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& cfg)
{
    const auto& p = cfg.problem;
    json j;
    j["problem"] = json{{"kind", p.kind},
                        {"n", p.n},
                        {"m", p.m},
                        {"seed", p.seed},
                        {"c", vector_spec_json(p.c)},
                        {"curvature_decades", p.curvature_decades},
                        {"lower", p.lower},
                        {"upper", p.upper},
                        {"lambda", p.lambda},
                        {"noise", p.noise},
                        {"sparsity", p.sparsity},
                        {"column_decades", p.column_decades}};
    j["solver"] = to_string(cfg.solver);
    j["gamma"] = cfg.gamma ? json(*cfg.gamma) : json(nullptr);
    j["gamma_factor"] = cfg.gamma_factor;
    j["params"] = json{{"family", cfg.params.family},
                       {"a", cfg.params.a},
                       {"alpha", cfg.params.alpha},
                       {"base", cfg.params.base},
                       {"values", cfg.params.values}};
    j["delta"] = schedule_json(cfg.delta);
    j["b"] = schedule_json(cfg.b);
    j["b"]["direction"] = cfg.b_direction;
    j["prox_direction"] = cfg.prox_direction;
    j["weak"] = cfg.weak;
    j["bound_mode"] = cfg.bound_mode;
    j["step"] = json{{"q", cfg.q}, {"r", cfg.r}};
    j["noise"] = json{{"family", cfg.noise_family}, {"sigma", cfg.sigma}};
    j["max_iters"] = cfg.max_iters;
    j["replications"] = cfg.replications;
    j["seed"] = cfg.seed;
    j["reference_tol"] = cfg.reference_tol;
    j["store_points"] = cfg.store_points;
    j["fit_window"] = cfg.fit_window ? json::array({cfg.fit_window->first, cfg.fit_window->second}) : json(nullptr);
    return j;
}

std::string canonical_dump(const ExperimentConfig& cfg)
{
    return to_json(cfg).dump();
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string run_id(const ExperimentConfig& cfg)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(canonical_dump(cfg)));
    return buf;
}

CompositeProblem build_problem(const ProblemSpec& spec)
{
    auto make_vector = [&](const VectorSpec& v) -> Vector {
        if (v.kind == VectorSpec::Kind::explicit_values)
            return Eigen::Map<const Vector>(v.values.data(), static_cast<Index>(v.values.size()));
        auto rng = make_rng(spec.seed, Stream::problem_data);
        if (v.kind == VectorSpec::Kind::uniform) return random_uniform(spec.n, v.lo, v.hi, rng);
        return v.scale * random_gaussian(spec.n, rng);
    };
    if (spec.kind == "quadratic")
        return make_quadratic(spec.n, make_vector(spec.c), log_spaced_curvature(spec.n, spec.curvature_decades));
    if (spec.kind == "box_qp")
        return make_box_qp(spec.n, make_vector(spec.c), Vector::Constant(spec.n, spec.lower),
                           Vector::Constant(spec.n, spec.upper), log_spaced_curvature(spec.n, spec.curvature_decades));
    if (spec.kind == "lasso") {
        LassoSpec ls;
        ls.n = spec.n;
        ls.m = spec.m ? spec.m : 2 * spec.n;
        ls.seed = spec.seed;
        ls.lambda = spec.lambda;
        ls.noise = spec.noise;
        ls.sparsity = spec.sparsity;
        ls.column_decades = spec.column_decades;
        return make_lasso(ls);
    }
    Tv1dSpec ts;
    ts.n = spec.n;
    ts.m = spec.m ? spec.m : (6 * spec.n) / 5;
    ts.seed = spec.seed;
    ts.lambda = spec.lambda;
    ts.noise = spec.noise;
    return make_tv1d(ts);
}

double resolve_gamma(const ExperimentConfig& cfg, double lipschitz)
{
    return cfg.gamma ? *cfg.gamma : cfg.gamma_factor / lipschitz;
}

DeterministicConfig build_deterministic(const ExperimentConfig& cfg, double lipschitz)
{
    DeterministicConfig d;
    d.gamma = resolve_gamma(cfg, lipschitz);
    d.params = cfg.params.build();
    d.delta = cfg.delta.build();
    d.b.magnitude = cfg.b.build();
    d.b.direction = cfg.b_direction == "fixed_unit" ? ErrorDirection::fixed_unit : ErrorDirection::seeded;
    d.b.seed = derive_seed(cfg.seed, Stream::gradient_error);
    d.prox_direction = direction_rule_from_string(cfg.prox_direction);
    d.weak = cfg.weak;
    d.bound_mode = cfg.bound_mode == "certified" ? BoundMode::certified : BoundMode::conservative;
    d.max_iters = cfg.max_iters;
    d.seed = cfg.seed;
    d.store_points = cfg.store_points;
    return d;
}

StochasticConfig build_stochastic(const ExperimentConfig& cfg, double lipschitz)
{
    StochasticConfig s;
    s.step.gamma = resolve_gamma(cfg, lipschitz);
    s.step.q = cfg.q;
    s.step.r = cfg.r;
    s.params = cfg.params.build();
    s.delta = cfg.delta.build();
    s.noise.sigma = cfg.sigma;
    s.noise.family = cfg.noise_family == "gaussian_iid" ? NoiseFamily::gaussian_iid : NoiseFamily::sphere;
    s.prox_direction = direction_rule_from_string(cfg.prox_direction);
    s.weak = cfg.weak;
    s.bound_mode = cfg.bound_mode == "certified" ? BoundMode::certified : BoundMode::conservative;
    s.max_iters = cfg.max_iters;
    s.replications = cfg.replications;
    s.seed = cfg.seed;
    s.store_points = cfg.store_points;
    return s;
}

}  // namespace ifista::app
