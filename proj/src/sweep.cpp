#include "trajlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "trajlab/errors.hpp"
#include "trajlab/rng.hpp"

namespace trajlab {

using nlohmann::json;

namespace {

double pop(std::map<std::string, double>& params, const std::string& kind,
           const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) {
        throw ConfigError("strategy '" + kind + "' requires parameter '" + name + "'");
    }
    const double v = it->second;
    params.erase(it);
    return v;
}

int pop_int(std::map<std::string, double>& params, const std::string& kind,
            const std::string& name) {
    const double v = pop(params, kind, name);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
        throw ConfigError("parameter '" + name + "' must be an integer, got " +
                          std::to_string(v));
    }
    return i;
}

std::uint64_t point_seed(std::uint64_t master, int index) {
    Rng rng = Rng::substream(master, static_cast<std::uint64_t>(index) + 0x5157ULL);
    return rng.next_u64();
}

}  // namespace

StrategyConfig strategy_from_params(const std::string& kind,
                                    const std::map<std::string, double>& params,
                                    MaskProvider provider, bool basic,
                                    const MixtureKey& superclass_source) {
    static const std::map<std::string, std::vector<std::string>> allowed = {
        {"base", {"omega"}},
        {"superclass", {"omega"}},
        {"mixed", {"omega_c", "omega_s"}},
        {"switching", {"omega", "t_sw"}},
        {"multistage", {"omega_c", "omega_s", "t_sw"}},
        {"masked", {"omega_c", "omega_s", "omega_c0", "omega_s0", "t_sw", "q"}},
        {"profusion", {"omega_c", "omega_s", "r"}},
    };
    auto kind_it = allowed.find(kind);
    if (kind_it == allowed.end()) {
        throw ConfigError("unknown strategy kind: " + kind);
    }
    for (const auto& [name, _] : params) {
        const auto& ok = kind_it->second;
        if (std::find(ok.begin(), ok.end(), name) == ok.end()) {
            throw ConfigError("parameter '" + name + "' not valid for " + kind);
        }
    }

    std::map<std::string, double> p = params;
    StrategyConfig cfg;
    cfg.superclass_source = superclass_source;

    if (kind == "base") {
        cfg.body = BaseStrategy{pop(p, kind, "omega")};
    } else if (kind == "superclass") {
        cfg.body = SuperclassStrategy{pop(p, kind, "omega")};
    } else if (kind == "mixed") {
        MixedStrategy s;
        s.omega_c = pop(p, kind, "omega_c");
        s.omega_s = pop(p, kind, "omega_s");
        cfg.body = s;
    } else if (kind == "switching") {
        SwitchingStrategy s;
        s.omega = pop(p, kind, "omega");
        s.t_sw = pop_int(p, kind, "t_sw");
        cfg.body = s;
    } else if (kind == "multistage") {
        MultiStageStrategy s;
        s.omega_c = pop(p, kind, "omega_c");
        s.omega_s = pop(p, kind, "omega_s");
        s.t_sw = pop_int(p, kind, "t_sw");
        cfg.body = s;
    } else if (kind == "masked") {
        MaskedStrategy s;
        s.omega_c = pop(p, kind, "omega_c");
        s.omega_s = pop(p, kind, "omega_s");
        s.omega_c0 = p.count("omega_c0") ? pop(p, kind, "omega_c0") : s.omega_c;
        s.omega_s0 = p.count("omega_s0") ? pop(p, kind, "omega_s0") : s.omega_s;
        s.t_sw = pop_int(p, kind, "t_sw");
        s.quantile = pop(p, kind, "q");
        s.provider = provider;
        s.basic = basic;
        cfg.body = s;
    } else if (kind == "profusion") {
        ProFusionStrategy s;
        s.omega_c = pop(p, kind, "omega_c");
        s.omega_s = pop(p, kind, "omega_s");
        s.fusion_r = pop(p, kind, "r");
        cfg.body = s;
    } else {
        throw ConfigError("unknown strategy kind: " + kind);
    }

    if (!p.empty()) {
        throw ConfigError("parameter '" + p.begin()->first + "' not valid for " + kind);
    }
    return cfg;
}

int SweepGrid::point_count() const {
    int n = 1;
    for (const auto& [_, values] : axes) n *= static_cast<int>(values.size());
    return n;
}

namespace {

std::map<std::string, double> resolve_point(const SweepGrid& grid, int index) {
    std::map<std::string, double> params = grid.fixed;
    int rem = index;
    for (auto it = grid.axes.rbegin(); it != grid.axes.rend(); ++it) {
        const auto& values = it->second;
        params[it->first] = values[rem % values.size()];
        rem /= static_cast<int>(values.size());
    }
    for (const auto& rule : grid.derived) {
        auto src = params.find(rule.subtract);
        if (src == params.end()) {
            throw ConfigError("derived rule for '" + rule.target +
                              "' references undeclared parameter '" + rule.subtract + "'");
        }
        params[rule.target] = rule.total - src->second;
    }
    return params;
}

int thread_cap(int n_points) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("TRAJLAB_THREADS")) {
        const int requested = std::atoi(env);
        if (requested >= 1) cap = std::min(cap, requested);
    }
    return std::min(cap, n_points);
}

}  // namespace

std::vector<SweepRecord> run_sweep(const Scenario& scenario, const SweepGrid& grid) {
    for (const auto& [name, values] : grid.axes) {
        if (values.empty()) {
            throw ConfigError("sweep axis '" + name + "' has no values");
        }
    }
    const int n_points = grid.point_count();

    // Validate every point before executing any.
    std::vector<std::map<std::string, double>> point_params(n_points);
    std::vector<RunConfig> configs(n_points);
    for (int k = 0; k < n_points; ++k) {
        point_params[k] = resolve_point(grid, k);
        RunConfig rc;
        rc.schedule = grid.schedule;
        rc.n_samples = grid.n_samples;
        rc.seed = point_seed(grid.seed, k);
        try {
            rc.strategy = strategy_from_params(grid.strategy_kind, point_params[k],
                                               grid.provider, grid.basic,
                                               grid.superclass_source);
            rc.strategy.validate(grid.schedule.infer_count);
        } catch (const ConfigError& e) {
            throw ConfigError("sweep '" + grid.name + "' point " +
                              std::to_string(k) + ": " + e.what());
        }
        configs[k] = rc;
    }

    std::vector<SweepRecord> records(n_points);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&] {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n_points) return;
            try {
                const RunResult run = run_sampling(scenario, configs[k]);
                SweepRecord rec;
                rec.strategy_kind = grid.strategy_kind;
                rec.params = point_params[k];
                rec.superclass_source = grid.superclass_source;
                rec.n_samples = grid.n_samples;
                rec.steps = grid.schedule.infer_count;
                rec.seed = configs[k].seed;
                rec.metrics = proxy_scores(run.finals, scenario);
                rec.calls_per_sample = run.calls.total / grid.n_samples;
                rec.wall_ms = run.wall_ms;
                records[k] = std::move(rec);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const int n_threads = thread_cap(n_points);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

std::vector<std::string> preset_names() {
    return {"mixed-7", "switching-8", "multistage-3x3", "masked-4", "profusion-9"};
}

SweepGrid preset_grid(const std::string& name) {
    SweepGrid g;
    g.name = name;
    if (name == "mixed-7") {
        g.strategy_kind = "mixed";
        g.axes = {{"omega_s", {0.0, 0.875, 1.75, 2.625, 3.5, 4.375, 5.25, 6.125, 7.0}}};
        g.derived = {{"omega_c", 7.0, "omega_s"}};
    } else if (name == "switching-8") {
        g.strategy_kind = "switching";
        g.axes = {{"t_sw", {1, 3, 5, 7, 10, 20, 30, 40}}};
        g.fixed = {{"omega", 7.0}};
    } else if (name == "multistage-3x3") {
        g.strategy_kind = "multistage";
        g.axes = {{"t_sw", {3, 10, 20}}, {"omega_s", {1.0, 3.0, 5.0}}};
        g.derived = {{"omega_c", 7.0, "omega_s"}};
    } else if (name == "masked-4") {
        g.strategy_kind = "masked";
        g.axes = {{"q", {0.3, 0.5, 0.7, 0.9}}};
        g.fixed = {{"t_sw", 3}, {"omega_s", 3.5}, {"omega_c", 3.5}};
    } else if (name == "profusion-9") {
        g.strategy_kind = "profusion";
        g.axes = {{"r", {0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0}}};
        g.fixed = {{"omega_s", 3.5}, {"omega_c", 3.5}};
    } else {
        throw ConfigError("unknown sweep preset: " + name);
    }
    return g;
}

SweepGrid parse_grid(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": parse error: " + e.what());
    }
    auto known = [&](const json& obj, const std::vector<std::string>& required,
                     const std::vector<std::string>& optional,
                     const std::string& where) {
        for (const auto& k : required) {
            if (!obj.contains(k)) throw ConfigError(where + ": missing key '" + k + "'");
        }
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (std::find(required.begin(), required.end(), it.key()) == required.end() &&
                std::find(optional.begin(), optional.end(), it.key()) == optional.end()) {
                throw ConfigError(where + ": unknown key '" + it.key() + "'");
            }
        }
    };
    known(doc, {"name", "version", "strategy", "axes"},
          {"fixed", "derived", "options", "run"}, origin);

    SweepGrid g;
    g.name = doc.at("name").get<std::string>();
    g.version = doc.at("version").get<int>();
    g.strategy_kind = doc.at("strategy").get<std::string>();
    for (auto it = doc.at("axes").begin(); it != doc.at("axes").end(); ++it) {
        g.axes.emplace_back(it.key(), it.value().get<std::vector<double>>());
    }
    if (doc.contains("fixed")) {
        for (auto it = doc.at("fixed").begin(); it != doc.at("fixed").end(); ++it) {
            g.fixed[it.key()] = it.value().get<double>();
        }
    }
    if (doc.contains("derived")) {
        for (auto it = doc.at("derived").begin(); it != doc.at("derived").end(); ++it) {
            known(it.value(), {"total", "subtract"}, {}, origin + ": derived." + it.key());
            g.derived.push_back({it.key(), it.value().at("total").get<double>(),
                                 it.value().at("subtract").get<std::string>()});
        }
    }
    if (doc.contains("options")) {
        const json& opt = doc.at("options");
        known(opt, {},
              {"provider", "basic", "superclass_variant", "superclass_condition"},
              origin + ": options");
        if (opt.contains("provider")) {
            const auto p = opt.at("provider").get<std::string>();
            if (p == "divergence") g.provider = MaskProvider::Divergence;
            else if (p == "fixed_region") g.provider = MaskProvider::FixedRegion;
            else throw ConfigError(origin + ": unknown mask provider '" + p + "'");
        }
        if (opt.contains("basic")) g.basic = opt.at("basic").get<bool>();
        if (opt.contains("superclass_variant")) {
            g.superclass_source.first =
                variant_from_string(opt.at("superclass_variant").get<std::string>());
        }
        if (opt.contains("superclass_condition")) {
            g.superclass_source.second =
                condition_from_string(opt.at("superclass_condition").get<std::string>());
        }
    }
    if (doc.contains("run")) {
        const json& run = doc.at("run");
        known(run, {}, {"steps", "n_samples", "seed", "t_base", "beta_start", "beta_end"},
              origin + ": run");
        if (run.contains("steps")) g.schedule.infer_count = run.at("steps").get<int>();
        if (run.contains("t_base")) g.schedule.t_base = run.at("t_base").get<int>();
        if (run.contains("beta_start")) g.schedule.beta_start = run.at("beta_start").get<double>();
        if (run.contains("beta_end")) g.schedule.beta_end = run.at("beta_end").get<double>();
        if (run.contains("n_samples")) g.n_samples = run.at("n_samples").get<int>();
        if (run.contains("seed")) g.seed = run.at("seed").get<std::uint64_t>();
    }
    return g;
}

SweepGrid load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_grid(buf.str(), path);
}

}  // namespace trajlab
