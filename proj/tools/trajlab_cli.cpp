#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trajlab/errors.hpp"
#include "trajlab/metrics.hpp"
#include "trajlab/report.hpp"
#include "trajlab/sampler.hpp"
#include "trajlab/scenario.hpp"
#include "trajlab/sweep.hpp"

namespace {

using namespace trajlab;

struct SampleArgs {
    std::string scenario_path;
    std::string strategy;
    std::string out_path;
    int steps = 50;
    int n = 16;
    std::uint64_t seed = 1234;
    std::string superclass_variant = "tuned";
    std::string superclass_condition = "superclass";
    std::string provider = "divergence";
    bool basic = false;
    std::map<std::string, double> params;  // only flags the user actually set
};

void write_finals(const RunResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    if (result.finals.empty()) return;
    out << "sample";
    for (std::size_t j = 0; j < result.finals[0].size(); ++j) out << ",z" << j;
    out << '\n';
    char buf[48];
    for (std::size_t i = 0; i < result.finals.size(); ++i) {
        out << i;
        for (double v : result.finals[i]) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

int run_sample(const SampleArgs& args) {
    const Scenario scenario = load_scenario(args.scenario_path);

    MaskProvider provider = MaskProvider::Divergence;
    if (args.provider == "fixed-region" || args.provider == "fixed_region") {
        provider = MaskProvider::FixedRegion;
    } else if (args.provider != "divergence") {
        throw ConfigError("unknown mask provider: " + args.provider);
    }
    const MixtureKey source{variant_from_string(args.superclass_variant),
                            condition_from_string(args.superclass_condition)};

    RunConfig cfg;
    cfg.schedule.infer_count = args.steps;
    cfg.n_samples = args.n;
    cfg.seed = args.seed;
    cfg.strategy =
        strategy_from_params(args.strategy, args.params, provider, args.basic, source);
    cfg.strategy.validate(args.steps);

    const RunResult result = run_sampling(scenario, cfg);
    write_finals(result, args.out_path);

    const MetricRecord metrics = proxy_scores(result.finals, scenario);
    std::cout << "strategy=" << args.strategy << " n=" << args.n
              << " steps=" << args.steps << " seed=" << args.seed << '\n'
              << "fidelity_mean=" << format_number(metrics.fidelity_mean)
              << " fidelity_std=" << format_number(metrics.fidelity_std) << '\n'
              << "context_mean=" << format_number(metrics.context_mean)
              << " context_std=" << format_number(metrics.context_std) << '\n'
              << "calls_per_sample=" << result.calls.total / args.n
              << " wall_ms=" << format_number(result.wall_ms) << '\n';
    return 0;
}

int run_sweep_cmd(const std::string& grid_path, const std::string& preset,
                  const std::string& scenario_path, const std::string& out_path,
                  int n_override, long long seed_override, int steps_override) {
    const Scenario scenario = load_scenario(scenario_path);
    SweepGrid grid = preset.empty() ? load_grid(grid_path) : preset_grid(preset);
    if (n_override > 0) grid.n_samples = n_override;
    if (seed_override >= 0) grid.seed = static_cast<std::uint64_t>(seed_override);
    if (steps_override > 0) grid.schedule.infer_count = steps_override;

    const auto records = run_sweep(scenario, grid);
    write_records_csv(records, out_path);
    std::cout << "wrote " << records.size() << " records to " << out_path << '\n';
    return 0;
}

int run_pareto(const std::string& in_path, const std::string& x_col,
               const std::string& y_col, const std::string& out_path) {
    const CsvTable table = read_csv(in_path);
    const int xc = table.column_index(x_col);
    const int yc = table.column_index(y_col);
    if (xc < 0) throw ConfigError("missing column: " + x_col);
    if (yc < 0) throw ConfigError("missing column: " + y_col);

    std::vector<ParetoPoint> points(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        points[r].x = table.numeric(static_cast<int>(r), xc);
        points[r].y = table.numeric(static_cast<int>(r), yc);
        points[r].tags["row"] = std::to_string(r);
    }
    const auto front = pareto_front(points);

    CsvTable out;
    out.columns = table.columns;
    for (const auto& p : front) {
        out.rows.push_back(table.rows[std::stoul(p.tags.at("row"))]);
    }
    write_csv(out, out_path);
    std::cout << "front: " << front.size() << " of " << points.size()
              << " points\n";
    return 0;
}

int run_plot(const std::string& in_path, const std::string& front_path,
             const std::string& x_col, const std::string& y_col,
             const std::string& out_path) {
    const CsvTable records = read_csv(in_path);
    if (records.rows.empty()) throw ConfigError(in_path + " has no data rows");
    CsvTable front;
    const bool have_front = !front_path.empty();
    if (have_front) front = read_csv(front_path);

    PlotOptions options;
    options.x_column = x_col;
    options.y_column = y_col;
    const std::string svg =
        render_scatter_svg(records, have_front ? &front : nullptr, options);
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open output file: " + out_path);
    out << svg;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trajectory-combination sampling lab"};
    app.require_subcommand(1);

    SampleArgs sa;
    double omega = 0, omega_c = 0, omega_s = 0, quantile = 0, fusion_r = 0;
    double omega_c0 = 0, omega_s0 = 0;
    int t_sw = 0;

    auto* sample = app.add_subcommand("sample", "Run one sampling configuration");
    sample->add_option("--scenario", sa.scenario_path, "Scenario file")->required();
    sample->add_option("--strategy", sa.strategy,
                       "base|superclass|mixed|switching|multistage|masked|profusion")
        ->required();
    sample->add_option("--steps", sa.steps, "Inference steps");
    sample->add_option("--n", sa.n, "Sample count");
    sample->add_option("--seed", sa.seed, "Master RNG seed");
    sample->add_option("--out", sa.out_path, "Finals output CSV")->required();
    auto* o = sample->add_option("--omega", omega, "Guidance scale");
    auto* oc = sample->add_option("--omega-c", omega_c, "Concept guidance scale");
    auto* os = sample->add_option("--omega-s", omega_s, "Superclass guidance scale");
    auto* oc0 = sample->add_option("--omega-c0", omega_c0, "Warmup concept scale");
    auto* os0 = sample->add_option("--omega-s0", omega_s0, "Warmup superclass scale");
    auto* ot = sample->add_option("--t-sw", t_sw, "Switching step");
    auto* oq = sample->add_option("--q", quantile, "Mask binarization quantile");
    auto* orr = sample->add_option("--r", fusion_r, "Fusion step intensity");
    sample->add_option("--provider", sa.provider, "Mask provider: divergence|fixed-region");
    sample->add_flag("--basic", sa.basic, "Use the single-scale masked rule");
    sample->add_option("--superclass-variant", sa.superclass_variant, "tuned|orig");
    sample->add_option("--superclass-condition", sa.superclass_condition,
                       "superclass|context_only|null|concept");

    std::string grid_path, preset, scenario_path, out_path;
    int sweep_n = 0, sweep_steps = 0;
    long long sweep_seed = -1;
    auto* sweep = app.add_subcommand("sweep", "Run a hyperparameter grid sweep");
    auto* grid_opt = sweep->add_option("--grid", grid_path, "Sweep grid file");
    auto* preset_opt = sweep->add_option("--preset", preset, "Preset grid name");
    grid_opt->excludes(preset_opt);
    sweep->add_option("--scenario", scenario_path, "Scenario file")->required();
    sweep->add_option("--out", out_path, "Records CSV output")->required();
    sweep->add_option("--n", sweep_n, "Override samples per point");
    sweep->add_option("--seed", sweep_seed, "Override master seed");
    sweep->add_option("--steps", sweep_steps, "Override inference steps");

    std::string in_path, x_col = "context_mean", y_col = "fidelity_mean";
    auto* pareto = app.add_subcommand("pareto", "Extract the Pareto front of a records CSV");
    pareto->add_option("--in", in_path, "Records CSV")->required();
    pareto->add_option("--x", x_col, "X column (maximized)");
    pareto->add_option("--y", y_col, "Y column (maximized)");
    pareto->add_option("--out", out_path, "Front CSV output")->required();

    std::string front_path;
    auto* plot = app.add_subcommand("plot", "Render an SVG scatter of metric space");
    plot->add_option("--in", in_path, "Records CSV")->required();
    plot->add_option("--front", front_path, "Optional front CSV for the polyline");
    plot->add_option("--x", x_col, "X column");
    plot->add_option("--y", y_col, "Y column");
    plot->add_option("--out", out_path, "SVG output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sample->parsed()) {
            if (*o) sa.params["omega"] = omega;
            if (*oc) sa.params["omega_c"] = omega_c;
            if (*os) sa.params["omega_s"] = omega_s;
            if (*oc0) sa.params["omega_c0"] = omega_c0;
            if (*os0) sa.params["omega_s0"] = omega_s0;
            if (*ot) sa.params["t_sw"] = t_sw;
            if (*oq) sa.params["q"] = quantile;
            if (*orr) sa.params["r"] = fusion_r;
            return run_sample(sa);
        }
        if (sweep->parsed()) {
            if (grid_path.empty() && preset.empty()) {
                throw ConfigError("sweep requires --grid or --preset");
            }
            return run_sweep_cmd(grid_path, preset, scenario_path, out_path,
                                 sweep_n, sweep_seed, sweep_steps);
        }
        if (pareto->parsed()) return run_pareto(in_path, x_col, y_col, out_path);
        if (plot->parsed()) return run_plot(in_path, front_path, x_col, y_col, out_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
