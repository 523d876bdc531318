#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajlab/metrics.hpp"
#include "trajlab/sampler.hpp"

namespace trajlab {

// Derived parameter rule: target = total - subtract_param.
struct DerivedRule {
    std::string target;
    double total = 0.0;
    std::string subtract;
};

struct SweepGrid {
    std::string name;
    int version = 1;
    std::string strategy_kind;
    // Axis order defines the (row-major) grid enumeration order.
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    std::map<std::string, double> fixed;
    std::vector<DerivedRule> derived;
    MaskProvider provider = MaskProvider::Divergence;
    bool basic = false;
    MixtureKey superclass_source{ModelVariant::Tuned, Condition::Superclass};
    ScheduleParams schedule;
    int n_samples = 256;
    std::uint64_t seed = 1234;

    int point_count() const;
};

struct SweepRecord {
    std::string strategy_kind;
    std::map<std::string, double> params;  // resolved hyperparameters
    MixtureKey superclass_source;
    int n_samples = 0;
    int steps = 0;
    std::uint64_t seed = 0;
    MetricRecord metrics;
    long long calls_per_sample = 0;
    double wall_ms = 0.0;
};

// Build a StrategyConfig from a resolved parameter map; unknown or missing
// parameters raise ConfigError naming the offender.
StrategyConfig strategy_from_params(const std::string& kind,
                                    const std::map<std::string, double>& params,
                                    MaskProvider provider, bool basic,
                                    const MixtureKey& superclass_source);

// Every grid point validated before any execution; records come back in
// deterministic enumeration order regardless of parallelism. Thread count is
// capped by the TRAJLAB_THREADS environment variable.
std::vector<SweepRecord> run_sweep(const Scenario& scenario, const SweepGrid& grid);

// The published evaluation grids: mixed-7, switching-8, multistage-3x3,
// masked-4, profusion-9.
std::vector<std::string> preset_names();
SweepGrid preset_grid(const std::string& name);

SweepGrid load_grid(const std::string& path);
SweepGrid parse_grid(const std::string& json_text, const std::string& origin);

}  // namespace trajlab
