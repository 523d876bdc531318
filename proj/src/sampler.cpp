#include "trajlab/sampler.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "trajlab/errors.hpp"
#include "trajlab/rng.hpp"

namespace trajlab {

namespace {

void check_finite(const std::vector<double>& z, int step) {
    for (double v : z) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("non-finite latent at inference step " +
                                     std::to_string(step));
        }
    }
}

struct StepContext {
    const Scenario& scenario;
    const NoiseSchedule& schedule;
    const MixtureKey& superclass_source;
    CallCounter& counter;

    std::vector<double> eps(const std::vector<double>& z, int t,
                            const MixtureKey& key) const {
        return analytic_eps(scenario, schedule, z, t, key.first, key.second,
                            counter);
    }
};

// One combined noise prediction for the non-ProFusion strategies.
std::vector<double> predict_step(const StepContext& ctx,
                                 const StrategyConfig& strategy,
                                 const std::vector<double>& z, int i) {
    const int t = ctx.schedule.tau(i);
    const int s_count = ctx.schedule.infer_count();
    const MixtureKey null_key{ModelVariant::Tuned, Condition::Null};
    const MixtureKey concept_key{ModelVariant::Tuned, Condition::Concept};

    if (const auto* b = std::get_if<BaseStrategy>(&strategy.body)) {
        const auto eps_u = ctx.eps(z, t, null_key);
        const auto eps_c = ctx.eps(z, t, concept_key);
        return cfg_combine(eps_u, eps_c, b->omega);
    }
    if (const auto* s = std::get_if<SuperclassStrategy>(&strategy.body)) {
        const auto eps_u = ctx.eps(z, t, null_key);
        const auto eps_s = ctx.eps(z, t, strategy.superclass_source);
        return cfg_combine(eps_u, eps_s, s->omega);
    }

    const auto eps_u = ctx.eps(z, t, null_key);
    auto delta_from = [&](const MixtureKey& key) {
        auto d = ctx.eps(z, t, key);
        for (std::size_t j = 0; j < d.size(); ++j) d[j] -= eps_u[j];
        return d;
    };

    if (const auto* sw = std::get_if<SwitchingStrategy>(&strategy.body)) {
        // Only the active branch's trajectory is evaluated: cost stays at two
        // calls per step.
        const bool super = i > s_count - sw->t_sw;
        const auto delta =
            delta_from(super ? strategy.superclass_source : concept_key);
        return switching_combine(eps_u, super ? std::vector<double>{} : delta,
                                 super ? delta : std::vector<double>{}, sw->omega,
                                 i, s_count, sw->t_sw);
    }

    const auto delta_c = delta_from(concept_key);
    const auto delta_s = delta_from(strategy.superclass_source);

    if (const auto* m = std::get_if<MixedStrategy>(&strategy.body)) {
        return mixed_combine(eps_u, delta_c, delta_s, m->omega_c, m->omega_s);
    }
    if (const auto* ms = std::get_if<MultiStageStrategy>(&strategy.body)) {
        return multistage_combine(eps_u, delta_c, delta_s, ms->omega_c,
                                  ms->omega_s, i, s_count, ms->t_sw);
    }
    const auto& mk = std::get<MaskedStrategy>(strategy.body);
    if (i > s_count - mk.t_sw) {
        return mixed_combine(eps_u, delta_c, delta_s, mk.omega_c0, mk.omega_s0);
    }
    const auto soft = (mk.provider == MaskProvider::Divergence)
                          ? soft_mask_divergence(delta_c, delta_s)
                          : fixed_region_mask(ctx.scenario);
    const Mask mask = binarize_mask(soft, mk.quantile);
    return masked_combine(eps_u, delta_c, delta_s, mk.omega_c, mk.omega_s, mask,
                          mk.basic);
}

}  // namespace

RunResult run_sampling(const Scenario& scenario, const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.n_samples < 1) throw ConfigError("n_samples must be >= 1");
    const NoiseSchedule schedule =
        NoiseSchedule::build(cfg.schedule.t_base, cfg.schedule.beta_start,
                             cfg.schedule.beta_end, cfg.schedule.infer_count);
    const int s_count = schedule.infer_count();
    cfg.strategy.validate(s_count);

    // Surface missing-mixture problems before any sampling.
    scenario.mixture(ModelVariant::Tuned, Condition::Null);
    scenario.mixture(ModelVariant::Tuned, Condition::Concept);
    scenario.mixture(cfg.strategy.superclass_source.first,
                     cfg.strategy.superclass_source.second);
    if (const auto* mk = std::get_if<MaskedStrategy>(&cfg.strategy.body)) {
        if (mk->provider == MaskProvider::FixedRegion && !scenario.concept_region) {
            throw ConfigError("fixed-region mask provider requires a scenario with concept_region");
        }
    }

    const int dim = scenario.shape.size();
    RunResult result;
    result.seed = cfg.seed;
    result.finals.resize(cfg.n_samples);
    if (cfg.record_trajectory) result.trajectories.resize(cfg.n_samples);

    for (int sample = 0; sample < cfg.n_samples; ++sample) {
        Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(sample));
        std::vector<double> z(dim);
        for (double& v : z) v = rng.gaussian();

        if (cfg.record_trajectory) result.trajectories[sample].push_back(z);

        StepContext ctx{scenario, schedule, cfg.strategy.superclass_source,
                        result.calls};
        for (int i = s_count; i >= 1; --i) {
            if (const auto* pf = std::get_if<ProFusionStrategy>(&cfg.strategy.body)) {
                z = profusion_step(
                    scenario, schedule, i, z, cfg.strategy.superclass_source,
                    pf->omega_c, pf->omega_s, pf->fusion_r,
                    [&rng] { return rng.gaussian(); }, result.calls);
            } else {
                const auto eps_hat = predict_step(ctx, cfg.strategy, z, i);
                z = ddim_step(schedule, i, z, eps_hat);
            }
            check_finite(z, i);
            if (cfg.record_trajectory) result.trajectories[sample].push_back(z);
        }
        result.finals[sample] = std::move(z);
    }

    result.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return result;
}

}  // namespace trajlab
