#include "trajlab/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

void check_same_shape(const std::vector<double>& a, const std::vector<double>& b,
                      const char* what) {
    if (a.size() != b.size()) {
        throw ContractError(std::string(what) + ": shape mismatch");
    }
}

}  // namespace

std::string StrategyConfig::kind() const {
    struct V {
        std::string operator()(const BaseStrategy&) const { return "base"; }
        std::string operator()(const SuperclassStrategy&) const { return "superclass"; }
        std::string operator()(const MixedStrategy&) const { return "mixed"; }
        std::string operator()(const SwitchingStrategy&) const { return "switching"; }
        std::string operator()(const MultiStageStrategy&) const { return "multistage"; }
        std::string operator()(const MaskedStrategy&) const { return "masked"; }
        std::string operator()(const ProFusionStrategy&) const { return "profusion"; }
    };
    return std::visit(V{}, body);
}

int StrategyConfig::calls_per_step() const {
    struct V {
        int operator()(const BaseStrategy&) const { return 2; }
        int operator()(const SuperclassStrategy&) const { return 2; }
        int operator()(const MixedStrategy&) const { return 3; }
        int operator()(const SwitchingStrategy&) const { return 2; }
        int operator()(const MultiStageStrategy&) const { return 3; }
        int operator()(const MaskedStrategy&) const { return 3; }
        int operator()(const ProFusionStrategy&) const { return 5; }
    };
    return std::visit(V{}, body);
}

void StrategyConfig::validate(int infer_count) const {
    auto check_scale = [](double w, const char* name) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError(std::string(name) + " must be a finite value >= 0");
        }
    };
    auto check_tsw = [infer_count](int t_sw) {
        if (t_sw < 0 || t_sw > infer_count) {
            throw ConfigError("t_sw must be in [0, " + std::to_string(infer_count) +
                              "], got " + std::to_string(t_sw));
        }
    };
    struct V {
        decltype(check_scale)& scale;
        decltype(check_tsw)& tsw;
        void operator()(const BaseStrategy& s) const { scale(s.omega, "omega"); }
        void operator()(const SuperclassStrategy& s) const { scale(s.omega, "omega"); }
        void operator()(const MixedStrategy& s) const {
            scale(s.omega_c, "omega_c");
            scale(s.omega_s, "omega_s");
        }
        void operator()(const SwitchingStrategy& s) const {
            scale(s.omega, "omega");
            tsw(s.t_sw);
        }
        void operator()(const MultiStageStrategy& s) const {
            scale(s.omega_c, "omega_c");
            scale(s.omega_s, "omega_s");
            tsw(s.t_sw);
        }
        void operator()(const MaskedStrategy& s) const {
            scale(s.omega_c, "omega_c");
            scale(s.omega_s, "omega_s");
            scale(s.omega_c0, "omega_c0");
            scale(s.omega_s0, "omega_s0");
            tsw(s.t_sw);
            if (!(s.quantile >= 0.0 && s.quantile <= 1.0)) {
                throw ConfigError("quantile q must be in [0, 1]");
            }
            if (s.basic && s.omega_c != s.omega_s) {
                throw ConfigError("basic masked sampling requires omega_c == omega_s");
            }
        }
        void operator()(const ProFusionStrategy& s) const {
            scale(s.omega_c, "omega_c");
            scale(s.omega_s, "omega_s");
            if (!(s.fusion_r >= 0.0 && s.fusion_r <= 1.0)) {
                throw ConfigError("fusion intensity r must be in [0, 1]");
            }
        }
    };
    std::visit(V{check_scale, check_tsw}, body);
}

std::vector<double> cfg_combine(const std::vector<double>& eps_u,
                                const std::vector<double>& eps_c, double omega) {
    check_same_shape(eps_u, eps_c, "cfg_combine");
    std::vector<double> out(eps_u.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = eps_u[j] + omega * (eps_c[j] - eps_u[j]);
    }
    return out;
}

std::vector<double> mixed_combine(const std::vector<double>& eps_u,
                                  const std::vector<double>& delta_c,
                                  const std::vector<double>& delta_s,
                                  double omega_c, double omega_s) {
    check_same_shape(eps_u, delta_c, "mixed_combine");
    check_same_shape(eps_u, delta_s, "mixed_combine");
    std::vector<double> out(eps_u.size());
    // Zero-scale terms are skipped so reductions to single-delta strategies
    // stay bit-exact.
    for (std::size_t j = 0; j < out.size(); ++j) {
        double v = eps_u[j];
        if (omega_s != 0.0) v += omega_s * delta_s[j];
        if (omega_c != 0.0) v += omega_c * delta_c[j];
        out[j] = v;
    }
    return out;
}

std::vector<double> switching_combine(const std::vector<double>& eps_u,
                                      const std::vector<double>& delta_c,
                                      const std::vector<double>& delta_s,
                                      double omega, int i, int infer_count,
                                      int t_sw) {
    if (i < 1 || i > infer_count) {
        throw ContractError("switching_combine: inference index out of range");
    }
    const auto& delta = (i > infer_count - t_sw) ? delta_s : delta_c;
    check_same_shape(eps_u, delta, "switching_combine");
    std::vector<double> out(eps_u.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = eps_u[j] + omega * delta[j];
    }
    return out;
}

std::vector<double> multistage_combine(const std::vector<double>& eps_u,
                                       const std::vector<double>& delta_c,
                                       const std::vector<double>& delta_s,
                                       double omega_c, double omega_s, int i,
                                       int infer_count, int t_sw) {
    if (i < 1 || i > infer_count) {
        throw ContractError("multistage_combine: inference index out of range");
    }
    if (i > infer_count - t_sw) {
        check_same_shape(eps_u, delta_s, "multistage_combine");
        const double w = omega_s + omega_c;
        std::vector<double> out(eps_u.size());
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] = eps_u[j] + w * delta_s[j];
        }
        return out;
    }
    return mixed_combine(eps_u, delta_c, delta_s, omega_c, omega_s);
}

std::vector<double> soft_mask_divergence(const std::vector<double>& delta_c,
                                         const std::vector<double>& delta_s) {
    check_same_shape(delta_c, delta_s, "soft_mask_divergence");
    std::vector<double> soft(delta_c.size());
    double max_abs = 0.0;
    for (std::size_t j = 0; j < soft.size(); ++j) {
        soft[j] = std::abs(delta_c[j] - delta_s[j]);
        max_abs = std::max(max_abs, soft[j]);
    }
    if (max_abs > 0.0) {
        for (double& v : soft) v /= max_abs;
    }
    return soft;
}

std::vector<double> fixed_region_mask(const Scenario& scenario) {
    if (!scenario.concept_region) {
        throw ConfigError("scenario '" + scenario.name +
                          "' has no concept_region for the fixed-region mask provider");
    }
    return *scenario.concept_region;
}

Mask binarize_mask(const std::vector<double>& soft, double quantile) {
    if (!(quantile >= 0.0 && quantile <= 1.0)) {
        throw ContractError("binarize_mask: quantile must be in [0, 1]");
    }
    if (soft.empty()) throw ContractError("binarize_mask: empty map");
    std::vector<double> sorted = soft;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    const auto idx = static_cast<std::size_t>(
        std::floor(quantile * static_cast<double>(n - 1)));
    const double threshold = sorted[idx];

    Mask mask;
    mask.soft = soft;
    mask.quantile = quantile;
    mask.binary.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        mask.binary[j] = (soft[j] >= threshold) ? 1.0 : 0.0;
    }
    return mask;
}

std::vector<double> masked_combine(const std::vector<double>& eps_u,
                                   const std::vector<double>& delta_c,
                                   const std::vector<double>& delta_s,
                                   double omega_c, double omega_s,
                                   const Mask& mask, bool basic) {
    check_same_shape(eps_u, delta_c, "masked_combine");
    check_same_shape(eps_u, delta_s, "masked_combine");
    check_same_shape(eps_u, mask.binary, "masked_combine");
    if (basic && omega_c != omega_s) {
        throw ConfigError("masked_combine: basic rule requires omega_c == omega_s");
    }
    // Binary mask partitions elements, so each element gets exactly one
    // formula; inside-mask arithmetic matches mixed_combine bit-for-bit.
    std::vector<double> out(eps_u.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const bool inside = mask.binary[j] != 0.0;
        if (basic) {
            out[j] = eps_u[j] + omega_c * (inside ? delta_c[j] : delta_s[j]);
        } else if (inside) {
            double v = eps_u[j];
            if (omega_s != 0.0) v += omega_s * delta_s[j];
            if (omega_c != 0.0) v += omega_c * delta_c[j];
            out[j] = v;
        } else {
            out[j] = eps_u[j] + (omega_c + omega_s) * delta_s[j];
        }
    }
    return out;
}

std::vector<double> profusion_step(const Scenario& scenario,
                                   const NoiseSchedule& schedule, int i,
                                   const std::vector<double>& z,
                                   const MixtureKey& superclass_source,
                                   double omega_c, double omega_s,
                                   double fusion_r, const NoiseSource& noise,
                                   CallCounter& counter) {
    const int t = schedule.tau(i);

    // Stage 1: backward step with concept guidance at the combined scale.
    const auto eps_u1 = analytic_eps(scenario, schedule, z, t,
                                     ModelVariant::Tuned, Condition::Null, counter);
    const auto eps_c1 = analytic_eps(scenario, schedule, z, t,
                                     ModelVariant::Tuned, Condition::Concept, counter);
    const auto z_prev_tilde =
        ddim_step(schedule, i, z, cfg_combine(eps_u1, eps_c1, omega_c + omega_s));

    // Stage 2: partial forward re-noising; r = 0 leaves z untouched bit-exact.
    std::vector<double> z_tilde;
    if (fusion_r == 0.0) {
        z_tilde = z;
    } else {
        std::vector<double> fresh(z.size());
        for (double& v : fresh) v = noise();
        const auto renoised = forward_noise(schedule, i, z_prev_tilde, fresh);
        z_tilde.resize(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) {
            z_tilde[j] = (1.0 - fusion_r) * z[j] + fusion_r * renoised[j];
        }
    }

    // Stage 3: mixed backward step from the fused latent.
    const auto eps_u = analytic_eps(scenario, schedule, z_tilde, t,
                                    ModelVariant::Tuned, Condition::Null, counter);
    const auto eps_c = analytic_eps(scenario, schedule, z_tilde, t,
                                    ModelVariant::Tuned, Condition::Concept, counter);
    const auto eps_s = analytic_eps(scenario, schedule, z_tilde, t,
                                    superclass_source.first,
                                    superclass_source.second, counter);
    std::vector<double> delta_c(z.size());
    std::vector<double> delta_s(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        delta_c[j] = eps_c[j] - eps_u[j];
        delta_s[j] = eps_s[j] - eps_u[j];
    }
    return ddim_step(schedule, i, z_tilde,
                     mixed_combine(eps_u, delta_c, delta_s, omega_c, omega_s));
}

}  // namespace trajlab
