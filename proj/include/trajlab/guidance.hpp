#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "trajlab/denoiser.hpp"
#include "trajlab/scenario.hpp"
#include "trajlab/schedule.hpp"

namespace trajlab {

enum class MaskProvider { Divergence, FixedRegion };

// The seven per-step combination rules. Scales are guidance scales; t_sw is
// counted in inference steps from the noisy end of the trajectory.
struct BaseStrategy { double omega = 7.0; };
struct SuperclassStrategy { double omega = 7.0; };
struct MixedStrategy { double omega_c = 3.5, omega_s = 3.5; };
struct SwitchingStrategy { double omega = 7.0; int t_sw = 10; };
struct MultiStageStrategy { double omega_c = 3.5, omega_s = 3.5; int t_sw = 10; };
struct MaskedStrategy {
    double omega_c = 3.5, omega_s = 3.5;
    double omega_c0 = 3.5, omega_s0 = 3.5;  // warmup (pre-mask) scales
    int t_sw = 3;
    double quantile = 0.5;
    MaskProvider provider = MaskProvider::Divergence;
    bool basic = false;  // true: single-scale rule; false: full mixed-in-mask rule
};
struct ProFusionStrategy { double omega_c = 3.5, omega_s = 3.5; double fusion_r = 0.1; };

struct StrategyConfig {
    std::variant<BaseStrategy, SuperclassStrategy, MixedStrategy,
                 SwitchingStrategy, MultiStageStrategy, MaskedStrategy,
                 ProFusionStrategy>
        body;
    // Which trajectory supplies the superclass noise prediction. The
    // unconditional trajectory is always (Tuned, Null).
    MixtureKey superclass_source{ModelVariant::Tuned, Condition::Superclass};

    std::string kind() const;
    // Denoiser evaluations per inference step.
    int calls_per_step() const;
    void validate(int infer_count) const;
};

struct Mask {
    std::vector<double> soft;    // in [0, 1]
    std::vector<double> binary;  // 0/1
    double quantile = 0.0;
};

std::vector<double> cfg_combine(const std::vector<double>& eps_u,
                                const std::vector<double>& eps_c, double omega);

std::vector<double> mixed_combine(const std::vector<double>& eps_u,
                                  const std::vector<double>& delta_c,
                                  const std::vector<double>& delta_s,
                                  double omega_c, double omega_s);

std::vector<double> switching_combine(const std::vector<double>& eps_u,
                                      const std::vector<double>& delta_c,
                                      const std::vector<double>& delta_s,
                                      double omega, int i, int infer_count,
                                      int t_sw);

std::vector<double> multistage_combine(const std::vector<double>& eps_u,
                                       const std::vector<double>& delta_c,
                                       const std::vector<double>& delta_s,
                                       double omega_c, double omega_s, int i,
                                       int infer_count, int t_sw);

// |delta_c - delta_s| scaled into [0, 1] by its maximum.
std::vector<double> soft_mask_divergence(const std::vector<double>& delta_c,
                                         const std::vector<double>& delta_s);

std::vector<double> fixed_region_mask(const Scenario& scenario);

// Threshold at the order statistic floor(q * (n - 1)); binary = soft >= threshold.
Mask binarize_mask(const std::vector<double>& soft, double quantile);

std::vector<double> masked_combine(const std::vector<double>& eps_u,
                                   const std::vector<double>& delta_c,
                                   const std::vector<double>& delta_s,
                                   double omega_c, double omega_s,
                                   const Mask& mask, bool basic);

// One full ProFusion inference step: concept backward step, partial forward
// re-noising with intensity r, then a mixed backward step. The noise source
// supplies the fresh standard-normal draws, one value per call.
using NoiseSource = std::function<double()>;

std::vector<double> profusion_step(const Scenario& scenario,
                                   const NoiseSchedule& schedule, int i,
                                   const std::vector<double>& z,
                                   const MixtureKey& superclass_source,
                                   double omega_c, double omega_s,
                                   double fusion_r, const NoiseSource& noise,
                                   CallCounter& counter);

}  // namespace trajlab
