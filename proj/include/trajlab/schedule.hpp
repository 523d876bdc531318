#pragma once

#include <cstddef>
#include <vector>

namespace trajlab {

// Variance-preserving schedule: alpha_bar[t] = prod_{i<=t}(1 - beta_i) with
// alpha_t = sqrt(alpha_bar[t]), sigma_t = sqrt(1 - alpha_bar[t]), so
// alpha_t^2 + sigma_t^2 == 1 by construction.
//
// Time indexing: the inference loop runs i = S..1. Inference index i (1-based)
// maps to base timestep tau_i = infer_steps[i-1]. Index i = 0 is the clean
// endpoint with alpha = 1, sigma = 0.
class NoiseSchedule {
public:
    static NoiseSchedule build(int t_base, double beta_start, double beta_end,
                               int infer_count);

    int base_len() const { return static_cast<int>(alpha_bar_.size()); }
    int infer_count() const { return static_cast<int>(infer_steps_.size()); }
    const std::vector<double>& alpha_bar() const { return alpha_bar_; }
    const std::vector<int>& infer_steps() const { return infer_steps_; }

    // Base-timestep coefficients.
    double alpha(int t) const;
    double sigma(int t) const;

    // Inference-index coefficients; i in [0, S], i = 0 is the clean endpoint.
    int tau(int i) const;
    double alpha_at(int i) const;
    double sigma_at(int i) const;

private:
    std::vector<double> alpha_bar_;
    std::vector<int> infer_steps_;
};

// Deterministic (eta = 0) DDIM backward move from tau_i to tau_{i-1}.
// x0_hat = (z - sigma_i * eps_hat) / alpha_i; out = alpha_{i-1} * x0_hat +
// sigma_{i-1} * eps_hat. No x0 clipping.
std::vector<double> ddim_step(const NoiseSchedule& schedule, int i,
                              const std::vector<double>& z,
                              const std::vector<double>& eps_hat);

// Stochastic forward re-noising from tau_{i-1} back up to tau_i, preserving
// the marginal z_t = alpha_t z_0 + sigma_t eps.
std::vector<double> forward_noise(const NoiseSchedule& schedule, int i,
                                  const std::vector<double>& z_prev,
                                  const std::vector<double>& eps);

}  // namespace trajlab
