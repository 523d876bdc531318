#include "trajlab/schedule.hpp"

#include <cmath>
#include <string>

#include "trajlab/errors.hpp"

namespace trajlab {

NoiseSchedule NoiseSchedule::build(int t_base, double beta_start,
                                   double beta_end, int infer_count) {
    if (t_base < 1) {
        throw ConfigError("t_base must be >= 1, got " + std::to_string(t_base));
    }
    if (infer_count < 1 || infer_count > t_base) {
        throw ConfigError("infer_count must satisfy 1 <= S <= t_base, got S=" +
                          std::to_string(infer_count) +
                          " with t_base=" + std::to_string(t_base));
    }
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
        throw ConfigError("beta range must satisfy 0 < beta_start <= beta_end < 1, got [" +
                          std::to_string(beta_start) + ", " +
                          std::to_string(beta_end) + "]");
    }

    NoiseSchedule s;
    s.alpha_bar_.resize(t_base);
    double prod = 1.0;
    for (int t = 0; t < t_base; ++t) {
        const double frac = (t_base > 1) ? static_cast<double>(t) / (t_base - 1) : 0.0;
        const double beta = beta_start + (beta_end - beta_start) * frac;
        prod *= 1.0 - beta;
        s.alpha_bar_[t] = prod;
    }

    // S uniformly strided indices ending at t_base - 1.
    s.infer_steps_.resize(infer_count);
    for (int k = 1; k <= infer_count; ++k) {
        s.infer_steps_[k - 1] =
            static_cast<int>(static_cast<long long>(k) * t_base / infer_count) - 1;
    }
    return s;
}

double NoiseSchedule::alpha(int t) const { return std::sqrt(alpha_bar_[t]); }

double NoiseSchedule::sigma(int t) const { return std::sqrt(1.0 - alpha_bar_[t]); }

int NoiseSchedule::tau(int i) const {
    if (i < 0 || i > infer_count()) {
        throw ContractError("inference index out of range: " + std::to_string(i));
    }
    return (i == 0) ? -1 : infer_steps_[i - 1];
}

double NoiseSchedule::alpha_at(int i) const {
    const int t = tau(i);
    return (t < 0) ? 1.0 : alpha(t);
}

double NoiseSchedule::sigma_at(int i) const {
    const int t = tau(i);
    return (t < 0) ? 0.0 : sigma(t);
}

std::vector<double> ddim_step(const NoiseSchedule& schedule, int i,
                              const std::vector<double>& z,
                              const std::vector<double>& eps_hat) {
    if (i < 1 || i > schedule.infer_count()) {
        throw ContractError("ddim_step: inference index out of range: " +
                            std::to_string(i));
    }
    if (z.size() != eps_hat.size()) {
        throw ContractError("ddim_step: eps_hat shape does not match latent");
    }
    const double a = schedule.alpha_at(i);
    const double s = schedule.sigma_at(i);
    const double a_prev = schedule.alpha_at(i - 1);
    const double s_prev = schedule.sigma_at(i - 1);

    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double x0_hat = (z[j] - s * eps_hat[j]) / a;
        out[j] = a_prev * x0_hat + s_prev * eps_hat[j];
    }
    return out;
}

std::vector<double> forward_noise(const NoiseSchedule& schedule, int i,
                                  const std::vector<double>& z_prev,
                                  const std::vector<double>& eps) {
    if (i < 1 || i > schedule.infer_count()) {
        throw ContractError("forward_noise: inference index out of range: " +
                            std::to_string(i));
    }
    if (z_prev.size() != eps.size()) {
        throw ContractError("forward_noise: eps shape does not match latent");
    }
    const double a = schedule.alpha_at(i);
    const double s = schedule.sigma_at(i);
    const double a_prev = schedule.alpha_at(i - 1);
    const double s_prev = schedule.sigma_at(i - 1);

    const double ratio = a / a_prev;
    const double radicand = s * s - ratio * ratio * s_prev * s_prev;
    if (radicand < 0.0) {
        throw std::logic_error("forward_noise: negative noise radicand (schedule invariant broken)");
    }
    const double scale = std::sqrt(radicand);

    std::vector<double> out(z_prev.size());
    for (std::size_t j = 0; j < z_prev.size(); ++j) {
        out[j] = ratio * z_prev[j] + scale * eps[j];
    }
    return out;
}

}  // namespace trajlab
