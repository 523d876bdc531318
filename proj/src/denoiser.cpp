#include "trajlab/denoiser.hpp"

#include <cmath>
#include <limits>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

// Component log-densities of the forward marginal at z (unnormalized posterior).
std::vector<double> component_logs(const GaussianMixture& m, double alpha,
                                   double sigma, const std::vector<double>& z) {
    constexpr double log2pi = 1.8378770664093454835606594728112;
    const int d = m.dim();
    std::vector<double> logs(m.components(),
                             -std::numeric_limits<double>::infinity());
    for (int k = 0; k < m.components(); ++k) {
        if (m.weights[k] == 0.0) continue;
        double lp = std::log(m.weights[k]);
        for (int j = 0; j < d; ++j) {
            const double mu = alpha * m.means[k][j];
            const double var = alpha * alpha * m.variances[k][j] + sigma * sigma;
            const double diff = z[j] - mu;
            lp -= 0.5 * (log2pi + std::log(var) + diff * diff / var);
        }
        logs[k] = lp;
    }
    return logs;
}

std::vector<double> normalize_logs(const std::vector<double>& logs) {
    double best = -std::numeric_limits<double>::infinity();
    for (double lp : logs) best = std::max(best, lp);
    std::vector<double> resp(logs.size(), 0.0);
    double denom = 0.0;
    for (std::size_t k = 0; k < logs.size(); ++k) {
        resp[k] = std::exp(logs[k] - best);
        denom += resp[k];
    }
    for (double& r : resp) r /= denom;
    return resp;
}

}  // namespace

std::vector<double> analytic_eps(const Scenario& scenario,
                                 const NoiseSchedule& schedule,
                                 const std::vector<double>& z, int t,
                                 ModelVariant variant, Condition cond,
                                 CallCounter& counter) {
    const GaussianMixture& m = scenario.mixture(variant, cond);
    if (static_cast<int>(z.size()) != m.dim()) {
        throw ContractError("analytic_eps: latent dimension mismatch");
    }
    const double alpha = schedule.alpha(t);
    const double sigma = schedule.sigma(t);

    const auto logs = component_logs(m, alpha, sigma, z);
    const auto resp = normalize_logs(logs);

    // score = sum_k resp_k * (-(z - alpha mu_k) / var_k); eps_hat = -sigma * score
    std::vector<double> eps(z.size(), 0.0);
    for (int k = 0; k < m.components(); ++k) {
        if (resp[k] == 0.0) continue;
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double var = alpha * alpha * m.variances[k][j] + sigma * sigma;
            eps[j] += resp[k] * sigma * (z[j] - alpha * m.means[k][j]) / var;
        }
    }
    counter.record(variant, cond);
    return eps;
}

std::vector<double> fd_score_oracle(const Scenario& scenario,
                                    const NoiseSchedule& schedule,
                                    const std::vector<double>& z, int t,
                                    ModelVariant variant, Condition cond,
                                    double h) {
    if (!(h > 0.0)) throw ContractError("fd_score_oracle: h must be > 0");
    const GaussianMixture& m = scenario.mixture(variant, cond);
    const GaussianMixture pt =
        forward_marginal(m, schedule.alpha(t), schedule.sigma(t));

    std::vector<double> grad(z.size());
    std::vector<double> probe = z;
    for (std::size_t j = 0; j < z.size(); ++j) {
        probe[j] = z[j] + h;
        const double hi = log_density(pt, probe);
        probe[j] = z[j] - h;
        const double lo = log_density(pt, probe);
        probe[j] = z[j];
        grad[j] = (hi - lo) / (2.0 * h);
    }
    return grad;
}

std::vector<double> responsibility_map(const Scenario& scenario,
                                       const NoiseSchedule& schedule,
                                       const std::vector<double>& z, int t,
                                       ModelVariant variant, Condition cond) {
    const GaussianMixture& m = scenario.mixture(variant, cond);
    return normalize_logs(component_logs(m, schedule.alpha(t), schedule.sigma(t), z));
}

}  // namespace trajlab
