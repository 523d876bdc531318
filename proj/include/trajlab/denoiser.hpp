#pragma once

#include <map>
#include <vector>

#include "trajlab/scenario.hpp"
#include "trajlab/schedule.hpp"

namespace trajlab {

// Per-run accounting of noise-prediction evaluations.
struct CallCounter {
    std::map<MixtureKey, long long> counts;
    long long total = 0;

    void record(ModelVariant v, Condition c) {
        ++counts[{v, c}];
        ++total;
    }
    void merge(const CallCounter& other) {
        for (const auto& [k, n] : other.counts) counts[k] += n;
        total += other.total;
    }
};

// Closed-form noise prediction under the forward-marginal mixture:
// eps_hat = -sigma_t * grad_z log p_t(z).
std::vector<double> analytic_eps(const Scenario& scenario,
                                 const NoiseSchedule& schedule,
                                 const std::vector<double>& z, int t,
                                 ModelVariant variant, Condition cond,
                                 CallCounter& counter);

// Central-difference gradient of log p_t; verification oracle for analytic_eps.
std::vector<double> fd_score_oracle(const Scenario& scenario,
                                    const NoiseSchedule& schedule,
                                    const std::vector<double>& z, int t,
                                    ModelVariant variant, Condition cond,
                                    double h);

// Posterior component responsibilities under p_t at z.
std::vector<double> responsibility_map(const Scenario& scenario,
                                       const NoiseSchedule& schedule,
                                       const std::vector<double>& z, int t,
                                       ModelVariant variant, Condition cond);

}  // namespace trajlab
