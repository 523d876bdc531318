#include "trajlab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "trajlab/errors.hpp"

namespace trajlab {

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= n;
    return {mean, std::sqrt(var)};
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
    return a.x >= b.x && a.y >= b.y && (a.x > b.x || a.y > b.y);
}

}  // namespace

MetricRecord proxy_scores(const std::vector<std::vector<double>>& finals,
                          const Scenario& scenario) {
    if (finals.empty()) throw ContractError("proxy_scores: no samples");
    const GaussianMixture& fidelity = scenario.mixture_by_ref(scenario.fidelity_ref);
    const GaussianMixture& context = scenario.mixture_by_ref(scenario.context_ref);

    std::vector<double> fid(finals.size());
    std::vector<double> ctx(finals.size());
    for (std::size_t i = 0; i < finals.size(); ++i) {
        fid[i] = log_density(fidelity, finals[i]);
        ctx[i] = log_density(context, finals[i]);
    }
    MetricRecord rec;
    rec.n = static_cast<int>(finals.size());
    std::tie(rec.fidelity_mean, rec.fidelity_std) = mean_std(fid);
    std::tie(rec.context_mean, rec.context_std) = mean_std(ctx);
    return rec;
}

std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points) {
    if (points.empty()) throw ContractError("pareto_front: no points");
    std::vector<ParetoPoint> front;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points) {
            if (dominates(q, p)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front.push_back(p);
    }
    std::stable_sort(front.begin(), front.end(),
                     [](const ParetoPoint& a, const ParetoPoint& b) {
                         return a.x < b.x;
                     });
    return front;
}

}  // namespace trajlab
