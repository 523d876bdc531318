#pragma once

#include <map>
#include <string>
#include <vector>

#include "trajlab/scenario.hpp"

namespace trajlab {

// Mean/std of per-sample log-likelihood under the two reference mixtures.
// These stand in for image/text similarity scores; only trend directions are
// comparable.
struct MetricRecord {
    double fidelity_mean = 0.0;
    double fidelity_std = 0.0;
    double context_mean = 0.0;
    double context_std = 0.0;
    int n = 0;
};

struct ParetoPoint {
    double x = 0.0;  // context axis
    double y = 0.0;  // fidelity axis
    std::map<std::string, std::string> tags;
};

MetricRecord proxy_scores(const std::vector<std::vector<double>>& finals,
                          const Scenario& scenario);

// Non-dominated subset, both axes maximized; duplicates kept; sorted by x.
std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points);

}  // namespace trajlab
