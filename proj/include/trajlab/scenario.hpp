#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace trajlab {

enum class Condition { Null, Concept, Superclass, ContextOnly };
enum class ModelVariant { Tuned, Orig };

std::string to_string(Condition c);
std::string to_string(ModelVariant v);
Condition condition_from_string(const std::string& s);
ModelVariant variant_from_string(const std::string& s);

using MixtureKey = std::pair<ModelVariant, Condition>;

// Diagonal-covariance Gaussian mixture over the latent space.
struct GaussianMixture {
    std::vector<double> weights;               // K, sums to 1
    std::vector<std::vector<double>> means;    // K x D
    std::vector<std::vector<double>> variances;  // K x D, all > 0

    int components() const { return static_cast<int>(weights.size()); }
    int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
};

struct LatentShape {
    bool grid = false;
    int rows = 0;  // grid only
    int cols = 0;  // grid only
    int dim = 0;   // total element count

    int size() const { return dim; }
};

struct Scenario {
    std::string name;
    int version = 0;
    LatentShape shape;
    std::map<MixtureKey, GaussianMixture> mixtures;
    std::string fidelity_ref;  // mixture key string, e.g. "tuned.concept"
    std::string context_ref;
    std::optional<std::vector<double>> concept_region;  // row-major 0/1, grid only

    bool has(ModelVariant v, Condition c) const;
    const GaussianMixture& mixture(ModelVariant v, Condition c) const;
    const GaussianMixture& mixture_by_ref(const std::string& key) const;
};

// Strict parse + full validation of the scenario document.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& origin);

// log sum_k w_k N(x; mu_k, diag(v_k)), log-sum-exp stabilized.
double log_density(const GaussianMixture& m, const std::vector<double>& x);

// n i.i.d. draws; deterministic for a fixed seed.
std::vector<std::vector<double>> sample_mixture(const GaussianMixture& m, int n,
                                                std::uint64_t seed);

// Forward-marginal mixture at base timestep t:
// p_t = sum_k w_k N(alpha_t mu_k, alpha_t^2 diag(v_k) + sigma_t^2 I).
GaussianMixture forward_marginal(const GaussianMixture& m, double alpha,
                                 double sigma);

}  // namespace trajlab
