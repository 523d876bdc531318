#include "trajlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "trajlab/errors.hpp"
#include "trajlab/rng.hpp"

namespace trajlab {

using nlohmann::json;

std::string to_string(Condition c) {
    switch (c) {
        case Condition::Null: return "null";
        case Condition::Concept: return "concept";
        case Condition::Superclass: return "superclass";
        case Condition::ContextOnly: return "context_only";
    }
    return "?";
}

std::string to_string(ModelVariant v) {
    return v == ModelVariant::Tuned ? "tuned" : "orig";
}

Condition condition_from_string(const std::string& s) {
    if (s == "null") return Condition::Null;
    if (s == "concept") return Condition::Concept;
    if (s == "superclass") return Condition::Superclass;
    if (s == "context_only") return Condition::ContextOnly;
    throw ConfigError("unknown condition: " + s);
}

ModelVariant variant_from_string(const std::string& s) {
    if (s == "tuned") return ModelVariant::Tuned;
    if (s == "orig") return ModelVariant::Orig;
    throw ConfigError("unknown model variant: " + s);
}

bool Scenario::has(ModelVariant v, Condition c) const {
    return mixtures.count({v, c}) > 0;
}

const GaussianMixture& Scenario::mixture(ModelVariant v, Condition c) const {
    auto it = mixtures.find({v, c});
    if (it == mixtures.end()) {
        throw ConfigError("scenario '" + name + "' has no mixture for " +
                          to_string(v) + "." + to_string(c));
    }
    return it->second;
}

const GaussianMixture& Scenario::mixture_by_ref(const std::string& key) const {
    auto dot = key.find('.');
    if (dot == std::string::npos) {
        throw ConfigError("mixture reference must be 'variant.condition', got '" + key + "'");
    }
    return mixture(variant_from_string(key.substr(0, dot)),
                   condition_from_string(key.substr(dot + 1)));
}

namespace {

void require_keys(const json& obj, const std::vector<std::string>& required,
                  const std::vector<std::string>& optional,
                  const std::string& where) {
    for (const auto& k : required) {
        if (!obj.contains(k)) {
            throw ConfigError(where + ": missing key '" + k + "'");
        }
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& k = it.key();
        if (std::find(required.begin(), required.end(), k) == required.end() &&
            std::find(optional.begin(), optional.end(), k) == optional.end()) {
            throw ConfigError(where + ": unknown key '" + k + "'");
        }
    }
}

GaussianMixture parse_mixture(const json& obj, const std::string& where) {
    require_keys(obj, {"weights", "means", "variances"}, {}, where);
    GaussianMixture m;
    m.weights = obj.at("weights").get<std::vector<double>>();
    m.means = obj.at("means").get<std::vector<std::vector<double>>>();
    m.variances = obj.at("variances").get<std::vector<std::vector<double>>>();

    const std::size_t k = m.weights.size();
    if (k == 0) throw ConfigError(where + ": mixture must have at least one component");
    if (m.means.size() != k || m.variances.size() != k) {
        throw ConfigError(where + ": weights, means, variances must have equal length");
    }
    double sum = 0.0;
    for (double w : m.weights) {
        if (w < 0.0) throw ConfigError(where + ": weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ConfigError(where + ": weights must sum to 1");
    }
    const std::size_t d = m.means[0].size();
    for (std::size_t i = 0; i < k; ++i) {
        if (m.means[i].size() != d || m.variances[i].size() != d) {
            throw ConfigError(where + ": all components must share one dimension");
        }
        for (double v : m.variances[i]) {
            if (!(v > 0.0)) throw ConfigError(where + ": variances must be > 0");
        }
    }
    return m;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": parse error: " + e.what());
    }
    require_keys(doc,
                 {"name", "version", "latent_shape", "mixtures", "fidelity_ref",
                  "context_ref"},
                 {"concept_region"}, origin);

    Scenario sc;
    sc.name = doc.at("name").get<std::string>();
    sc.version = doc.at("version").get<int>();

    const auto shape = doc.at("latent_shape").get<std::vector<int>>();
    if (shape.size() == 1 && shape[0] >= 1) {
        sc.shape = {false, 0, 0, shape[0]};
    } else if (shape.size() == 2 && shape[0] >= 1 && shape[1] >= 1) {
        sc.shape = {true, shape[0], shape[1], shape[0] * shape[1]};
    } else {
        throw ConfigError(origin + ": latent_shape must be [D] or [H, W] with positive entries");
    }

    for (auto it = doc.at("mixtures").begin(); it != doc.at("mixtures").end(); ++it) {
        const std::string& key = it.key();
        auto dot = key.find('.');
        if (dot == std::string::npos) {
            throw ConfigError(origin + ": mixture key '" + key + "' must be 'variant.condition'");
        }
        const ModelVariant v = variant_from_string(key.substr(0, dot));
        const Condition c = condition_from_string(key.substr(dot + 1));
        GaussianMixture m = parse_mixture(it.value(), origin + ": mixtures." + key);
        if (m.dim() != sc.shape.size()) {
            throw ConfigError(origin + ": mixtures." + key + ": dimension " +
                              std::to_string(m.dim()) + " does not match latent size " +
                              std::to_string(sc.shape.size()));
        }
        sc.mixtures[{v, c}] = std::move(m);
    }

    for (Condition c : {Condition::Null, Condition::Concept, Condition::Superclass}) {
        if (!sc.has(ModelVariant::Tuned, c)) {
            throw ConfigError(origin + ": required mixture 'tuned." + to_string(c) +
                              "' is missing");
        }
    }

    sc.fidelity_ref = doc.at("fidelity_ref").get<std::string>();
    sc.context_ref = doc.at("context_ref").get<std::string>();
    sc.mixture_by_ref(sc.fidelity_ref);  // existence check
    sc.mixture_by_ref(sc.context_ref);

    if (doc.contains("concept_region")) {
        if (!sc.shape.grid) {
            throw ConfigError(origin + ": concept_region requires a grid latent_shape");
        }
        auto region = doc.at("concept_region").get<std::vector<double>>();
        if (static_cast<int>(region.size()) != sc.shape.size()) {
            throw ConfigError(origin + ": concept_region size does not match grid shape");
        }
        for (double v : region) {
            if (v != 0.0 && v != 1.0) {
                throw ConfigError(origin + ": concept_region entries must be 0 or 1");
            }
        }
        sc.concept_region = std::move(region);
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

double log_density(const GaussianMixture& m, const std::vector<double>& x) {
    const int d = m.dim();
    if (static_cast<int>(x.size()) != d) {
        throw ContractError("log_density: point dimension mismatch");
    }
    constexpr double log2pi = 1.8378770664093454835606594728112;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(m.components());
    for (int k = 0; k < m.components(); ++k) {
        if (m.weights[k] == 0.0) {
            logs[k] = -std::numeric_limits<double>::infinity();
            continue;
        }
        double lp = std::log(m.weights[k]);
        for (int j = 0; j < d; ++j) {
            const double diff = x[j] - m.means[k][j];
            const double v = m.variances[k][j];
            lp -= 0.5 * (log2pi + std::log(v) + diff * diff / v);
        }
        logs[k] = lp;
        best = std::max(best, lp);
    }
    if (!std::isfinite(best)) return best;
    double acc = 0.0;
    for (double lp : logs) acc += std::exp(lp - best);
    return best + std::log(acc);
}

std::vector<std::vector<double>> sample_mixture(const GaussianMixture& m, int n,
                                                std::uint64_t seed) {
    if (n < 1) throw ContractError("sample_mixture: n must be >= 1");
    Rng rng(seed);
    std::vector<std::vector<double>> out(n);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        int k = 0;
        double acc = m.weights[0];
        while (u > acc && k + 1 < m.components()) acc += m.weights[++k];
        std::vector<double> x(m.dim());
        for (int j = 0; j < m.dim(); ++j) {
            x[j] = m.means[k][j] + std::sqrt(m.variances[k][j]) * rng.gaussian();
        }
        out[i] = std::move(x);
    }
    return out;
}

GaussianMixture forward_marginal(const GaussianMixture& m, double alpha,
                                 double sigma) {
    GaussianMixture out = m;
    for (int k = 0; k < m.components(); ++k) {
        for (int j = 0; j < m.dim(); ++j) {
            out.means[k][j] = alpha * m.means[k][j];
            out.variances[k][j] = alpha * alpha * m.variances[k][j] + sigma * sigma;
        }
    }
    return out;
}

}  // namespace trajlab
