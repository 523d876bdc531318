#include <cmath>
#include <string>

#include <doctest.h>

#include "trajlab/errors.hpp"
#include "trajlab/rng.hpp"
#include "trajlab/scenario.hpp"
#include "test_util.hpp"

using namespace trajlab;

namespace {

const char* kMinimalScenario = R"({
  "name": "mini", "version": 1, "latent_shape": [1],
  "mixtures": {
    "tuned.null": {"weights": [1.0], "means": [[0.0]], "variances": [[1.0]]},
    "tuned.concept": {"weights": [1.0], "means": [[1.0]], "variances": [[1.0]]},
    "tuned.superclass": {"weights": [1.0], "means": [[-1.0]], "variances": [[1.0]]}
  },
  "fidelity_ref": "tuned.concept", "context_ref": "tuned.superclass"
})";

std::string patched(const std::string& from, const std::string& to) {
    std::string doc = kMinimalScenario;
    const auto pos = doc.find(from);
    REQUIRE(pos != std::string::npos);
    doc.replace(pos, from.size(), to);
    return doc;
}

}  // namespace

TEST_CASE("load_scenario: canonical-2d fixture") {
    const Scenario sc = load_fixture("canonical-2d");
    CHECK(sc.name == "canonical-2d");
    CHECK(sc.shape.size() == 2);
    CHECK_FALSE(sc.shape.grid);
    CHECK(sc.has(ModelVariant::Tuned, Condition::Null));
    CHECK(sc.has(ModelVariant::Tuned, Condition::Concept));
    CHECK(sc.has(ModelVariant::Tuned, Condition::Superclass));
    CHECK(sc.has(ModelVariant::Tuned, Condition::ContextOnly));
    CHECK(sc.has(ModelVariant::Orig, Condition::Superclass));
    CHECK(sc.mixture(ModelVariant::Tuned, Condition::Concept).components() == 2);
    CHECK(sc.mixture_by_ref(sc.fidelity_ref).dim() == 2);
}

TEST_CASE("load_scenario: grid-8x8 fixture has a concept region") {
    const Scenario sc = load_fixture("grid-8x8");
    CHECK(sc.shape.grid);
    CHECK(sc.shape.rows == 8);
    CHECK(sc.shape.size() == 64);
    REQUIRE(sc.concept_region.has_value());
    double count = 0;
    for (double v : *sc.concept_region) count += v;
    CHECK(count == 16);
}

TEST_CASE("parse_scenario: validation errors") {
    const std::string bad_weights = patched(
        "\"tuned.concept\": {\"weights\": [1.0], \"means\": [[1.0]], \"variances\": [[1.0]]}",
        "\"tuned.concept\": {\"weights\": [0.5, 0.6], \"means\": [[1.0], [2.0]], \"variances\": [[1.0], [1.0]]}");
    CHECK_THROWS_WITH_AS(parse_scenario(bad_weights, "t"),
                         doctest::Contains("weights must sum to 1"), ConfigError);

    CHECK_THROWS_WITH_AS(
        parse_scenario(patched("\"tuned.superclass\"", "\"orig.superclass\""), "t"),
        doctest::Contains("tuned.superclass"), ConfigError);

    CHECK_THROWS_WITH_AS(
        parse_scenario(patched("\"fidelity_ref\"", "\"bogus_key\": 1, \"fidelity_ref\""), "t"),
        doctest::Contains("unknown key"), ConfigError);

    CHECK_THROWS_AS(parse_scenario("{not json", "t"), ConfigError);

    CHECK_THROWS_WITH_AS(
        parse_scenario(patched("\"variances\": [[1.0]]}\n  },", "\"variances\": [[0.0]]}\n  },"), "t"),
        doctest::Contains("variances must be > 0"), ConfigError);
}

TEST_CASE("log_density: analytic anchors") {
    GaussianMixture std2{{1.0}, {{0.0, 0.0}}, {{1.0, 1.0}}};
    CHECK(log_density(std2, {0.0, 0.0}) ==
          doctest::Approx(-std::log(2.0 * 3.14159265358979323846)).epsilon(1e-12));

    // symmetric two-component mixture at the midpoint
    GaussianMixture sym{{0.5, 0.5}, {{-1.0}, {1.0}}, {{0.5}, {0.5}}};
    GaussianMixture comp{{1.0}, {{-1.0}}, {{0.5}}};
    CHECK(log_density(sym, {0.0}) ==
          doctest::Approx(log_density(comp, {0.0})).epsilon(1e-12));

    CHECK_THROWS_AS(log_density(std2, {0.0}), ContractError);
}

TEST_CASE("log_density: naive-summation oracle on random mixtures") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 1 + static_cast<int>(rng.next_u64() % 4);
        GaussianMixture m;
        double wsum = 0.0;
        for (int c = 0; c < k; ++c) {
            m.weights.push_back(rng.uniform());
            wsum += m.weights.back();
            m.means.push_back({2.0 * rng.gaussian(), 2.0 * rng.gaussian()});
            m.variances.push_back({0.2 + rng.uniform(), 0.2 + rng.uniform()});
        }
        for (double& w : m.weights) w /= wsum;
        // renormalize exactly enough for the 1e-12 gate
        double fix = 0.0;
        for (double w : m.weights) fix += w;
        m.weights[0] += 1.0 - fix;

        const std::vector<double> x{rng.gaussian(), rng.gaussian()};
        double naive = 0.0;
        for (int c = 0; c < k; ++c) {
            double dens = m.weights[c];
            for (int j = 0; j < 2; ++j) {
                const double d = x[j] - m.means[c][j];
                dens *= std::exp(-0.5 * d * d / m.variances[c][j]) /
                        std::sqrt(2.0 * 3.14159265358979323846 * m.variances[c][j]);
            }
            naive += dens;
        }
        CHECK(log_density(m, x) == doctest::Approx(std::log(naive)).epsilon(1e-10));
    }
}

TEST_CASE("log_density: component permutation and zero-weight invariance") {
    GaussianMixture m{{0.3, 0.7}, {{1.0, 0.0}, {-1.0, 2.0}}, {{0.5, 1.0}, {2.0, 0.3}}};
    GaussianMixture perm{{0.7, 0.3}, {{-1.0, 2.0}, {1.0, 0.0}}, {{2.0, 0.3}, {0.5, 1.0}}};
    GaussianMixture padded = m;
    padded.weights.push_back(0.0);
    padded.means.push_back({9.0, 9.0});
    padded.variances.push_back({1.0, 1.0});

    const std::vector<double> x{0.4, -0.7};
    CHECK(log_density(m, x) == doctest::Approx(log_density(perm, x)).epsilon(1e-13));
    CHECK(std::abs(log_density(m, x) - log_density(padded, x)) < 1e-12);
}

TEST_CASE("sample_mixture: determinism and degenerate weights") {
    GaussianMixture m{{1.0, 0.0}, {{5.0}, {-5.0}}, {{0.01}, {0.01}}};
    const auto a = sample_mixture(m, 1, 99);
    const auto b = sample_mixture(m, 1, 99);
    CHECK(a == b);
    const auto many = sample_mixture(m, 200, 7);
    for (const auto& x : many) CHECK(x[0] > 0.0);  // all from component 0
    CHECK_THROWS_AS(sample_mixture(m, 0, 1), ContractError);
}

TEST_CASE("sample_mixture: CLT bound on the standard normal") {
    GaussianMixture m{{1.0}, {{0.0, 0.0}}, {{1.0, 1.0}}};
    const auto xs = sample_mixture(m, 100000, 2024);
    double mx = 0.0, my = 0.0;
    for (const auto& x : xs) {
        mx += x[0];
        my += x[1];
    }
    CHECK(std::abs(mx / xs.size()) < 0.02);
    CHECK(std::abs(my / xs.size()) < 0.02);
}

TEST_CASE("forward_marginal matches the stated closed form") {
    GaussianMixture m{{0.4, 0.6}, {{1.0}, {-2.0}}, {{0.5}, {0.25}}};
    const auto pt = forward_marginal(m, 0.8, 0.6);
    CHECK(pt.means[0][0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(pt.variances[0][0] == doctest::Approx(0.64 * 0.5 + 0.36).epsilon(1e-14));
    CHECK(pt.variances[1][0] == doctest::Approx(0.64 * 0.25 + 0.36).epsilon(1e-14));
}
