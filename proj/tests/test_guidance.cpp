#include <cmath>
#include <vector>

#include <doctest.h>

#include "trajlab/errors.hpp"
#include "trajlab/guidance.hpp"
#include "trajlab/rng.hpp"
#include "test_util.hpp"

using namespace trajlab;

TEST_CASE("cfg_combine: endpoints and arithmetic") {
    const std::vector<double> eu{0.0}, ec{1.0};
    CHECK(cfg_combine(eu, ec, 0.0) == eu);
    CHECK(cfg_combine(eu, ec, 1.0) == ec);
    CHECK(cfg_combine(eu, ec, 2.0)[0] == 2.0);
    CHECK_THROWS_AS(cfg_combine(eu, {1.0, 2.0}, 1.0), ContractError);
}

TEST_CASE("mixed_combine: reductions and cancellation") {
    const std::vector<double> eu{0.5, -0.5};
    const std::vector<double> dc{1.0, 2.0};
    const std::vector<double> ds{-1.0, -2.0};

    // omega_s = 0 reduces to base guidance on the concept delta, bit-exact
    const auto base_like = mixed_combine(eu, dc, ds, 3.0, 0.0);
    for (int j = 0; j < 2; ++j) CHECK(base_like[j] == eu[j] + 3.0 * dc[j]);

    // omega_c = 0 reduces to superclass guidance
    const auto super_like = mixed_combine(eu, dc, ds, 0.0, 2.0);
    for (int j = 0; j < 2; ++j) CHECK(super_like[j] == eu[j] + 2.0 * ds[j]);

    // equal scales on opposite deltas cancel (default split 3.5 + 3.5)
    const auto cancel = mixed_combine(eu, {1.0, 1.0}, {-1.0, -1.0}, 3.5, 3.5);
    CHECK(cancel[0] == doctest::Approx(eu[0]).epsilon(1e-15));
    CHECK(cancel[1] == doctest::Approx(eu[1]).epsilon(1e-15));
}

TEST_CASE("mixed_combine: linearity in the deltas") {
    Rng rng(21);
    std::vector<double> eu(4), dc(4), ds(4);
    for (int j = 0; j < 4; ++j) {
        eu[j] = rng.gaussian();
        dc[j] = rng.gaussian();
        ds[j] = rng.gaussian();
    }
    const double c = 2.75;
    auto scaled_dc = dc, scaled_ds = ds;
    for (int j = 0; j < 4; ++j) {
        scaled_dc[j] *= c;
        scaled_ds[j] *= c;
    }
    const auto out = mixed_combine(eu, dc, ds, 1.3, 2.1);
    const auto out_scaled = mixed_combine(eu, scaled_dc, scaled_ds, 1.3, 2.1);
    for (int j = 0; j < 4; ++j) {
        CHECK(out_scaled[j] - eu[j] ==
              doctest::Approx(c * (out[j] - eu[j])).epsilon(1e-12));
    }
}

TEST_CASE("switching_combine: strict boundary at i = S - t_sw") {
    const std::vector<double> eu{0.0};
    const std::vector<double> dc{1.0};
    const std::vector<double> ds{-1.0};
    const int s_count = 50, t_sw = 10;
    for (int i = 1; i <= s_count; ++i) {
        const auto out = switching_combine(eu, dc, ds, 2.0, i, s_count, t_sw);
        if (i > 40) {
            CHECK(out[0] == -2.0);  // superclass branch, steps 50..41
        } else {
            CHECK(out[0] == 2.0);  // concept branch from i = 40 down
        }
    }
    // t_sw = 0: concept everywhere; t_sw = S: superclass everywhere
    CHECK(switching_combine(eu, dc, ds, 2.0, 50, 50, 0)[0] == 2.0);
    CHECK(switching_combine(eu, dc, ds, 2.0, 1, 50, 50)[0] == -2.0);
}

TEST_CASE("multistage_combine: combined-scale first stage, literal formula") {
    const std::vector<double> eu{1.0};
    const std::vector<double> dc{10.0};
    const std::vector<double> ds{-1.0};
    // first stage applies (omega_s + omega_c) to the superclass delta, even
    // with omega_s = 0
    const auto first = multistage_combine(eu, dc, ds, 2.0, 0.0, 50, 50, 5);
    CHECK(first[0] == 1.0 + 2.0 * -1.0);
    // t_sw = 0: identical to mixed everywhere
    const auto second = multistage_combine(eu, dc, ds, 2.0, 1.5, 50, 50, 0);
    const auto mixed = mixed_combine(eu, dc, ds, 2.0, 1.5);
    CHECK(second == mixed);
}

TEST_CASE("soft_mask_divergence: normalization and edge cases") {
    CHECK(soft_mask_divergence({1.0, 2.0}, {1.0, 2.0}) ==
          std::vector<double>{0.0, 0.0});
    CHECK(soft_mask_divergence({0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}) ==
          std::vector<double>{0.0, 1.0, 0.0});
    Rng rng(9);
    std::vector<double> dc(8), ds(8);
    for (int j = 0; j < 8; ++j) {
        dc[j] = rng.gaussian();
        ds[j] = rng.gaussian();
    }
    const auto soft = soft_mask_divergence(dc, ds);
    double max_abs = 0.0;
    for (int j = 0; j < 8; ++j) max_abs = std::max(max_abs, std::abs(dc[j] - ds[j]));
    for (int j = 0; j < 8; ++j) {
        CHECK(soft[j] == doctest::Approx(std::abs(dc[j] - ds[j]) / max_abs).epsilon(1e-14));
        CHECK(soft[j] >= 0.0);
        CHECK(soft[j] <= 1.0);
    }
}

TEST_CASE("fixed_region_mask: fixture readback and missing region") {
    const auto grid = load_fixture("grid-8x8");
    const auto mask = fixed_region_mask(grid);
    CHECK(mask == *grid.concept_region);
    const auto flat = load_fixture("canonical-2d");
    CHECK_THROWS_AS(fixed_region_mask(flat), ConfigError);
}

TEST_CASE("binarize_mask: stated quantile rule") {
    const auto all_ones = binarize_mask({0.3, 0.9, 0.1}, 0.0);
    CHECK(all_ones.binary == std::vector<double>{1.0, 1.0, 1.0});

    const auto hand = binarize_mask({0.1, 0.2, 0.3, 0.4}, 0.5);
    CHECK(hand.binary == std::vector<double>{0.0, 1.0, 1.0, 1.0});  // threshold 0.2

    const auto top = binarize_mask({0.1, 0.5, 0.5, 0.2}, 1.0);
    CHECK(top.binary == std::vector<double>{0.0, 1.0, 1.0, 0.0});
}

TEST_CASE("binarize_mask: monotone in q") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> soft(16);
        for (double& v : soft) v = rng.uniform();
        const double q1 = rng.uniform();
        const double q2 = q1 + (1.0 - q1) * rng.uniform();
        const auto lo = binarize_mask(soft, q1);
        const auto hi = binarize_mask(soft, q2);
        for (int j = 0; j < 16; ++j) CHECK(hi.binary[j] <= lo.binary[j]);
    }
}

TEST_CASE("masked_combine: reductions and partition") {
    Rng rng(13);
    std::vector<double> eu(6), dc(6), ds(6);
    for (int j = 0; j < 6; ++j) {
        eu[j] = rng.gaussian();
        dc[j] = rng.gaussian();
        ds[j] = rng.gaussian();
    }
    Mask ones{std::vector<double>(6, 1.0), std::vector<double>(6, 1.0), 0.0};
    Mask zeros{std::vector<double>(6, 0.0), std::vector<double>(6, 0.0), 1.0};

    CHECK(masked_combine(eu, dc, ds, 2.0, 1.0, ones, false) ==
          mixed_combine(eu, dc, ds, 2.0, 1.0));
    const auto outside = masked_combine(eu, dc, ds, 2.0, 1.0, zeros, false);
    for (int j = 0; j < 6; ++j) CHECK(outside[j] == eu[j] + 3.0 * ds[j]);

    // mixed-region: each element gets exactly one branch
    Mask half = ones;
    for (int j = 0; j < 3; ++j) half.binary[j] = 0.0;
    const auto out = masked_combine(eu, dc, ds, 2.0, 1.0, half, false);
    const auto inside_all = mixed_combine(eu, dc, ds, 2.0, 1.0);
    for (int j = 0; j < 6; ++j) {
        CHECK(out[j] == (j < 3 ? outside[j] : inside_all[j]));
    }

    // basic rule needs equal scales; applies omega per side
    CHECK_THROWS_AS(masked_combine(eu, dc, ds, 2.0, 1.0, ones, true), ConfigError);
    const auto basic = masked_combine(eu, dc, ds, 2.0, 2.0, half, true);
    for (int j = 0; j < 6; ++j) {
        CHECK(basic[j] == eu[j] + 2.0 * (j < 3 ? ds[j] : dc[j]));
    }
}

TEST_CASE("profusion_step: r = 1 with zero noise is a deterministic rescale") {
    const auto sc = load_fixture("canonical-2d");
    const auto sched = NoiseSchedule::build(1000, 1e-4, 0.02, 50);
    const int i = 30;
    const std::vector<double> z{0.6, -0.9};
    CallCounter counter;
    const auto out = profusion_step(sc, sched, i, z,
                                    {ModelVariant::Tuned, Condition::Superclass},
                                    3.5, 3.5, 1.0, [] { return 0.0; }, counter);
    CHECK(counter.total == 5);

    // recompute by hand: stage 1 concept step, zero-noise forward rescale,
    // mixed backward step
    CallCounter scratch;
    const int t = sched.tau(i);
    const auto eu1 = analytic_eps(sc, sched, z, t, ModelVariant::Tuned, Condition::Null, scratch);
    const auto ec1 = analytic_eps(sc, sched, z, t, ModelVariant::Tuned, Condition::Concept, scratch);
    const auto z_prev = ddim_step(sched, i, z, cfg_combine(eu1, ec1, 7.0));
    const auto z_tilde = forward_noise(sched, i, z_prev, {0.0, 0.0});
    const auto eu = analytic_eps(sc, sched, z_tilde, t, ModelVariant::Tuned, Condition::Null, scratch);
    const auto ec = analytic_eps(sc, sched, z_tilde, t, ModelVariant::Tuned, Condition::Concept, scratch);
    const auto es = analytic_eps(sc, sched, z_tilde, t, ModelVariant::Tuned, Condition::Superclass, scratch);
    std::vector<double> dc(2), ds(2);
    for (int j = 0; j < 2; ++j) {
        dc[j] = ec[j] - eu[j];
        ds[j] = es[j] - eu[j];
    }
    const auto expect = ddim_step(sched, i, z_tilde, mixed_combine(eu, dc, ds, 3.5, 3.5));
    for (int j = 0; j < 2; ++j) {
        CHECK(out[j] == doctest::Approx(expect[j]).epsilon(1e-12));
    }
}

TEST_CASE("strategy config validation") {
    StrategyConfig cfg;
    cfg.body = MixedStrategy{-1.0, 2.0};
    CHECK_THROWS_AS(cfg.validate(50), ConfigError);
    cfg.body = SwitchingStrategy{7.0, 51};
    CHECK_THROWS_AS(cfg.validate(50), ConfigError);
    cfg.body = MaskedStrategy{3.5, 3.5, 3.5, 3.5, 3, 1.5};
    CHECK_THROWS_AS(cfg.validate(50), ConfigError);
    MaskedStrategy basic_bad;
    basic_bad.basic = true;
    basic_bad.omega_c = 1.0;
    basic_bad.omega_s = 2.0;
    cfg.body = basic_bad;
    CHECK_THROWS_AS(cfg.validate(50), ConfigError);
    cfg.body = ProFusionStrategy{3.5, 3.5, 1.5};
    CHECK_THROWS_AS(cfg.validate(50), ConfigError);
    cfg.body = ProFusionStrategy{3.5, 3.5, 0.5};
    CHECK_NOTHROW(cfg.validate(50));
    CHECK(cfg.kind() == "profusion");
    CHECK(cfg.calls_per_step() == 5);
}
