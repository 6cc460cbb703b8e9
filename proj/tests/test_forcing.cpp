#include <doctest.h>

#include "support/stats.hpp"
#include "vplan/forcing.hpp"

using namespace vplan;

namespace {

LatentVideo make_latent(Eigen::Index frames, Eigen::Index per_frame, std::uint64_t seed) {
    Rng rng(seed);
    LatentVideo z;
    z.channels = per_frame;
    z.h = 1;
    z.w = 1;
    z.pixel_frames = 1 + (frames - 1) * 4;
    z.data = rng.gaussian_matrix<double>(frames, per_frame);
    return z;
}

}  // namespace

TEST_SUITE("forcing") {

TEST_CASE("clean-history frequency is one half") {
    Rng rng(42);
    const ScheduleConfig schedule;
    int clean = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        if (sample_forcing_plan(rng, 13, schedule).clean_history) ++clean;
    const double freq = static_cast<double>(clean) / draws;
    CHECK(freq > 0.48);
    CHECK(freq < 0.52);
}

TEST_CASE("history length support and uniformity at 13 frames") {
    Rng rng(7);
    const ScheduleConfig schedule;
    std::vector<long> counts(7, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const ForcingPlan plan = sample_forcing_plan(rng, 13, schedule);
        REQUIRE(plan.history_len >= 0);
        REQUIRE(plan.history_len <= 6);
        ++counts[static_cast<std::size_t>(plan.history_len)];
    }
    for (long c : counts) CHECK(c > 0);  // support is exactly {0..6}
    CHECK(teststats::chi_squared_uniform_pvalue(counts) > 0.01);
}

TEST_CASE("history length capped by latent frame count") {
    Rng rng(9);
    const ScheduleConfig schedule;
    for (int i = 0; i < 2000; ++i) {
        const ForcingPlan plan = sample_forcing_plan(rng, 3, schedule);
        CHECK(plan.history_len <= 2);
    }
}

TEST_CASE("seeded determinism") {
    const ScheduleConfig schedule;
    Rng a(123), b(123);
    for (int i = 0; i < 50; ++i) {
        const ForcingPlan pa = sample_forcing_plan(a, 13, schedule);
        const ForcingPlan pb = sample_forcing_plan(b, 13, schedule);
        CHECK(pa.history_len == pb.history_len);
        CHECK(pa.k_hist == pb.k_hist);
        CHECK(pa.k_future == pb.k_future);
        CHECK(pa.clean_history == pb.clean_history);
    }
}

TEST_CASE("clean history forces k_hist to zero") {
    Rng rng(11);
    const ScheduleConfig schedule;
    for (int i = 0; i < 500; ++i) {
        const ForcingPlan p = sample_forcing_plan(rng, 13, schedule);
        if (p.clean_history) CHECK(p.k_hist == 0.0);
        CHECK(p.k_hist >= 0.0);
        CHECK(p.k_hist <= 1.0);
        CHECK(p.k_future >= 0.0);
        CHECK(p.k_future <= 1.0);
    }
}

TEST_CASE("grid construction") {
    ForcingPlan plan;
    plan.history_len = 0;
    plan.k_future = 0.9;
    NoiseGrid grid = plan_to_grid(plan, 5);
    CHECK((grid.array() == 0.9).all());

    plan.history_len = 1;
    plan.clean_history = true;
    plan.k_hist = 0.0;
    grid = plan_to_grid(plan, 4);  // the standard i2v case
    CHECK(grid[0] == 0.0);
    CHECK((grid.tail(3).array() == 0.9).all());

    plan.history_len = 6;
    plan.k_hist = 0.3;
    plan.clean_history = false;
    grid = plan_to_grid(plan, 13);
    CHECK((grid.head(6).array() == 0.3).all());
    CHECK((grid.tail(7).array() == 0.9).all());
}

TEST_CASE("grid has at most two values split prefix/suffix") {
    Rng rng(13);
    const ScheduleConfig schedule;
    for (int i = 0; i < 200; ++i) {
        const ForcingPlan plan = sample_forcing_plan(rng, 9, schedule);
        const NoiseGrid grid = plan_to_grid(plan, 9);
        for (Eigen::Index f = 0; f < 9; ++f)
            CHECK(grid[f] == (f < plan.history_len ? plan.k_hist : plan.k_future));
    }
}

TEST_CASE("plan_to_grid rejects oversized history") {
    ForcingPlan plan;
    plan.history_len = 7;
    CHECK_THROWS_AS(plan_to_grid(plan, 5), std::invalid_argument);
}

TEST_CASE("noised batch matches a per-frame scalar oracle") {
    const LatentVideo z0 = make_latent(6, 4, 31);
    const LatentVideo eps = make_latent(6, 4, 32);
    ForcingPlan plan;
    plan.history_len = 2;
    plan.k_hist = 0.25;
    plan.k_future = 0.75;
    const auto [noisy, grid] = noised_batch(z0, eps, plan);
    for (Eigen::Index f = 0; f < 6; ++f) {
        const double k = f < 2 ? 0.25 : 0.75;
        CHECK(grid[f] == k);
        for (Eigen::Index j = 0; j < 4; ++j)
            CHECK(noisy.data(f, j) ==
                  doctest::Approx((1 - k) * z0.data(f, j) + k * eps.data(f, j)).epsilon(1e-15));
    }
}

TEST_CASE("clean history frames are bit-identical to the clean latent") {
    const LatentVideo z0 = make_latent(5, 4, 33);
    const LatentVideo eps = make_latent(5, 4, 34);
    ForcingPlan plan;
    plan.history_len = 1;
    plan.clean_history = true;
    plan.k_hist = 0.0;
    plan.k_future = 0.8;
    const auto [noisy, grid] = noised_batch(z0, eps, plan);
    CHECK(noisy.data.row(0) == z0.data.row(0));
}

TEST_CASE("equal levels collapse to uniform diffusion") {
    const LatentVideo z0 = make_latent(5, 4, 35);
    const LatentVideo eps = make_latent(5, 4, 36);
    ForcingPlan plan;
    plan.history_len = 2;
    plan.k_hist = 0.6;
    plan.k_future = 0.6;
    const auto [noisy, grid] = noised_batch(z0, eps, plan);
    const LatentVideo uniform = interpolate_noise(z0, eps, 0.6);
    CHECK(noisy.data == uniform.data);
}

}  // TEST_SUITE
