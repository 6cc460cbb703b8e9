#include <doctest.h>

#include "vplan/rng.hpp"
#include "vplan/schedule.hpp"

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

TEST_SUITE("schedule") {

TEST_CASE("shift schedule endpoints and identity") {
    CHECK(shift_schedule(0.0, 3.0) == 0.0);
    CHECK(shift_schedule(1.0, 3.0) == 1.0);
    for (double t : {0.0, 0.12, 0.5, 0.93, 1.0}) CHECK(shift_schedule(t, 1.0) == doctest::Approx(t));
    CHECK(shift_schedule(0.5, 3.0) == doctest::Approx(0.75));
}

TEST_CASE("shift schedule is strictly monotone and above identity for shift >= 1") {
    for (double shift : {0.5, 1.0, 3.0, 7.0}) {
        double prev = -1.0;
        for (int i = 0; i <= 100; ++i) {
            const double t = i / 100.0;
            const double k = shift_schedule(t, shift);
            CHECK(k > prev);
            if (shift >= 1.0) CHECK(k >= t - 1e-15);
            prev = k;
        }
    }
}

TEST_CASE("shift schedule rejects bad domain") {
    CHECK_THROWS_AS(shift_schedule(-0.1, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(shift_schedule(1.1, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(shift_schedule(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("interpolation endpoints are exact") {
    const LatentVideo z0 = make_latent(5, 8, 1);
    const LatentVideo eps = make_latent(5, 8, 2);
    CHECK(interpolate_noise(z0, eps, 0.0).data == z0.data);
    CHECK(interpolate_noise(z0, eps, 1.0).data == eps.data);
}

TEST_CASE("interpolation midpoint on scalar latent") {
    LatentVideo z0 = make_latent(1, 1, 3);
    LatentVideo eps = z0;
    z0.data(0, 0) = 0.0;
    eps.data(0, 0) = 2.0;
    CHECK(interpolate_noise(z0, eps, 0.5).data(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("interpolation is affine per frame against a scalar-loop oracle") {
    const LatentVideo z0 = make_latent(4, 6, 4);
    const LatentVideo eps = make_latent(4, 6, 5);
    NoiseGrid grid(4);
    grid << 0.0, 0.3, 0.8, 1.0;
    const LatentVideo out = interpolate_noise(z0, eps, grid);
    for (Eigen::Index f = 0; f < 4; ++f)
        for (Eigen::Index j = 0; j < 6; ++j)
            CHECK(out.data(f, j) ==
                  doctest::Approx((1 - grid[f]) * z0.data(f, j) + grid[f] * eps.data(f, j))
                      .epsilon(1e-15));
}

TEST_CASE("interpolation rejects shape mismatch") {
    const LatentVideo z0 = make_latent(4, 6, 6);
    const LatentVideo eps = make_latent(3, 6, 7);
    CHECK_THROWS_AS(interpolate_noise(z0, eps, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(interpolate_noise(z0, make_latent(4, 6, 8), NoiseGrid::Constant(3, 0.5)),
                    std::invalid_argument);
}

TEST_CASE("flow target variants") {
    LatentVideo z0 = make_latent(2, 3, 9);
    LatentVideo eps = z0;  // identical => zero target
    for (auto variant : {LossVariant::plain_flow, LossVariant::k_scaled})
        CHECK(flow_target(z0, eps, 0.7, variant).data.cwiseAbs().maxCoeff() == 0.0);

    z0.data.setConstant(1.0);
    eps.data.setConstant(3.0);
    CHECK(flow_target(z0, eps, 0.5, LossVariant::plain_flow).data(0, 0) == doctest::Approx(2.0));
    CHECK(flow_target(z0, eps, 0.5, LossVariant::k_scaled).data(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("loss matches a brute-force scalar oracle") {
    Rng rng(10);
    const LatentVideo z0 = make_latent(3, 5, 11);
    const LatentVideo eps = make_latent(3, 5, 12);
    LatentVideo pred = make_latent(3, 5, 13);
    NoiseGrid grid(3);
    grid << 0.2, 0.5, 0.9;

    for (auto variant : {LossVariant::plain_flow, LossVariant::k_scaled}) {
        double expect = 0.0;
        for (Eigen::Index f = 0; f < 3; ++f)
            for (Eigen::Index j = 0; j < 5; ++j) {
                double target = eps.data(f, j) - z0.data(f, j);
                if (variant == LossVariant::k_scaled) target *= grid[f];
                const double diff = pred.data(f, j) - target;
                expect += diff * diff;
            }
        expect /= 15.0;
        CHECK(flow_matching_loss(pred, z0, eps, grid, variant) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("loss is zero iff prediction equals target, and offset gives c^2") {
    const LatentVideo z0 = make_latent(3, 4, 14);
    const LatentVideo eps = make_latent(3, 4, 15);
    const NoiseGrid grid = NoiseGrid::Constant(3, 0.4);
    LatentVideo pred = flow_target(z0, eps, grid, LossVariant::plain_flow);
    CHECK(flow_matching_loss(pred, z0, eps, grid, LossVariant::plain_flow) == 0.0);

    const double c = 0.37;
    pred.data.array() += c;
    CHECK(flow_matching_loss(pred, z0, eps, grid, LossVariant::plain_flow) ==
          doctest::Approx(c * c).epsilon(1e-12));
}

TEST_CASE("loss is invariant under element permutation") {
    const LatentVideo z0 = make_latent(2, 4, 16);
    const LatentVideo eps = make_latent(2, 4, 17);
    LatentVideo pred = make_latent(2, 4, 18);
    const NoiseGrid grid = NoiseGrid::Constant(2, 0.6);
    const double base = flow_matching_loss(pred, z0, eps, grid, LossVariant::plain_flow);

    // Permute the same two column positions everywhere.
    auto swap_cols = [](LatentVideo& v) { v.data.col(0).swap(v.data.col(3)); };
    LatentVideo z0p = z0, epsp = eps, predp = pred;
    swap_cols(z0p);
    swap_cols(epsp);
    swap_cols(predp);
    CHECK(flow_matching_loss(predp, z0p, epsp, grid, LossVariant::plain_flow) ==
          doctest::Approx(base).epsilon(1e-15));
}

}  // TEST_SUITE
