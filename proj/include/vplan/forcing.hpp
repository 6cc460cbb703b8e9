#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "vplan/rng.hpp"
#include "vplan/schedule.hpp"

namespace vplan {

struct ForcingConfig {
    int max_history_latent_frames = 6;
    double clean_history_prob = 0.5;
};

// Two-segment noise assignment: the first history_len latent frames carry
// k_hist, the rest k_future.
struct ForcingPlan {
    int history_len = 0;
    double k_hist = 0.0;
    double k_future = 1.0;
    bool clean_history = false;
};

inline ForcingPlan sample_forcing_plan(Rng& rng, Eigen::Index latent_frames,
                                       const ScheduleConfig& schedule,
                                       const ForcingConfig& forcing = {}) {
    if (latent_frames < 1) throw std::invalid_argument("sample_forcing_plan: latent_frames < 1");
    ForcingPlan plan;
    const int max_hist =
        static_cast<int>(std::min<Eigen::Index>(forcing.max_history_latent_frames, latent_frames - 1));
    plan.history_len = rng.uniform_int(0, max_hist);
    plan.k_hist = shift_schedule(rng.uniform(), schedule.shift);
    plan.k_future = shift_schedule(rng.uniform(), schedule.shift);
    plan.clean_history = rng.bernoulli(forcing.clean_history_prob);
    if (plan.clean_history) plan.k_hist = 0.0;
    return plan;
}

inline NoiseGrid plan_to_grid(const ForcingPlan& plan, Eigen::Index latent_frames) {
    if (plan.history_len > latent_frames)
        throw std::invalid_argument("plan_to_grid: history_len exceeds latent frames");
    NoiseGrid grid(latent_frames);
    grid.head(plan.history_len).setConstant(plan.k_hist);
    grid.tail(latent_frames - plan.history_len).setConstant(plan.k_future);
    return grid;
}

template <class Scalar>
std::pair<LatentVideoT<Scalar>, NoiseGrid> noised_batch(const LatentVideoT<Scalar>& z0,
                                                        const LatentVideoT<Scalar>& eps,
                                                        const ForcingPlan& plan) {
    NoiseGrid grid = plan_to_grid(plan, z0.frames());
    return {interpolate_noise(z0, eps, grid), std::move(grid)};
}

}  // namespace vplan
