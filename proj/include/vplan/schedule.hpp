#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "vplan/latent.hpp"

namespace vplan {

enum class LossVariant { plain_flow, k_scaled };

struct ScheduleConfig {
    double shift = 3.0;
    int num_steps = 16;
    LossVariant loss_variant = LossVariant::plain_flow;
};

// Per-latent-frame noise levels, each in [0, 1].
using NoiseGrid = Eigen::VectorXd;

// Time-warp that emphasizes higher noise levels: k = s*t / (1 + (s-1)*t).
// Identity at s = 1, strictly monotone and bijective on [0,1] for s > 0.
inline double shift_schedule(double t, double shift) {
    if (!(shift > 0.0)) throw std::invalid_argument("shift_schedule: shift must be > 0");
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("shift_schedule: t outside [0,1]");
    return shift * t / (1.0 + (shift - 1.0) * t);
}

namespace detail {
inline void check_noise_level(double k) {
    if (k < 0.0 || k > 1.0) throw std::invalid_argument("noise level outside [0,1]");
}
template <class Scalar>
void check_same_shape(const LatentVideoT<Scalar>& a, const LatentVideoT<Scalar>& b,
                      const char* who) {
    if (!a.same_shape_as(b)) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}
template <class Scalar>
void check_grid(const LatentVideoT<Scalar>& z, const NoiseGrid& grid, const char* who) {
    if (grid.size() != z.frames())
        throw std::invalid_argument(std::string(who) + ": grid length != latent frames");
    for (Eigen::Index i = 0; i < grid.size(); ++i) check_noise_level(grid[i]);
}
}  // namespace detail

// z_k = (1-k) z0 + k eps, broadcast per frame. The k = 0 and k = 1 rows are
// copied verbatim so the endpoints are bit-exact.
template <class Scalar>
LatentVideoT<Scalar> interpolate_noise(const LatentVideoT<Scalar>& z0,
                                       const LatentVideoT<Scalar>& eps, const NoiseGrid& grid) {
    detail::check_same_shape(z0, eps, "interpolate_noise");
    detail::check_grid(z0, grid, "interpolate_noise");
    LatentVideoT<Scalar> out = z0;
    for (Eigen::Index f = 0; f < z0.frames(); ++f) {
        const double k = grid[f];
        if (k == 0.0) {
            out.data.row(f) = z0.data.row(f);
        } else if (k == 1.0) {
            out.data.row(f) = eps.data.row(f);
        } else {
            out.data.row(f) = (Scalar(1) - Scalar(k)) * z0.data.row(f) + Scalar(k) * eps.data.row(f);
        }
    }
    return out;
}

template <class Scalar>
LatentVideoT<Scalar> interpolate_noise(const LatentVideoT<Scalar>& z0,
                                       const LatentVideoT<Scalar>& eps, double k) {
    detail::check_noise_level(k);
    return interpolate_noise(z0, eps, NoiseGrid::Constant(z0.frames(), k));
}

// Regression target for the denoiser: eps - z0, optionally scaled by the
// per-frame noise level.
template <class Scalar>
LatentVideoT<Scalar> flow_target(const LatentVideoT<Scalar>& z0, const LatentVideoT<Scalar>& eps,
                                 const NoiseGrid& grid, LossVariant variant) {
    detail::check_same_shape(z0, eps, "flow_target");
    detail::check_grid(z0, grid, "flow_target");
    LatentVideoT<Scalar> out = z0;
    out.data = eps.data - z0.data;
    if (variant == LossVariant::k_scaled)
        for (Eigen::Index f = 0; f < out.frames(); ++f) out.data.row(f) *= Scalar(grid[f]);
    return out;
}

template <class Scalar>
LatentVideoT<Scalar> flow_target(const LatentVideoT<Scalar>& z0, const LatentVideoT<Scalar>& eps,
                                 double k, LossVariant variant) {
    detail::check_noise_level(k);
    return flow_target(z0, eps, NoiseGrid::Constant(z0.frames(), k), variant);
}

// Mean squared error between the prediction and the flow target.
template <class Scalar>
double flow_matching_loss(const LatentVideoT<Scalar>& pred, const LatentVideoT<Scalar>& z0,
                          const LatentVideoT<Scalar>& eps, const NoiseGrid& grid,
                          LossVariant variant) {
    detail::check_same_shape(pred, z0, "flow_matching_loss");
    const LatentVideoT<Scalar> target = flow_target(z0, eps, grid, variant);
    const double numel = static_cast<double>(pred.data.size());
    return (pred.data - target.data).squaredNorm() / numel;
}

}  // namespace vplan
