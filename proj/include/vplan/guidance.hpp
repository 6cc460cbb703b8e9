#pragma once

#include <functional>
#include <vector>

#include "vplan/denoiser.hpp"
#include "vplan/latent.hpp"
#include "vplan/rng.hpp"
#include "vplan/schedule.hpp"

namespace vplan {

enum class CombineMode { literal_eq4, normalized };

struct GuidanceConfig {
    double w_hist = 2.0;
    double w_text = 5.0;
    CombineMode combine_mode = CombineMode::normalized;
    int num_steps = 16;
    double shift = 3.0;
    Eigen::Index window = 13;  // latent frames per sampled window
    Eigen::Index patch_temporal = 4;  // pixel frames per latent frame in outputs
    LossVariant loss_variant = LossVariant::plain_flow;

    void validate() const;
};

// Any flow estimator with the denoiser input contract. The toy model is one
// instance; tests plug in closed-form oracles.
using DenoiserFn = std::function<LatentVideo(const DenoiserInput&)>;

DenoiserFn make_denoiser_fn(const ToyDenoiserParams& params);

enum class ScoreVariantKind { full, no_hist, no_text };

struct SamplerState {
    LatentVideo current;          // context rows already imposed clean
    Eigen::Index context_frames = 0;
    double k_future = 1.0;        // noise level of the frames being denoised
    int step = 0;
};

// One conditional flow evaluation. `full` keeps context at level 0 with text;
// `no_hist` swaps the context rows for fresh unit noise at level 1;
// `no_text` keeps context but drops the caption.
LatentVideo score_variant(const DenoiserFn& denoiser, const SamplerState& state,
                          const Eigen::VectorXd& text, ScoreVariantKind which, Rng& rng);

LatentVideo combine(const LatentVideo& full, const LatentVideo& no_hist,
                    const LatentVideo& no_text, const GuidanceConfig& cfg);

// Euler integration of the guided flow over the shifted noise grid from k=1
// down to k=0, with 0..6 clean context frames clamped at every step. The
// context tensor also carries the latent shape when it has zero frames.
LatentVideo sample(const DenoiserFn& denoiser, const LatentVideo& context,
                   const Eigen::VectorXd& text, const GuidanceConfig& cfg, Rng& rng);

// Iterative video extension: each stage conditions on the last
// min(6, length) latent frames and appends the freshly generated suffix.
LatentVideo extend(const DenoiserFn& denoiser, const LatentVideo& video, int stages,
                   const std::vector<Eigen::VectorXd>& stage_texts, const GuidanceConfig& cfg,
                   Rng& rng);

}  // namespace vplan
