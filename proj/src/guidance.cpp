#include "vplan/guidance.hpp"

#include <cmath>
#include <stdexcept>

namespace vplan {

namespace {
constexpr Eigen::Index kMaxContextFrames = 6;
}

void GuidanceConfig::validate() const {
    if (!(w_hist >= 0.0) || !(w_text >= 0.0) || !std::isfinite(w_hist) || !std::isfinite(w_text))
        throw std::invalid_argument("GuidanceConfig: weights must be finite and non-negative");
    if (num_steps < 1) throw std::invalid_argument("GuidanceConfig: num_steps must be >= 1");
    if (!(shift > 0.0)) throw std::invalid_argument("GuidanceConfig: shift must be > 0");
    if (window < 1) throw std::invalid_argument("GuidanceConfig: window must be >= 1");
}

DenoiserFn make_denoiser_fn(const ToyDenoiserParams& params) {
    return [&params](const DenoiserInput& input) { return forward(params, input); };
}

LatentVideo score_variant(const DenoiserFn& denoiser, const SamplerState& state,
                          const Eigen::VectorXd& text, ScoreVariantKind which, Rng& rng) {
    const Eigen::Index m = state.context_frames;
    DenoiserInput input;
    input.z_noisy = state.current;
    input.text_cond = text;
    input.grid = NoiseGrid::Constant(state.current.frames(), state.k_future);
    input.grid.head(m).setZero();
    input.drop_text = false;

    switch (which) {
        case ScoreVariantKind::full:
            break;
        case ScoreVariantKind::no_hist:
            // Mask the context by substituting fresh pure noise at level 1.
            input.grid.head(m).setOnes();
            if (m > 0)
                input.z_noisy.data.topRows(m) =
                    rng.gaussian_matrix<double>(m, state.current.data.cols());
            break;
        case ScoreVariantKind::no_text:
            input.drop_text = true;
            break;
    }
    return denoiser(input);
}

LatentVideo combine(const LatentVideo& full, const LatentVideo& no_hist,
                    const LatentVideo& no_text, const GuidanceConfig& cfg) {
    if (!full.same_shape_as(no_hist) || !full.same_shape_as(no_text))
        throw std::invalid_argument("combine: score shapes mismatch");
    LatentVideo out = full;
    switch (cfg.combine_mode) {
        case CombineMode::literal_eq4:
            out.data = (1.0 + cfg.w_hist) * full.data - cfg.w_hist * no_hist.data +
                       (1.0 + cfg.w_text) * full.data - cfg.w_text * no_text.data;
            break;
        case CombineMode::normalized:
            out.data = full.data + cfg.w_hist * (full.data - no_hist.data) +
                       cfg.w_text * (full.data - no_text.data);
            break;
    }
    return out;
}

LatentVideo sample(const DenoiserFn& denoiser, const LatentVideo& context,
                   const Eigen::VectorXd& text, const GuidanceConfig& cfg, Rng& rng) {
    cfg.validate();
    const Eigen::Index m = context.frames();
    if (m > kMaxContextFrames) throw std::invalid_argument("sample: context longer than 6 latent frames");
    if (m >= cfg.window) throw std::invalid_argument("sample: context must be shorter than window");
    if (context.per_frame() < 1) throw std::invalid_argument("sample: context carries no latent shape");

    SamplerState state;
    state.current = context;
    state.current.data.resize(cfg.window, context.per_frame());
    state.current.pixel_frames = 1 + (cfg.window - 1) * cfg.patch_temporal;
    if (m > 0) state.current.data.topRows(m) = context.data;
    state.current.data.bottomRows(cfg.window - m) =
        rng.gaussian_matrix<double>(cfg.window - m, context.per_frame());
    state.context_frames = m;

    // Shifted noise grid, k descending from 1 to 0.
    Eigen::VectorXd k_grid(cfg.num_steps + 1);
    for (int i = 0; i <= cfg.num_steps; ++i)
        k_grid[i] = shift_schedule(1.0 - static_cast<double>(i) / cfg.num_steps, cfg.shift);

    for (int i = 0; i < cfg.num_steps; ++i) {
        state.step = i;
        state.k_future = k_grid[i];
        const LatentVideo full = score_variant(denoiser, state, text, ScoreVariantKind::full, rng);
        const LatentVideo no_hist =
            score_variant(denoiser, state, text, ScoreVariantKind::no_hist, rng);
        const LatentVideo no_text =
            score_variant(denoiser, state, text, ScoreVariantKind::no_text, rng);
        LatentVideo guided = combine(full, no_hist, no_text, cfg);
        if (cfg.loss_variant == LossVariant::k_scaled) guided.data /= state.k_future;

        state.current.data += (k_grid[i + 1] - k_grid[i]) * guided.data;
        if (m > 0) state.current.data.topRows(m) = context.data;  // clamp clean context
    }
    return state.current;
}

LatentVideo extend(const DenoiserFn& denoiser, const LatentVideo& video, int stages,
                   const std::vector<Eigen::VectorXd>& stage_texts, const GuidanceConfig& cfg,
                   Rng& rng) {
    if (video.frames() < 1) throw std::invalid_argument("extend: need at least one latent frame");
    if (stages < 0) throw std::invalid_argument("extend: negative stage count");
    if (stages > 0 && stage_texts.empty())
        throw std::invalid_argument("extend: no stage captions provided");

    LatentVideo out = video;
    for (int s = 0; s < stages; ++s) {
        const Eigen::Index m =
            std::min({kMaxContextFrames, out.frames(), cfg.window - 1});
        LatentVideo context = out;
        context.data = out.data.bottomRows(m);

        const Eigen::VectorXd& text =
            stage_texts[std::min<std::size_t>(s, stage_texts.size() - 1)];
        const LatentVideo window = sample(denoiser, context, text, cfg, rng);

        const Eigen::Index fresh = window.frames() - m;
        LatentVideo grown = out;
        grown.data.resize(out.frames() + fresh, out.per_frame());
        grown.data.topRows(out.frames()) = out.data;
        grown.data.bottomRows(fresh) = window.data.bottomRows(fresh);
        grown.pixel_frames = 1 + (grown.data.rows() - 1) * cfg.patch_temporal;
        out = std::move(grown);
    }
    return out;
}

}  // namespace vplan
