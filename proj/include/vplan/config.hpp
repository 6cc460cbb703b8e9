#pragma once

#include <string>

#include "vplan/curation.hpp"
#include "vplan/denoiser.hpp"
#include "vplan/guidance.hpp"
#include "vplan/latent.hpp"
#include "vplan/retarget.hpp"
#include "vplan/synthdata.hpp"

namespace vplan {

// Whole-pipeline configuration: one section per module, flat key=value text.
// Unknown sections or keys are rejected.
struct GlobalConfig {
    std::uint64_t seed = 0;

    PatchSpec patch;
    ScheduleConfig schedule;
    ForcingConfig forcing;
    TrainConfig train;

    // Toy denoiser shape (input_dim derives from data at train time).
    Eigen::Index model_dim = 64;
    Eigen::Index noise_embed_dim = 32;
    Eigen::Index text_dim = 32;
    Eigen::Index max_frames = 16;

    GuidanceConfig guidance;
    RetargetConfig retarget;

    struct CurationSection {
        double flow_fraction = 0.30;
        FlowEstimator flow_estimator = FlowEstimator::block_match;
        double target_fps = 16.0;
        double target_len = 3.0;
        double clip_len = 4.0;
        QualityRules rules;
        MixWeights weights = default_mix_weights();
        WeightSemantics weight_semantics = WeightSemantics::per_clip;
    } curation;

    ToyWorldSpec synthdata;

    void validate() const;
};

GlobalConfig parse_config(const std::string& text);
GlobalConfig load_config(const std::string& path);
std::string default_config_text();

}  // namespace vplan
