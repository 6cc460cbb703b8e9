#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vplan/rng.hpp"

namespace vplan {

enum class Source {
    bridge,
    droid,
    language_table,
    agibot_world,
    ego4d,
    epic_kitchens,
    something_something,
    panda70m
};
constexpr int kNumSources = 8;

const char* source_name(Source s);
Source source_from_name(const std::string& name);

struct ClipRecord {
    std::string clip_id;
    Source source = Source::panda70m;
    double fps = 16.0;
    double duration = 0.0;  // seconds
    int resolution = 0;     // min(height, width) pixels
    std::vector<std::string> captions;
    std::optional<double> flow_stat;
    std::optional<bool> embodiment_visible;
    std::optional<bool> success;
    double speed_factor = 1.0;
    std::optional<double> mean_luma;   // [0, 1]
    std::optional<std::string> video_path;
};

struct MixWeights {
    std::array<double, kNumSources> w{};
    void validate() const;
};

// Per-source weights matching the reweighting recipe; indexed by Source.
MixWeights default_mix_weights();

// Grayscale frame sequence (luma), one matrix per frame.
using FrameSeq = std::vector<Eigen::MatrixXd>;

// Nearest-frame temporal resampling: timeline scaled by speed_factor, then
// resampled to target_fps over target_len seconds. Output length is always
// target_len*target_fps + 1 frames; out-of-range times hold the last frame.
FrameSeq resample_clip(const FrameSeq& frames, double src_fps, double speed_factor,
                       double target_fps = 16.0, double target_len = 3.0);

enum class FlowEstimator { frame_diff, block_match };

Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& img, Eigen::Index rows, Eigen::Index cols);

// Spatio-temporal mean motion magnitude, measured at 4 fps on frames resized
// to 256x256. block_match reports mean displacement of best-matching 16x16
// blocks over a +/-8 px search, frame_diff the mean absolute intensity change.
double flow_stat(const FrameSeq& frames, double fps,
                 FlowEstimator estimator = FlowEstimator::block_match);

// Drops the top `fraction` of clips by flow statistic; ties broken by clip_id.
std::vector<ClipRecord> filter_top_flow(std::vector<ClipRecord> clips, double fraction = 0.30);

struct KeywordLists {
    std::vector<std::string> whitelist;  // lowercased tokens or phrases
    std::vector<std::string> blacklist;
};

// True iff the caption contains at least one whitelist entry and no
// blacklist entry. Matching is whole-word; multi-word entries match
// consecutive token runs.
bool keyword_filter(const std::string& caption, const KeywordLists& keywords);

// Contiguous non-overlapping [start, end) second intervals; the remainder
// shorter than clip_len is dropped.
std::vector<std::pair<double, double>> segment_clips(double duration, double clip_len = 4.0);

struct QualityRules {
    int min_resolution = 0;
    double min_duration = 0.0;
    double max_duration = 1e9;
    std::optional<std::pair<double, double>> luma_range;
    bool require_embodiment = true;
    bool require_success = true;  // reject success == false
};

struct QualityVerdict {
    bool accepted = true;
    std::string reason;  // failing rule name when rejected
};

QualityVerdict quality_filter(const ClipRecord& clip, const QualityRules& rules);

// Annotation provider seam for externally computed columns; the echo stub
// returns the record unchanged.
class AnnotationProvider {
public:
    virtual ~AnnotationProvider() = default;
    virtual ClipRecord annotate(const ClipRecord& clip) const = 0;
};

class EchoAnnotationProvider final : public AnnotationProvider {
public:
    ClipRecord annotate(const ClipRecord& clip) const override { return clip; }
};

enum class WeightSemantics { per_clip, per_source };

// Weighted source mixing. per_clip makes P(source i) proportional to
// w_i * |D_i| (each clip carries the source weight); per_source makes it
// proportional to w_i alone. Within a source clips are uniform.
class WeightedSampler {
public:
    WeightedSampler(std::vector<std::vector<ClipRecord>> sources, const MixWeights& weights,
                    WeightSemantics semantics = WeightSemantics::per_clip);

    const ClipRecord& draw(Rng& rng) const;
    // Normalized probability of each source under the configured semantics.
    std::array<double, kNumSources> mixture() const;

private:
    std::vector<std::vector<ClipRecord>> sources_;
    std::array<double, kNumSources> cumulative_{};
    std::array<double, kNumSources> share_{};
};

}  // namespace vplan
