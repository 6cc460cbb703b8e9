#include "vplan/curation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vplan {

namespace {
const char* kSourceNames[kNumSources] = {"bridge",        "droid",
                                         "language_table", "agibot_world",
                                         "ego4d",          "epic_kitchens",
                                         "something_something", "panda70m"};
}

const char* source_name(Source s) { return kSourceNames[static_cast<int>(s)]; }

Source source_from_name(const std::string& name) {
    for (int i = 0; i < kNumSources; ++i)
        if (name == kSourceNames[i]) return static_cast<Source>(i);
    throw std::invalid_argument("unknown dataset source: " + name);
}

void MixWeights::validate() const {
    bool any = false;
    for (double x : w) {
        if (x < 0 || !std::isfinite(x)) throw std::invalid_argument("MixWeights: negative weight");
        any = any || x > 0;
    }
    if (!any) throw std::invalid_argument("MixWeights: all weights zero");
}

MixWeights default_mix_weights() {
    MixWeights m;
    m.w[static_cast<int>(Source::agibot_world)] = 0.375;
    m.w[static_cast<int>(Source::droid)] = 0.75;
    m.w[static_cast<int>(Source::ego4d)] = 1.5;
    m.w[static_cast<int>(Source::panda70m)] = 0.5;
    m.w[static_cast<int>(Source::something_something)] = 0.5;
    m.w[static_cast<int>(Source::bridge)] = 1.0;
    m.w[static_cast<int>(Source::epic_kitchens)] = 2.0;
    m.w[static_cast<int>(Source::language_table)] = 0.05;
    return m;
}

FrameSeq resample_clip(const FrameSeq& frames, double src_fps, double speed_factor,
                       double target_fps, double target_len) {
    if (frames.empty()) throw std::invalid_argument("resample_clip: empty clip");
    if (!(speed_factor > 0)) throw std::invalid_argument("resample_clip: speed_factor must be > 0");
    if (!(src_fps > 0) || !(target_fps > 0))
        throw std::invalid_argument("resample_clip: frame rates must be positive");

    const Eigen::Index out_frames = static_cast<Eigen::Index>(std::lround(target_len * target_fps)) + 1;
    const Eigen::Index n = static_cast<Eigen::Index>(frames.size());
    FrameSeq out;
    out.reserve(static_cast<std::size_t>(out_frames));
    for (Eigen::Index i = 0; i < out_frames; ++i) {
        const double t_src = static_cast<double>(i) / target_fps * speed_factor;
        const Eigen::Index idx =
            std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::lround(t_src * src_fps)), 0, n - 1);
        out.push_back(frames[static_cast<std::size_t>(idx)]);
    }
    return out;
}

Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& img, Eigen::Index rows, Eigen::Index cols) {
    if (img.rows() == rows && img.cols() == cols) return img;
    Eigen::MatrixXd out(rows, cols);
    const double sy = rows > 1 ? static_cast<double>(img.rows() - 1) / (rows - 1) : 0.0;
    const double sx = cols > 1 ? static_cast<double>(img.cols() - 1) / (cols - 1) : 0.0;
    for (Eigen::Index y = 0; y < rows; ++y) {
        const double fy = y * sy;
        const Eigen::Index y0 = static_cast<Eigen::Index>(fy);
        const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, img.rows() - 1);
        const double wy = fy - y0;
        for (Eigen::Index x = 0; x < cols; ++x) {
            const double fx = x * sx;
            const Eigen::Index x0 = static_cast<Eigen::Index>(fx);
            const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, img.cols() - 1);
            const double wx = fx - x0;
            out(y, x) = (1 - wy) * ((1 - wx) * img(y0, x0) + wx * img(y0, x1)) +
                        wy * ((1 - wx) * img(y1, x0) + wx * img(y1, x1));
        }
    }
    return out;
}

namespace {

constexpr Eigen::Index kFlowSize = 256;
constexpr Eigen::Index kBlockSize = 16;
constexpr Eigen::Index kSearchRadius = 8;

double block_match_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double total = 0.0;
    Eigen::Index blocks = 0;
    for (Eigen::Index by = 0; by + kBlockSize <= a.rows(); by += kBlockSize) {
        for (Eigen::Index bx = 0; bx + kBlockSize <= a.cols(); bx += kBlockSize) {
            const auto ref = a.block(by, bx, kBlockSize, kBlockSize);
            double best_sad = std::numeric_limits<double>::infinity();
            double best_norm2 = 0.0;
            for (Eigen::Index dy = -kSearchRadius; dy <= kSearchRadius; ++dy) {
                for (Eigen::Index dx = -kSearchRadius; dx <= kSearchRadius; ++dx) {
                    const Eigen::Index y = by + dy, x = bx + dx;
                    if (y < 0 || x < 0 || y + kBlockSize > b.rows() || x + kBlockSize > b.cols())
                        continue;
                    const double sad =
                        (b.block(y, x, kBlockSize, kBlockSize) - ref).cwiseAbs().sum();
                    const double norm2 = static_cast<double>(dy * dy + dx * dx);
                    // Prefer the smallest displacement on ties so a static
                    // scene reports zero motion.
                    if (sad < best_sad - 1e-12 ||
                        (std::abs(sad - best_sad) <= 1e-12 && norm2 < best_norm2)) {
                        best_sad = sad;
                        best_norm2 = norm2;
                    }
                }
            }
            total += std::sqrt(best_norm2);
            ++blocks;
        }
    }
    return blocks > 0 ? total / static_cast<double>(blocks) : 0.0;
}

}  // namespace

double flow_stat(const FrameSeq& frames, double fps, FlowEstimator estimator) {
    if (!(fps > 0)) throw std::invalid_argument("flow_stat: fps must be positive");
    const Eigen::Index stride = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::lround(fps / 4.0)));

    FrameSeq sub;
    for (std::size_t i = 0; i < frames.size(); i += static_cast<std::size_t>(stride))
        sub.push_back(resize_bilinear(frames[i], kFlowSize, kFlowSize));
    if (sub.size() < 2)
        throw std::invalid_argument("flow_stat: fewer than two frames after 4 fps subsampling");

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < sub.size(); ++i) {
        if (estimator == FlowEstimator::frame_diff)
            total += (sub[i + 1] - sub[i]).cwiseAbs().mean();
        else
            total += block_match_pair(sub[i], sub[i + 1]);
    }
    return total / static_cast<double>(sub.size() - 1);
}

std::vector<ClipRecord> filter_top_flow(std::vector<ClipRecord> clips, double fraction) {
    if (fraction < 0 || fraction > 1) throw std::invalid_argument("filter_top_flow: bad fraction");
    for (const auto& c : clips)
        if (!c.flow_stat)
            throw std::invalid_argument("filter_top_flow: clip '" + c.clip_id + "' has no flow_stat");

    const std::size_t keep =
        static_cast<std::size_t>(std::ceil((1.0 - fraction) * static_cast<double>(clips.size())));
    std::sort(clips.begin(), clips.end(), [](const ClipRecord& a, const ClipRecord& b) {
        if (*a.flow_stat != *b.flow_stat) return *a.flow_stat < *b.flow_stat;
        return a.clip_id < b.clip_id;
    });
    clips.resize(std::min(keep, clips.size()));
    return clips;
}

namespace {

std::vector<std::string> tokenize_folded(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

bool contains_phrase(const std::vector<std::string>& tokens, const std::string& phrase) {
    const std::vector<std::string> needle = tokenize_folded(phrase);
    if (needle.empty() || needle.size() > tokens.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < needle.size(); ++j)
            if (tokens[i + j] != needle[j]) {
                match = false;
                break;
            }
        if (match) return true;
    }
    return false;
}

}  // namespace

bool keyword_filter(const std::string& caption, const KeywordLists& keywords) {
    const std::vector<std::string> tokens = tokenize_folded(caption);
    bool whitelisted = false;
    for (const auto& kw : keywords.whitelist)
        if (contains_phrase(tokens, kw)) {
            whitelisted = true;
            break;
        }
    if (!whitelisted) return false;
    for (const auto& kw : keywords.blacklist)
        if (contains_phrase(tokens, kw)) return false;
    return true;
}

std::vector<std::pair<double, double>> segment_clips(double duration, double clip_len) {
    if (!(clip_len > 0)) throw std::invalid_argument("segment_clips: clip_len must be positive");
    std::vector<std::pair<double, double>> out;
    const int count = static_cast<int>(std::floor(duration / clip_len + 1e-9));
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) out.emplace_back(i * clip_len, (i + 1) * clip_len);
    return out;
}

QualityVerdict quality_filter(const ClipRecord& clip, const QualityRules& rules) {
    if (clip.resolution < rules.min_resolution) return {false, "resolution"};
    if (clip.duration < rules.min_duration || clip.duration > rules.max_duration)
        return {false, "duration"};
    if (rules.luma_range) {
        if (!clip.mean_luma) return {false, "missing_annotation:mean_luma"};
        if (*clip.mean_luma < rules.luma_range->first || *clip.mean_luma > rules.luma_range->second)
            return {false, "luma"};
    }
    if (rules.require_embodiment) {
        if (!clip.embodiment_visible) return {false, "missing_annotation:embodiment_visible"};
        if (!*clip.embodiment_visible) return {false, "embodiment"};
    }
    if (rules.require_success && clip.success && !*clip.success) return {false, "expert_motion"};
    return {true, ""};
}

WeightedSampler::WeightedSampler(std::vector<std::vector<ClipRecord>> sources,
                                 const MixWeights& weights, WeightSemantics semantics)
    : sources_(std::move(sources)) {
    weights.validate();
    if (sources_.size() != kNumSources)
        throw std::invalid_argument("WeightedSampler: expected one clip list per source");

    double total = 0.0;
    for (int i = 0; i < kNumSources; ++i) {
        const double size = static_cast<double>(sources_[static_cast<std::size_t>(i)].size());
        const double mass =
            semantics == WeightSemantics::per_clip ? weights.w[static_cast<std::size_t>(i)] * size
            : sources_[static_cast<std::size_t>(i)].empty() ? 0.0
                                                            : weights.w[static_cast<std::size_t>(i)];
        share_[static_cast<std::size_t>(i)] = mass;
        total += mass;
    }
    if (total <= 0)
        throw std::invalid_argument("WeightedSampler: no clips under non-zero weights");

    double acc = 0.0;
    for (int i = 0; i < kNumSources; ++i) {
        share_[static_cast<std::size_t>(i)] /= total;
        acc += share_[static_cast<std::size_t>(i)];
        cumulative_[static_cast<std::size_t>(i)] = acc;
    }
    cumulative_[kNumSources - 1] = 1.0;
}

const ClipRecord& WeightedSampler::draw(Rng& rng) const {
    const double u = rng.uniform();
    int src = 0;
    while (src < kNumSources - 1 && u >= cumulative_[static_cast<std::size_t>(src)]) ++src;
    if (sources_[static_cast<std::size_t>(src)].empty()) {
        // Measure-zero boundary hit on an empty source: take the next
        // non-empty one in cyclic order.
        for (int k = 1; k <= kNumSources; ++k) {
            const int cand = (src + k) % kNumSources;
            if (!sources_[static_cast<std::size_t>(cand)].empty()) {
                src = cand;
                break;
            }
        }
    }
    const auto& list = sources_[static_cast<std::size_t>(src)];
    return list[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(list.size()) - 1))];
}

std::array<double, kNumSources> WeightedSampler::mixture() const { return share_; }

}  // namespace vplan
