#include "vplan/eval.hpp"

#include <map>
#include <stdexcept>

namespace vplan {

std::vector<EvalViolation> validate(const std::vector<Annotation>& annotations) {
    std::vector<EvalViolation> out;
    std::map<std::string, int> gen_count;
    for (const auto& a : annotations) {
        if (a.gen_idx < 1 || a.gen_idx > 4)
            out.push_back({a.prompt_id, a.gen_idx, "gen_idx_range"});
        if (a.levels[2] && !(a.levels[0] && a.levels[1]))
            out.push_back({a.prompt_id, a.gen_idx, "monotonicity:level3"});
        if (a.levels[3] && !a.levels[2])
            out.push_back({a.prompt_id, a.gen_idx, "monotonicity:level4"});
        ++gen_count[a.prompt_id];
    }
    for (const auto& [prompt, count] : gen_count)
        if (count != 4) out.push_back({prompt, count, "generation_count"});
    return out;
}

std::array<LevelStats, 4> aggregate(const std::vector<Annotation>& annotations) {
    if (annotations.empty()) throw std::invalid_argument("aggregate: empty annotation set");

    std::map<std::string, std::array<int, 4>> prompt_hits;
    std::map<std::string, int> gen_count;
    std::array<double, 4> total_true{};
    for (const auto& a : annotations) {
        auto& hits = prompt_hits[a.prompt_id];
        ++gen_count[a.prompt_id];
        for (int l = 0; l < 4; ++l)
            if (a.levels[static_cast<std::size_t>(l)]) {
                total_true[static_cast<std::size_t>(l)] += 1.0;
                ++hits[static_cast<std::size_t>(l)];
            }
    }
    for (const auto& [prompt, count] : gen_count)
        if (count != 4)
            throw std::invalid_argument("aggregate: prompt '" + prompt +
                                        "' does not have exactly 4 generations");

    const double prompts = static_cast<double>(prompt_hits.size());
    std::array<LevelStats, 4> stats;
    for (int l = 0; l < 4; ++l) {
        stats[static_cast<std::size_t>(l)].average_pct =
            100.0 * total_true[static_cast<std::size_t>(l)] / (4.0 * prompts);
        double best = 0.0;
        for (const auto& [prompt, hits] : prompt_hits)
            if (hits[static_cast<std::size_t>(l)] > 0) best += 1.0;
        stats[static_cast<std::size_t>(l)].best_at_4_pct = 100.0 * best / prompts;
    }
    return stats;
}

}  // namespace vplan
