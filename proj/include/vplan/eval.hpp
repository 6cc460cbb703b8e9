#pragma once

#include <array>
#include <string>
#include <vector>

namespace vplan {

// One annotated generation: four monotone criteria levels.
struct Annotation {
    std::string prompt_id;
    int gen_idx = 1;  // 1..4
    std::array<bool, 4> levels{};
};

struct EvalViolation {
    std::string prompt_id;
    int gen_idx = 0;
    std::string rule;
};

// Checks level monotonicity (3 implies 1 and 2, 4 implies 3), gen_idx range,
// and that every prompt carries exactly four generations.
std::vector<EvalViolation> validate(const std::vector<Annotation>& annotations);

struct LevelStats {
    double average_pct = 0.0;
    double best_at_4_pct = 0.0;
};

// Per-level average success rate over all generations and Best@4 over
// prompts. Throws on an empty set or prompts without exactly 4 generations.
std::array<LevelStats, 4> aggregate(const std::vector<Annotation>& annotations);

}  // namespace vplan
