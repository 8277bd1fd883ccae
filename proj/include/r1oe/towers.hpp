#pragma once

#include "r1oe/params.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace r1oe {

struct LevelRef {
    std::size_t stage = 0;
    std::int64_t index = 0;
    bool operator==(const LevelRef& o) const { return stage == o.stage && index == o.index; }
    bool operator<(const LevelRef& o) const {
        return stage != o.stage ? stage < o.stage : index < o.index;
    }
};

// Stacking of R_m into R_{m+1}: copy i of R_m starts at copy_offsets[i].
struct StageRefinement {
    std::size_t stage = 0;
    std::int64_t h_from = 0;
    std::int64_t h_to = 0;
    std::vector<std::int64_t> copy_offsets;
    std::vector<std::int64_t> spacer_indices;

    std::vector<std::int64_t> children(std::int64_t j) const;
    // Stage-m level under stage-(m+1) level k, or nullopt for a spacer.
    std::optional<std::int64_t> parent(std::int64_t k) const;
};

// Enumerative towers need every h_m to fit comfortably in memory.
inline constexpr std::int64_t kMaxEnumeratedHeight = 50000000;

StageRefinement refine(const ParamSeq& seq, std::size_t m);

// j -> j+1 inside R_m; nullopt at the roof (resolution at stage m exhausted).
std::optional<LevelRef> t_apply(const ParamSeq& seq, const LevelRef& x);

std::vector<LevelRef> lift(const ParamSeq& seq, const LevelRef& x, std::size_t to_stage);

// Cached refinements plus per-level parent arrays for stages 0..M.
class TowerStack {
public:
    TowerStack(const ParamSeq& seq, std::size_t max_stage);

    std::size_t max_stage() const { return max_stage_; }
    std::int64_t height(std::size_t m) const { return heights_.at(m); }
    const StageRefinement& refinement(std::size_t m) const { return refinements_.at(m); }
    // parent index at stage m-1 of level k at stage m, or -1 for a spacer.
    std::int64_t parent(std::size_t m, std::int64_t k) const { return parents_.at(m - 1)[k]; }
    // Copy number of level k at stage m inside R_{m-1}, or -1 for a spacer.
    std::int64_t copy_of(std::size_t m, std::int64_t k) const { return copies_.at(m - 1)[k]; }
    // Stage-s ancestor of stage-m level k (s <= m), or -1 if k sits in a spacer added after s.
    std::int64_t ancestor(std::size_t m, std::int64_t k, std::size_t s) const;

private:
    std::size_t max_stage_;
    std::vector<std::int64_t> heights_;
    std::vector<StageRefinement> refinements_;
    std::vector<std::vector<std::int64_t>> parents_;
    std::vector<std::vector<std::int32_t>> copies_;
};

}  // namespace r1oe
