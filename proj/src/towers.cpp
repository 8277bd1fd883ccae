#include "r1oe/towers.hpp"

#include <algorithm>
#include <stdexcept>

namespace r1oe {

namespace {

std::int64_t small_height(const ParamSeq& seq, std::size_t m) {
    if (m >= seq.h.size()) throw std::out_of_range("stage out of range");
    if (seq.h[m] > BigInt(static_cast<long>(kMaxEnumeratedHeight)))
        throw std::length_error("tower height too large to enumerate at stage " + std::to_string(m));
    return to_i64(seq.h[m]);
}

}  // namespace

std::vector<std::int64_t> StageRefinement::children(std::int64_t j) const {
    if (j < 0 || j >= h_from) throw std::out_of_range("level index out of range");
    std::vector<std::int64_t> out;
    out.reserve(copy_offsets.size());
    for (auto s : copy_offsets) out.push_back(s + j);
    return out;
}

std::optional<std::int64_t> StageRefinement::parent(std::int64_t k) const {
    if (k < 0 || k >= h_to) throw std::out_of_range("level index out of range");
    auto it = std::upper_bound(copy_offsets.begin(), copy_offsets.end(), k);
    if (it == copy_offsets.begin()) return std::nullopt;
    std::int64_t off = *std::prev(it);
    if (k - off < h_from) return k - off;
    return std::nullopt;
}

StageRefinement refine(const ParamSeq& seq, std::size_t m) {
    if (m >= seq.size()) throw std::out_of_range("stage out of range");
    StageRefinement r;
    r.stage = m;
    r.h_from = small_height(seq, m);
    r.h_to = small_height(seq, m + 1);
    auto sp = seq.entries[m].spacers_i64();
    const std::int64_t q = to_i64(seq.q(m));
    std::int64_t start = sp[0];
    for (std::int64_t i = 0; i < q; ++i) {
        if (i > 0) start += r.h_from + sp[i];
        r.copy_offsets.push_back(start);
    }
    std::int64_t pos = 0;
    for (std::int64_t i = 0; i <= q; ++i) {
        for (std::int64_t s = 0; s < sp[i]; ++s) r.spacer_indices.push_back(pos + s);
        pos += sp[i];
        if (i < q) pos += r.h_from;
    }
    return r;
}

std::optional<LevelRef> t_apply(const ParamSeq& seq, const LevelRef& x) {
    if (x.stage >= seq.h.size()) throw std::out_of_range("stage out of range");
    BigInt h = seq.h[x.stage];
    if (x.index < 0 || BigInt(static_cast<long>(x.index)) >= h) throw std::out_of_range("level index out of range");
    if (BigInt(static_cast<long>(x.index + 1)) == h) return std::nullopt;
    return LevelRef{x.stage, x.index + 1};
}

std::vector<LevelRef> lift(const ParamSeq& seq, const LevelRef& x, std::size_t to_stage) {
    if (to_stage < x.stage || to_stage >= seq.h.size()) throw std::out_of_range("stage out of range");
    std::vector<std::int64_t> cur{x.index};
    if (x.index < 0 || x.index >= small_height(seq, x.stage)) throw std::out_of_range("level index out of range");
    for (std::size_t m = x.stage; m < to_stage; ++m) {
        StageRefinement r = refine(seq, m);
        std::vector<std::int64_t> next;
        next.reserve(cur.size() * r.copy_offsets.size());
        for (auto j : cur)
            for (auto s : r.copy_offsets) next.push_back(s + j);
        cur.swap(next);
    }
    std::sort(cur.begin(), cur.end());
    std::vector<LevelRef> out;
    out.reserve(cur.size());
    for (auto j : cur) out.push_back({to_stage, j});
    return out;
}

TowerStack::TowerStack(const ParamSeq& seq, std::size_t max_stage) : max_stage_(max_stage) {
    if (max_stage > seq.size()) throw std::out_of_range("tower stack deeper than sequence");
    for (std::size_t m = 0; m <= max_stage; ++m) heights_.push_back(small_height(seq, m));
    for (std::size_t m = 0; m < max_stage; ++m) {
        refinements_.push_back(refine(seq, m));
        const auto& r = refinements_.back();
        std::vector<std::int64_t> par(static_cast<std::size_t>(r.h_to), -1);
        std::vector<std::int32_t> cp(static_cast<std::size_t>(r.h_to), -1);
        for (std::size_t i = 0; i < r.copy_offsets.size(); ++i)
            for (std::int64_t j = 0; j < r.h_from; ++j) {
                par[static_cast<std::size_t>(r.copy_offsets[i] + j)] = j;
                cp[static_cast<std::size_t>(r.copy_offsets[i] + j)] = static_cast<std::int32_t>(i);
            }
        parents_.push_back(std::move(par));
        copies_.push_back(std::move(cp));
    }
}

std::int64_t TowerStack::ancestor(std::size_t m, std::int64_t k, std::size_t s) const {
    while (m > s) {
        k = parents_[m - 1][static_cast<std::size_t>(k)];
        if (k < 0) return -1;
        --m;
    }
    return k;
}

}  // namespace r1oe
