#include "doctest.h"
#include "stacking_oracle.hpp"

#include "r1oe/towers.hpp"

#include <random>

using namespace r1oe;

TEST_CASE("refine: three copies of a height-5 tower") {
    ParamSeq s = derive_sequences({CutSpacParam::dense(2, {1, 1, 1}), CutSpacParam::dense(3, {1, 2, 0, 1})});
    StageRefinement r = refine(s, 1);
    CHECK(r.h_from == 5);
    CHECK(r.h_to == 19);
    CHECK(r.copy_offsets == std::vector<std::int64_t>{1, 8, 13});
    CHECK(r.spacer_indices == std::vector<std::int64_t>{0, 6, 7, 18});
}

TEST_CASE("refine: odometer and Chacon") {
    ParamSeq odo = derive_sequences(Entries(3, CutSpacParam::dense(2, {0, 0, 0})));
    StageRefinement r = refine(odo, 2);
    CHECK(r.copy_offsets == std::vector<std::int64_t>{0, 4});
    CHECK(r.spacer_indices.empty());
    ParamSeq ch = derive_sequences(Entries(3, CutSpacParam::dense(3, {0, 0, 1, 0})));
    StageRefinement c = refine(ch, 0);
    CHECK(c.copy_offsets == std::vector<std::int64_t>{0, 1, 3});
    CHECK(c.spacer_indices == std::vector<std::int64_t>{2});
}

TEST_CASE("refine agrees with explicit stacking on random steps") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t q = 2 + static_cast<std::int64_t>(rng() % 5);
        std::vector<std::int64_t> sp(q + 1);
        for (auto& v : sp) v = static_cast<std::int64_t>(rng() % 4);
        const std::int64_t h0 = 2 + static_cast<std::int64_t>(rng() % 5);
        ParamSeq s = derive_sequences({CutSpacParam::dense(2, {0, 0, h0 - 2}), CutSpacParam::dense(q, sp)});
        std::vector<std::int64_t> off, spc;
        oracle::layout(h0, sp, off, spc);
        StageRefinement r = refine(s, 1);
        CHECK(r.copy_offsets == off);
        CHECK(r.spacer_indices == spc);
        // Children and parent are mutually inverse; spacers have no parent.
        for (std::int64_t j = 0; j < h0; ++j)
            for (auto k : r.children(j)) CHECK(r.parent(k) == std::optional<std::int64_t>(j));
        for (auto k : spc) CHECK_FALSE(r.parent(k).has_value());
    }
}

TEST_CASE("t_apply") {
    ParamSeq s = derive_sequences(Entries(2, CutSpacParam::dense(3, {0, 0, 1, 0})));
    CHECK(t_apply(s, {1, 0}) == std::optional<LevelRef>(LevelRef{1, 1}));
    CHECK_FALSE(t_apply(s, {1, 3}).has_value());
    CHECK_THROWS_AS(t_apply(s, {1, 4}), std::out_of_range);
}

TEST_CASE("t_apply commutes with refinement inside each copy (Chacon stages 0-3)") {
    ParamSeq s = derive_sequences(Entries(3, CutSpacParam::dense(3, {0, 0, 1, 0})));
    for (std::size_t m = 0; m < 3; ++m) {
        StageRefinement r = refine(s, m);
        for (std::int64_t j = 0; j + 1 < r.h_from; ++j) {
            auto up = t_apply(s, {m, j});
            REQUIRE(up);
            auto kids = r.children(j), kids_up = r.children(up->index);
            for (std::size_t c = 0; c < kids.size(); ++c) {
                auto t = t_apply(s, {m + 1, kids[c]});
                REQUIRE(t);
                CHECK(t->index == kids_up[c]);
            }
        }
    }
}

TEST_CASE("lift") {
    ParamSeq odo = derive_sequences(Entries(3, CutSpacParam::dense(2, {0, 0, 0})));
    CHECK(lift(odo, {1, 0}, 1) == std::vector<LevelRef>{{1, 0}});
    CHECK(lift(odo, {1, 0}, 2) == std::vector<LevelRef>{{2, 0}, {2, 2}});
    ParamSeq ch = derive_sequences(Entries(4, CutSpacParam::dense(3, {0, 0, 1, 0})));
    for (std::int64_t j = 0; j < 4; ++j) CHECK(lift(ch, {1, j}, 4).size() == 27);
}

TEST_CASE("TowerStack ancestors match repeated parents") {
    ParamSeq s = derive_sequences({CutSpacParam::dense(3, {0, 1, 0, 2}), CutSpacParam::dense(2, {1, 0, 1}),
                                   CutSpacParam::dense(3, {0, 0, 2, 0})});
    TowerStack ts(s, 3);
    for (std::int64_t k = 0; k < ts.height(3); ++k) {
        std::int64_t a = k;
        for (std::size_t m = 3; m > 0 && a >= 0; --m) {
            auto p = ts.refinement(m - 1).parent(a);
            a = p ? *p : -1;
            CHECK(ts.ancestor(3, k, m - 1) == a);
        }
    }
}
