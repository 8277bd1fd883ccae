#include "doctest.h"
#include "families.hpp"
#include "oracles.hpp"

#include "r1oe/oe_engine.hpp"

#include <cstdlib>
#include <random>

using namespace r1oe;

namespace {

std::vector<BigInt> primes_of(std::initializer_list<long> ps, std::size_t count) {
    std::vector<BigInt> v;
    for (long p : ps) v.emplace_back(p);
    return extend_primes(v, count);
}

Entries random_entries(std::mt19937_64& rng, std::size_t steps) {
    Entries e;
    for (std::size_t k = 0; k < steps; ++k) {
        std::int64_t q = 3 + static_cast<std::int64_t>(rng() % 5);
        std::vector<std::int64_t> sp(q + 1);
        for (auto& s : sp) s = static_cast<std::int64_t>(rng() % 3);
        e.push_back(CutSpacParam::dense(q, sp));
    }
    return e;
}

}  // namespace

TEST_CASE("default primes follow the ruler sequence") {
    std::vector<BigInt> p = default_primes(8);
    CHECK(p == std::vector<BigInt>{2, 3, 2, 5, 2, 3, 2, 7});
    CHECK(extend_primes({BigInt(3), BigInt(5)}, 5) == std::vector<BigInt>{3, 5, 3, 5, 3});
}

TEST_CASE("recurrence: small hand-computed cases") {
    SUBCASE("q = (5, 8), p_0 = 2 gives q'_0 = 4, r_{1,2} = 8, t_{1,2} = 1") {
        ParamSeq s = derive_sequences({CutSpacParam::dense(5, {0, 0, 0, 0, 0, 0}),
                                       CutSpacParam::dense(8, std::vector<std::int64_t>(9, 0))});
        RecurrenceTables tab(s, primes_of({2, 3}, 3), 1, 2);
        CHECK(tab.r(1, 1) == 5);
        CHECK(tab.qprime(0) == 4);
        CHECK(tab.t(1, 1) == 1);
        CHECK(tab.r(1, 2) == 8);
        CHECK(tab.t(1, 2) == 1);
        Engine e(s, primes_of({2, 3}, 3), 1, 2);
        CHECK(e.qprime(0) == 4);
        CHECK(e.r(1, 2) == 8);
        CHECK(e.t(1, 2) == 1);
    }
    SUBCASE("odometer q = 4, p = (2, 3)") {
        ParamSeq s = derive_sequences(Entries(2, CutSpacParam::dense(4, {0, 0, 0, 0, 0})));
        RecurrenceTables tab(s, primes_of({2, 3}, 3), 1, 2);
        CHECK(tab.qprime(0) == 2);
        CHECK(tab.r(1, 2) == 8);
        CHECK(tab.t(1, 2) == 3);
    }
    SUBCASE("t_{0,m} = sigma_{m-1}") {
        ParamSeq s = derive_sequences(Entries(4, fam::chacon_step()));
        RecurrenceTables tab(s, default_primes(5), 1, 4);
        for (std::size_t m = 1; m <= 4; ++m) CHECK(tab.t(0, m) == s.sigma[m - 1]);
        CHECK(tab.stage_one_divergence());  // sigma_0 = 1
    }
}

TEST_CASE("recurrence: diagonal t_{n,n} = 1 and p_n | q'_n") {
    for (const auto& f : fam::oracle_families()) {
        CAPTURE(f.name);
        RecurrenceTables tab(f.seq, f.primes, f.N, f.M);
        for (std::size_t n = 1; n <= f.N; ++n) {
            CHECK(tab.t(n, n) == 1);
            CHECK(tab.qprime(n - 1) % tab.prime(n - 1) == 0);
            CHECK(tab.hprime(n) == tab.hprime(n - 1) * tab.qprime(n - 1));
            CHECK(tab.Hprime(n) == tab.Hprime(n - 1) + tab.hprime(n));
        }
        CHECK(universality_check(tab).divisible);
    }
}

TEST_CASE("recurrence: grow keeps earlier cells") {
    fam::Family f = fam::chacon();
    RecurrenceTables small(f.seq, f.primes, 2, 3);
    RecurrenceTables big(f.seq, f.primes, 3, 6);
    small.grow(f.seq, 3, 6);
    for (std::size_t n = 1; n <= 3; ++n)
        for (std::size_t m = n; m <= 6; ++m) CHECK(small.r(n, m) == big.r(n, m));
}

TEST_CASE("ill-posed parameters raise IllPosed naming criterion 1") {
    SUBCASE("q_0 = p_0") {
        ParamSeq s = derive_sequences(Entries(2, CutSpacParam::dense(2, {0, 0, 0})));
        try {
            RecurrenceTables tab(s, primes_of({2}, 3), 1, 2);
            FAIL("expected IllPosed");
        } catch (const IllPosed& e) {
            CHECK(e.n == 1);
            CHECK(e.m == 1);
            REQUIRE(e.crit1_violation.has_value());
            CHECK(*e.crit1_violation == 0);
        }
        CHECK_THROWS_AS(Engine(s, primes_of({2}, 3), 1, 2), IllPosed);
    }
    SUBCASE("non-prime schedule") {
        ParamSeq s = derive_sequences(Entries(2, fam::chacon_step()));
        CHECK_THROWS_AS(RecurrenceTables(s, primes_of({4}, 3), 1, 2), std::invalid_argument);
    }
}

TEST_CASE("analytic and enumerative backends agree on random families") {
    std::mt19937_64 rng(11);
    int compared = 0;
    for (int trial = 0; trial < 40; ++trial) {
        Entries e = random_entries(rng, 4);
        ParamSeq s = derive_sequences(e);
        std::vector<BigInt> primes = default_primes(5);
        std::optional<RecurrenceTables> tab;
        std::optional<std::pair<std::size_t, std::size_t>> analytic_fail, enum_fail;
        try {
            tab.emplace(s, primes, 3, 4);
        } catch (const IllPosed& x) {
            analytic_fail = {x.n, x.m};
        }
        try {
            Engine eng(s, primes, 3, 4);
            REQUIRE(tab.has_value());
            for (std::size_t n = 1; n <= 3; ++n) {
                CHECK(tab->qprime(n - 1) == eng.qprime(n - 1));
                CHECK(tab->hprime(n) == eng.hprime(n));
                CHECK(tab->Hprime(n) == eng.Hprime(n));
                for (std::size_t m = n; m <= 4; ++m) {
                    CHECK(tab->r(n, m) == eng.r(n, m));
                    CHECK(tab->t(n, m) == eng.t(n, m));
                }
            }
            ++compared;
        } catch (const IllPosed& x) {
            enum_fail = {x.n, x.m};
        }
        CHECK(analytic_fail == enum_fail);
    }
    CHECK(compared >= 10);
}

TEST_CASE("bricks: r = |W|, the groups tile q' t bricks") {
    for (const auto& f : fam::oracle_families()) {
        CAPTURE(f.name);
        Engine e(f.seq, f.primes, f.N, f.M);
        for (std::size_t n = 1; n <= f.N; ++n)
            for (std::size_t m = n; m <= f.M; ++m) {
                const BrickEntry& b = e.entry(n, m);
                CHECK(static_cast<std::int64_t>(b.W.size()) == b.r);
                CHECK(b.qprime * b.t <= b.r);
                CHECK(b.r - b.qprime * b.t <= b.qprime);
                CHECK(std::is_sorted(b.W.begin(), b.W.end()));
                CHECK(static_cast<std::int64_t>(b.deltas.size()) == (b.qprime - 1) * b.t);
            }
    }
}

TEST_CASE("zeta on step (1,1) shifts by one level") {
    for (const auto& f : fam::oracle_families()) {
        CAPTURE(f.name);
        Engine e(f.seq, f.primes, f.N, f.M);
        for (std::int64_t d : e.entry(1, 1).deltas) CHECK(d == 1);
    }
}

TEST_CASE("S: cocycle 1 on D_1(1) and S^-1 inverts S") {
    fam::Family f = fam::chacon();
    Engine e(f.seq, f.primes, f.N, f.M);
    std::int64_t in_d11 = 0;
    for (std::int64_t x = 0; x < e.hF(); ++x) {
        SResult s = e.s_apply(x);
        if (!s.resolved) continue;
        if (s.n == 1 && s.m == 1) {
            CHECK(s.c == 1);
            ++in_d11;
        }
        SResult back = e.s_inverse(s.image);
        REQUIRE(back.resolved);
        CHECK(back.image == x);
        CHECK(back.c == -s.c);
    }
    CHECK(in_d11 > 0);
}

TEST_CASE("digit ascent equals iterated S on R'_n") {
    for (const auto& f : fam::oracle_families()) {
        CAPTURE(f.name);
        Engine e(f.seq, f.primes, f.N, f.M);
        for (std::size_t n = 1; n <= f.N; ++n) {
            std::int64_t bases = 0;
            for (std::int64_t x = 0; x < e.hF(); ++x) {
                auto pos = e.position(x, n);
                if (!pos || *pos != 0) continue;
                ++bases;
                std::int64_t cur = x;
                for (std::int64_t i = 1; i < e.hprime(n); ++i) {
                    SResult s = e.s_apply(cur);
                    REQUIRE(s.resolved);
                    cur = s.image;
                    auto up = e.ascend(x, i, n);
                    REQUIRE(up.has_value());
                    CHECK(*up == cur);
                    CHECK(e.position(cur, n) == i);
                }
                if (bases > 200) break;
            }
            CHECK(bases > 0);
        }
    }
}

TEST_CASE("E_{n,m} grows in m and shrinks in n") {
    for (const auto& f : fam::oracle_families()) {
        CAPTURE(f.name);
        Engine e(f.seq, f.primes, f.N, f.M);
        for (std::int64_t x = 0; x < e.hF(); ++x)
            for (std::size_t n = 1; n <= f.N; ++n)
                for (std::size_t m = n; m <= f.M; ++m) {
                    if (!e.in_E(x, n, m)) continue;
                    if (m < f.M) CHECK(e.in_E(x, n, m + 1));
                    if (n > 1) CHECK(e.in_E(x, n - 1, m));
                }
    }
}

TEST_CASE("E reports, K two ways and partition checks") {
    for (const auto& f : fam::oracle_families()) {
        CAPTURE(f.name);
        Engine e(f.seq, f.primes, f.N, f.M);
        for (std::size_t n = 1; n <= f.N; ++n) {
            for (std::size_t m = n; m <= f.M; ++m) {
                EReport r = e.E_report(n, m);
                CHECK(r.ok());
                CHECK(r.uncovered == oracle::uncovered_levels(e, n, m));
            }
            KReport k = e.build_K(n);
            CHECK(k.two_ways_agree);
            CHECK(k.ok());
            PartitionReport p = e.partition_check(n);
            CHECK(p.ok());
            CHECK(p.disjoint == oracle::levels_disjoint(e, n));
            CHECK(p.coverage_all <= 1);
            CHECK(p.coverage_bricked >= p.coverage_all);
        }
    }
}

TEST_CASE("orbit on K_n: S^k y = T^{-1} y within 4 (h_{n-1} + Z_{n-1}) h'_{n-1}^2") {
    for (const auto& f : fam::oracle_families()) {
        CAPTURE(f.name);
        Engine e(f.seq, f.primes, f.N, f.M);
        for (std::size_t n = 1; n <= f.N; ++n) {
            OrbitReport r = e.verify_orbit_on_K(n);
            CHECK(r.ok());
            CHECK(r.points > 0);
            CHECK(r.max_abs_k <= r.bound);
        }
    }
}

TEST_CASE("orbit: constructive exponent agrees with the scan oracle") {
    fam::Family f = fam::chacon();
    Engine e(f.seq, f.primes, f.N, f.M);
    std::size_t n = 2;
    KReport k = e.build_K(n);
    std::int64_t B = 4 * (e.h(n - 1) + e.Z(n - 1)) * e.hprime(n - 1) * e.hprime(n - 1);
    int checked = 0;
    for (std::int64_t lvl : k.levels) {
        for (std::int64_t y = 0; y < e.hF() && checked < 300; ++y) {
            if (e.towers().ancestor(e.M(), y, n) != lvl) continue;
            OrbitStep s = e.orbit_step(y, n, B);
            std::optional<std::int64_t> o = oracle::orbit_scan(e, y, B);
            REQUIRE(s.scanned.has_value());
            REQUIRE(o.has_value());
            CHECK(*s.scanned == *o);
            if (s.constructive) CHECK(*s.constructive == *o);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("cocycle bounds |zeta| <= 2 h'_n (h_m + Z_m) and |c_S| bound hold") {
    for (const auto& f : fam::oracle_families()) {
        CAPTURE(f.name);
        Engine e(f.seq, f.primes, f.N, f.M);
        CocycleBoundReport r = e.cocycle_bounds();
        CHECK(r.ok());
        CHECK(r.zeta_values > 0);
        CHECK(r.cs_values > 0);
    }
}

TEST_CASE("q' bounds on an adversarial spacer family") {
    // sigma_n = q_n h_n: all spacers at the top, the largest the upper bound allows to matter.
    Entries e;
    BigInt h = 1;
    for (int k = 0; k < 5; ++k) {
        std::int64_t q = 5 + 2 * k;
        std::vector<std::int64_t> sp(q + 1, 0);
        sp[q] = q * to_i64(h);
        e.push_back(CutSpacParam::dense(q, sp));
        h = h * q + q * h;
    }
    ParamSeq s = derive_sequences(e);
    RecurrenceTables tab(s, default_primes(6), 3, 5);
    QPrimeReport r = qprime_bounds_check(tab, s, false);
    CHECK(r.all_ok());
    for (const auto& row : r.rows) CHECK_FALSE(row.ratio_ok.has_value());
}

TEST_CASE("engine results do not depend on RANK1_OE_THREADS") {
    fam::Family f = fam::chacon();
    Engine e(f.seq, f.primes, f.N, f.M);
    setenv("RANK1_OE_THREADS", "1", 1);
    CHECK(worker_count() == 1);
    OrbitReport one = e.verify_orbit_on_K(3);
    setenv("RANK1_OE_THREADS", "4", 1);
    CHECK(worker_count() == 4);
    OrbitReport four = e.verify_orbit_on_K(3);
    CHECK(one.found == four.found);
    CHECK(one.max_abs_k == four.max_abs_k);
    CHECK(one.minus_one_cases == four.minus_one_cases);
    setenv("RANK1_OE_THREADS", "zero", 1);
    CHECK(worker_count() == 1);
    unsetenv("RANK1_OE_THREADS");
}
