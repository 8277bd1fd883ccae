#pragma once

// Brute-force reference computations, written independently of the library
// code paths they check.

#include "r1oe/oe_engine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace oracle {

using namespace r1oe;

// Least |k| (positive first) with S^k y = y - 1, |k| <= B, by plain iteration.
inline std::optional<std::int64_t> orbit_scan(const Engine& e, std::int64_t y, std::int64_t B) {
    std::vector<std::int64_t> fwd{y}, back{y};
    for (std::int64_t s = 1; s <= B; ++s) {
        bool any = false;
        if (!fwd.empty()) {
            SResult r = e.s_apply(fwd.back());
            if (r.resolved) {
                any = true;
                if (r.image == y - 1) return s;
                fwd.push_back(r.image);
            } else {
                fwd.clear();
            }
        }
        if (!back.empty()) {
            SResult r = e.s_inverse(back.back());
            if (r.resolved) {
                any = true;
                if (r.image == y - 1) return -s;
                back.push_back(r.image);
            } else {
                back.clear();
            }
        }
        if (!any) break;
    }
    return std::nullopt;
}

// Each (base point, position) coordinate of R'_n names at most one stage-M level.
inline bool levels_disjoint(const Engine& e, std::size_t n) {
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    for (std::int64_t x = 0; x < e.hF(); ++x) {
        Descent d = e.descend(x, n);
        if (d.depth < n) continue;
        std::int64_t pos = 0, scale = 1;
        for (std::size_t k = 0; k < n; ++k) {
            pos += scale * d.digit[k];
            scale *= e.qprime(k);
        }
        if (!seen.insert({d.point[n], pos}).second) return false;
    }
    return true;
}

// Stage-m levels with some stage-M lift outside E_{n,m}.
inline std::int64_t uncovered_levels(const Engine& e, std::size_t n, std::size_t m) {
    std::set<std::int64_t> out;
    for (std::int64_t x = 0; x < e.hF(); ++x) {
        std::int64_t a = e.towers().ancestor(e.M(), x, m);
        if (a >= 0 && !e.in_E(x, n, m)) out.insert(a);
    }
    return static_cast<std::int64_t>(out.size());
}

// Both properties of Ornstein's lemma for a_1..a_m (0-based storage), by
// direct evaluation of every window.
inline bool ornstein_holds(const std::vector<std::int64_t>& a, std::int64_t K, const Rational& eps,
                           const Rational& alpha) {
    const auto m = static_cast<std::int64_t>(a.size());
    for (std::int64_t k = 0; k < m; ++k) {
        std::map<std::int64_t, std::int64_t> H;
        for (std::int64_t j = 0; j + k < m; ++j) {
            std::int64_t w = 0;
            for (std::int64_t i = j; i <= j + k; ++i) w += a[i];
            if (w > K || w < -K) return false;
            ++H[w];
        }
        // k < (1 - eps) m  =>  H(l, k) < alpha (m - k) / K.
        if (Rational(BigInt(static_cast<long>(k))) < (1 - eps) * Rational(BigInt(static_cast<long>(m))))
            for (const auto& [l, c] : H)
                if (!(Rational(BigInt(static_cast<long>(c))) <
                      alpha * Rational(BigInt(static_cast<long>(m - k))) / Rational(BigInt(static_cast<long>(K)))))
                    return false;
    }
    return true;
}

}  // namespace oracle
