#include "r1oe/oe_engine.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <thread>

namespace r1oe {

namespace {

template <class Fn>
void parallel_chunks(std::int64_t count, Fn fn) {
    unsigned w = worker_count();
    if (w <= 1 || count < 4096) {
        fn(0, count, 0u);
        return;
    }
    std::vector<std::thread> pool;
    std::int64_t chunk = (count + w - 1) / w;
    for (unsigned i = 0; i < w; ++i) {
        std::int64_t lo = i * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(fn, lo, hi, i);
    }
    for (auto& th : pool) th.join();
}

std::optional<std::size_t> crit1_on(const ParamSeq& seq, const std::vector<BigInt>& primes,
                                    const std::vector<std::int64_t>& qprime, std::size_t upto) {
    BigInt mx = 0;
    for (std::size_t k = 0; k < upto && k < seq.size() && k < primes.size(); ++k) {
        if (seq.q(k) <= std::max(mx, primes[k])) return k;
        if (k < qprime.size()) mx = std::max(mx, BigInt(static_cast<long>(qprime[k])));
    }
    return std::nullopt;
}

}  // namespace

Engine::Engine(const ParamSeq& seq, const std::vector<BigInt>& primes, std::size_t N, std::size_t M)
    : seq_(seq), primes_(primes), N_(N), M_(M), towers_(seq, M) {
    if (N < 1 || M < N) throw std::invalid_argument("engine needs 1 <= N <= M");
    if (primes_.size() < N) throw std::invalid_argument("not enough primes for N steps");
    for (std::size_t m = 0; m < M; ++m) Z_.push_back(to_i64(seq.Z[m]));
    build();
}

void Engine::build() {
    const std::size_t N = N_;
    std::vector<std::vector<std::int32_t>> grp(N), birth(N), fwd(N), back(N);
    std::int64_t h = towers_.height(1);
    for (std::size_t k = 0; k < N; ++k) {
        grp[k].assign(h, -1);
        birth[k].assign(h, 0);
        fwd[k].assign(h, 0);
        back[k].assign(h, 0);
    }
    qprime_.assign(N, 0);
    for (std::size_t m = 1; m <= M_; ++m) {
        if (m > 1) {
            std::int64_t hm = towers_.height(m);
            for (std::size_t k = 0; k < N; ++k) {
                std::vector<std::int32_t> g(hm, -1), b(hm, 0), f(hm, 0), bk(hm, 0);
                for (std::int64_t x = 0; x < hm; ++x) {
                    std::int64_t par = towers_.parent(m, x);
                    if (par < 0) continue;
                    g[x] = grp[k][par];
                    b[x] = birth[k][par];
                    f[x] = fwd[k][par];
                    bk[x] = back[k][par];
                }
                grp[k].swap(g);
                birth[k].swap(b);
                fwd[k].swap(f);
                back[k].swap(bk);
            }
        }
        const std::int64_t hm = towers_.height(m);
        for (std::size_t n = 1; n <= std::min(N, m); ++n) {
            BrickEntry e;
            e.n = n;
            e.m = m;
            auto& g = grp[n - 1];
            for (std::int64_t x = 0; x < hm; ++x) {
                bool material = (n == 1) || grp[n - 2][x] == 0;
                if (material && g[x] < 0) e.W.push_back(x);
            }
            e.r = static_cast<std::int64_t>(e.W.size());
            if (m == n) {
                std::int64_t p = to_i64(primes_[n - 1]);
                e.qprime = e.r >= 1 ? ((e.r - 1) / p) * p : 0;
                if (e.qprime <= 0)
                    throw IllPosed(n, m, "q'_" + std::to_string(n - 1), crit1_on(seq_, primes_, qprime_, n));
                qprime_[n - 1] = e.qprime;
                e.t = 1;
            } else {
                e.qprime = qprime_[n - 1];
                e.t = e.r >= 1 ? (e.r - 1) / e.qprime : 0;
                if (e.t <= 0)
                    throw IllPosed(n, m, "t_{" + std::to_string(n) + "," + std::to_string(m) + "}",
                                   crit1_on(seq_, primes_, qprime_, n));
            }
            const std::int64_t count = e.qprime * e.t;
            for (std::int64_t i = 0; i < count; ++i) {
                std::int64_t x = e.W[i];
                auto gi = static_cast<std::int32_t>(i % e.qprime);
                g[x] = gi;
                birth[n - 1][x] = static_cast<std::int32_t>(m);
                if (gi <= e.qprime - 2) {
                    std::int64_t d = e.W[i + 1] - x;
                    e.deltas.push_back(d);
                    fwd[n - 1][x] = static_cast<std::int32_t>(d);
                    back[n - 1][e.W[i + 1]] = static_cast<std::int32_t>(d);
                }
            }
            entries_.emplace(std::make_pair(n, m), std::move(e));
        }
    }
    grp_ = std::move(grp);
    birth_ = std::move(birth);
    fwd_ = std::move(fwd);
    back_ = std::move(back);
    hprime_.assign(1, 1);
    Hprime_.assign(1, 0);
    for (std::size_t k = 0; k < N; ++k) {
        hprime_.push_back(hprime_.back() * qprime_[k]);
        Hprime_.push_back(Hprime_.back() + hprime_.back());
    }
}

const BrickEntry& Engine::entry(std::size_t n, std::size_t m) const {
    auto it = entries_.find({n, m});
    if (it == entries_.end())
        throw std::out_of_range("no step (" + std::to_string(n) + "," + std::to_string(m) + ") built");
    return it->second;
}

std::optional<std::int64_t> Engine::zeta(std::size_t k, std::int64_t x) const {
    std::int32_t g = grp_[k - 1][x];
    if (g < 0 || g > qprime_[k - 1] - 2) return std::nullopt;
    return x + fwd_[k - 1][x];
}

std::optional<std::int64_t> Engine::zeta_inv(std::size_t k, std::int64_t x) const {
    std::int32_t g = grp_[k - 1][x];
    if (g < 1) return std::nullopt;
    return x - back_[k - 1][x];
}

Descent Engine::descend(std::int64_t x, std::size_t depth) const {
    Descent d;
    d.point.push_back(x);
    std::int64_t cur = x;
    for (std::size_t k = 1; k <= std::min(depth, N_); ++k) {
        std::int32_t g = grp_[k - 1][cur];
        if (g < 0) break;
        for (std::int32_t s = 0; s < g; ++s) cur -= back_[k - 1][cur];
        d.digit.push_back(g);
        d.point.push_back(cur);
        d.depth = k;
    }
    return d;
}

std::optional<std::int64_t> Engine::position(std::int64_t x, std::size_t n) const {
    Descent d = descend(x, n);
    if (d.depth < n) return std::nullopt;
    std::int64_t pos = 0;
    for (std::size_t k = 0; k < n; ++k) pos += hprime_[k] * d.digit[k];
    return pos;
}

std::optional<std::int64_t> Engine::ascend(std::int64_t b, std::int64_t pos, std::size_t n) const {
    if (pos < 0 || pos >= hprime_.at(n)) return std::nullopt;
    std::int64_t cur = b;
    for (std::size_t k = n; k >= 1; --k) {
        std::int64_t digit = (pos / hprime_[k - 1]) % qprime_[k - 1];
        for (std::int64_t s = 0; s < digit; ++s) {
            auto nx = zeta(k, cur);
            if (!nx) return std::nullopt;
            cur = *nx;
        }
    }
    return cur;
}

SResult Engine::s_apply(std::int64_t x) const {
    SResult res;
    Descent d = descend(x, N_);
    for (std::size_t k = 0; k < d.depth; ++k) {
        if (d.digit[k] < qprime_[k] - 1) {
            auto img = zeta(k + 1, d.point[k]);
            if (!img) return res;
            res.resolved = true;
            res.image = *img;
            res.c = *img - x;
            res.n = k + 1;
            res.m = static_cast<std::size_t>(birth_[k][d.point[k]]);
            return res;
        }
    }
    return res;
}

SResult Engine::s_inverse(std::int64_t x) const {
    SResult res;
    Descent d = descend(x, N_);
    for (std::size_t k = 0; k < d.depth; ++k) {
        if (d.digit[k] > 0) {
            auto y = zeta_inv(k + 1, d.point[k]);
            if (!y) return res;
            std::int64_t cur = *y;
            for (std::size_t j = k; j >= 1; --j)
                for (std::int64_t s = 0; s < qprime_[j - 1] - 1; ++s) {
                    auto nx = zeta(j, cur);
                    if (!nx) return res;
                    cur = *nx;
                }
            res.resolved = true;
            res.image = cur;
            res.c = cur - x;
            // Cell of the preimage, so that S(image) = x.
            SResult fwd = s_apply(cur);
            res.n = fwd.n;
            res.m = fwd.m;
            return res;
        }
    }
    return res;
}

bool Engine::in_E(std::int64_t x, std::size_t n, std::size_t m) const {
    Descent d = descend(x, n);
    if (d.depth < n) return false;
    return birth_[n - 1][d.point[n - 1]] <= static_cast<std::int32_t>(m);
}

std::vector<std::int64_t> Engine::build_E(std::size_t n, std::size_t m) const {
    std::vector<std::int64_t> out;
    if (m > M_) throw std::out_of_range("stage beyond build depth");
    const std::int64_t hm = towers_.height(m);
    std::vector<std::int64_t> inside(hm, 0);
    for (std::int64_t x = 0; x < hF(); ++x) {
        std::int64_t a = towers_.ancestor(M_, x, m);
        if (a >= 0 && in_E(x, n, m)) ++inside[a];
    }
    for (std::int64_t j = 0; j < hm; ++j)
        if (inside[j] > 0) out.push_back(j);
    return out;
}

EReport Engine::E_report(std::size_t n, std::size_t m) const {
    EReport rep;
    rep.n = n;
    rep.m = m;
    const std::int64_t hm = towers_.height(m);
    std::vector<std::int64_t> inside(hm, 0), total(hm, 0);
    for (std::int64_t x = 0; x < hF(); ++x) {
        std::int64_t a = towers_.ancestor(M_, x, m);
        if (a < 0) {
            if (in_E(x, n, m)) rep.whole_levels = false;
            continue;
        }
        ++total[a];
        if (in_E(x, n, m)) ++inside[a];
    }
    std::int64_t in_levels = 0;
    for (std::int64_t j = 0; j < hm; ++j) {
        if (inside[j] != 0 && inside[j] != total[j]) rep.whole_levels = false;
        if (inside[j] == total[j] && total[j] > 0) ++in_levels;
    }
    rep.uncovered = hm - in_levels;
    rep.bound = (n < m) ? Hprime_[n] : Hprime_[n - 1] + p(n - 1) * hprime_[n - 1];
    return rep;
}

KReport Engine::build_K(std::size_t n) const {
    KReport rep;
    rep.n = n;
    const std::int64_t hn = towers_.height(n);
    std::vector<char> inE(hn, 0);
    for (auto j : build_E(n, n)) inE[j] = 1;
    for (std::int64_t i = 1; i < hn; ++i)
        if (inE[i - 1] && inE[i]) rep.levels.push_back(i);
    // (E \ B_n) \ T(X_n \ E)
    std::set<std::int64_t> alt;
    for (std::int64_t i = 1; i < hn; ++i)
        if (inE[i]) alt.insert(i);
    for (std::int64_t j = 0; j + 1 < hn; ++j)
        if (!inE[j]) alt.erase(j + 1);
    rep.two_ways_agree = std::vector<std::int64_t>(alt.begin(), alt.end()) == rep.levels;
    std::int64_t outside = 0;
    for (std::int64_t j = 0; j < hn; ++j) outside += inE[j] ? 0 : 1;
    rep.lower_bound = hn - 1 - 2 * outside;
    return rep;
}

OrbitStep Engine::orbit_step(std::int64_t y, std::size_t n, std::int64_t B) const {
    // Constructive k: same base point of R'_n, difference of positions.
    std::optional<std::int64_t> kc;
    const std::int64_t target = y - 1;
    Descent a = descend(y, n), b = descend(target, n);
    if (a.depth >= n && b.depth >= n && a.point[n] == b.point[n]) {
        std::int64_t pa = 0, pb = 0;
        for (std::size_t k = 0; k < n; ++k) {
            pa += hprime_[k] * a.digit[k];
            pb += hprime_[k] * b.digit[k];
        }
        if (ascend(a.point[n], pb, n) == std::optional<std::int64_t>(target)) kc = pb - pa;
    }
    // Bidirectional scan of S-iterates inside the bound window.
    std::int64_t f = y, bk = y;
    bool fwd_ok = true, back_ok = true;
    for (std::int64_t s = 1; s <= B && (fwd_ok || back_ok); ++s) {
        if (fwd_ok) {
            SResult r = s_apply(f);
            if (!r.resolved) fwd_ok = false;
            else {
                f = r.image;
                if (f == target) return {kc, s};
            }
        }
        if (back_ok) {
            SResult r = s_inverse(bk);
            if (!r.resolved) back_ok = false;
            else {
                bk = r.image;
                if (bk == target) return {kc, -s};
            }
        }
    }
    return {kc, std::nullopt};
}

OrbitReport Engine::verify_orbit_on_K(std::size_t n) const {
    OrbitReport rep;
    rep.n = n;
    rep.bound = 4 * (h(n - 1) + Z(n - 1)) * hprime_[n - 1] * hprime_[n - 1];
    KReport K = build_K(n);
    std::vector<char> inK(towers_.height(n), 0);
    for (auto i : K.levels) inK[i] = 1;
    std::vector<std::int64_t> pts;
    for (std::int64_t x = 0; x < hF(); ++x) {
        std::int64_t a = towers_.ancestor(M_, x, n);
        if (a >= 0 && inK[a]) pts.push_back(x);
    }
    const unsigned w = std::max(1u, worker_count());
    std::vector<OrbitReport> part(w);
    const std::int64_t B = rep.bound;
    parallel_chunks(static_cast<std::int64_t>(pts.size()), [&](std::int64_t lo, std::int64_t hi, unsigned slot) {
        OrbitReport& pr = part[slot];
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            const std::int64_t y = pts[idx];
            ++pr.points;
            const OrbitStep st = orbit_step(y, n, B);
            const std::optional<std::int64_t>& ks = st.scanned;
            const std::optional<std::int64_t>& kc = st.constructive;
            if (!ks) {
                if (pr.failures.size() < 16) pr.failures.push_back(y);
                continue;
            }
            ++pr.found;
            pr.max_abs_k = std::max(pr.max_abs_k, std::abs(*ks));
            if (*ks == -1) ++pr.minus_one_cases;
            if (!kc || *kc != *ks) ++pr.constructive_mismatch;
        }
    });
    for (const auto& pr : part) {
        rep.points += pr.points;
        rep.found += pr.found;
        rep.max_abs_k = std::max(rep.max_abs_k, pr.max_abs_k);
        rep.minus_one_cases += pr.minus_one_cases;
        rep.constructive_mismatch += pr.constructive_mismatch;
        rep.failures.insert(rep.failures.end(), pr.failures.begin(), pr.failures.end());
    }
    return rep;
}

PartitionReport Engine::partition_check(std::size_t n) const {
    PartitionReport rep;
    rep.n = n;
    rep.total = hF();
    rep.disjoint = true;
    for (std::int64_t x = 0; x < hF(); ++x) {
        Descent d = descend(x, n);
        if (d.depth < n) continue;
        ++rep.covered;
        std::int64_t pos = 0;
        for (std::size_t k = 0; k < n; ++k) pos += hprime_[k] * d.digit[k];
        if (ascend(d.point[n], pos, n) != std::optional<std::int64_t>(x)) rep.disjoint = false;
    }
    const std::size_t F = M_;
    auto left = [&](std::size_t k) {
        const BrickEntry& e = entry(k, F);
        return e.r - e.qprime * e.t;
    };
    rep.tail = left(1);
    rep.predicted_uncovered = left(1);
    for (std::size_t k = 2; k <= n; ++k) rep.predicted_uncovered += hprime_[k - 1] * left(k);
    rep.coverage_all = make_rational(BigInt(static_cast<long>(rep.covered)), BigInt(static_cast<long>(rep.total)));
    std::int64_t den = rep.total - rep.tail;
    rep.coverage_bricked = den > 0 ? make_rational(BigInt(static_cast<long>(rep.covered)), BigInt(static_cast<long>(den)))
                                   : Rational(0);
    return rep;
}

CocycleBoundReport Engine::cocycle_bounds() const {
    CocycleBoundReport rep;
    for (const auto& [key, e] : entries_) {
        const std::int64_t cap = h(e.m - 1) + Z(e.m - 1);
        for (auto d : e.deltas) {
            ++rep.zeta_values;
            if (d <= 0 || d > cap) ++rep.zeta_violations;
        }
    }
    for (std::int64_t x = 0; x < hF(); ++x) {
        SResult r = s_apply(x);
        if (!r.resolved) continue;
        ++rep.cs_values;
        std::int64_t cap = (h(r.m - 1) + Z(r.m - 1)) * hprime_[r.n - 1];
        if (std::abs(r.c) > cap) ++rep.cs_violations;
    }
    return rep;
}

}  // namespace r1oe
