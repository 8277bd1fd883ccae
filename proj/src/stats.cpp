#include "r1oe/stats.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace r1oe {

namespace {

Interval I(const BigInt& x) { return Interval::of(x); }
Interval I(const Rational& x) { return Interval::of(x); }
Interval I64(std::int64_t x) { return Interval::of(BigInt(static_cast<long>(x))); }

Interval pow2_iv(long e) {
    Interval r = Interval::point(1);
    mpfr_mul_2si(r.lo.get(), r.lo.get(), e, MPFR_RNDD);
    mpfr_mul_2si(r.hi.get(), r.hi.get(), e, MPFR_RNDU);
    return r;
}

Interval phi_of_abs(const PhiSpec& phi, std::int64_t c) { return phi.phi(I64(c < 0 ? -c : c)); }

double entropy_of(const std::map<std::int64_t, Rational>& hist) {
    double e = 0;
    for (const auto& [v, p] : hist) {
        double x = p.get_d();
        if (x > 0) e -= x * std::log(x);
    }
    return e;
}

}  // namespace

CocycleReport cocycle_histogram(const Engine& eng, const PhiSpec& phi, std::size_t ct_depth) {
    CocycleReport rep;
    rep.N = eng.N();
    rep.M = eng.M();
    rep.hF = eng.hF();
    std::map<std::int64_t, std::int64_t> counts;
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> cells;
    std::int64_t resolved = 0;
    for (std::int64_t x = 0; x < rep.hF; ++x) {
        SResult r = eng.s_apply(x);
        if (!r.resolved) continue;
        ++resolved;
        ++counts[r.c];
        ++cells[{r.n, r.m}];
        const std::int64_t cap = (eng.h(r.m - 1) + eng.Z(r.m - 1)) * eng.hprime(r.n - 1);
        if (std::abs(r.c) > cap) ++rep.bound_violations;
    }
    const BigInt hF = static_cast<long>(rep.hF);
    rep.phi_sum = Interval::point(0);
    for (const auto& [v, k] : counts) {
        Rational mass = make_rational(BigInt(static_cast<long>(k)), hF);
        rep.hist[v] = mass;
        rep.phi_sum = rep.phi_sum + I(mass) * phi_of_abs(phi, v);
    }
    for (const auto& [key, k] : cells) rep.cell_mass[key] = make_rational(BigInt(static_cast<long>(k)), hF);
    rep.resolved_mass = make_rational(BigInt(static_cast<long>(resolved)), hF);
    rep.unresolved_mass = 1 - rep.resolved_mass;
    rep.unresolved_mass.canonicalize();
    rep.entropy = entropy_of(rep.hist);

    // c_{T^-1} on K'_n, taken in stage-F levels.
    const std::size_t depth = std::min(ct_depth, eng.N());
    std::vector<std::vector<char>> inK(depth + 1);
    for (std::size_t n = 1; n <= depth; ++n) {
        inK[n].assign(eng.h(n), 0);
        for (auto i : eng.build_K(n).levels) inK[n][i] = 1;
    }
    for (std::size_t n = 1; n <= depth; ++n) {
        CTWindow w;
        w.n = n;
        w.bound = 4 * (eng.h(n - 1) + eng.Z(n - 1)) * eng.hprime(n - 1) * eng.hprime(n - 1);
        w.phi_sum = Interval::point(0);
        std::map<std::int64_t, std::int64_t> ks;
        for (std::int64_t y = 0; y < rep.hF; ++y) {
            auto member = [&](std::size_t j) {
                std::int64_t a = eng.towers().ancestor(eng.M(), y, j);
                return a >= 0 && inK[j][a];
            };
            if (!member(n)) continue;
            bool earlier = false;
            for (std::size_t j = 1; j < n && !earlier; ++j) earlier = member(j);
            if (earlier) continue;
            ++w.points;
            OrbitStep st = eng.orbit_step(y, n, w.bound);
            if (!st.scanned) continue;
            ++w.found;
            ++ks[*st.scanned];
            w.max_abs = std::max(w.max_abs, std::abs(*st.scanned));
        }
        for (const auto& [v, k] : ks) {
            Rational mass = make_rational(BigInt(static_cast<long>(k)), hF);
            w.hist[v] = mass;
            w.phi_sum = w.phi_sum + I(mass) * phi_of_abs(phi, v);
        }
        rep.ct.push_back(std::move(w));
    }
    return rep;
}

const BoundTerm* BoundsReport::find(const std::vector<BoundTerm>& v, std::size_t n, std::size_t m) const {
    for (const auto& t : v)
        if (t.n == n && t.m == m) return &t;
    return nullptr;
}

BoundsReport bounds_tables(const BoundsInput& in, const PhiSpec& phi) {
    if (!in.seq || !in.tab) throw std::invalid_argument("bounds need a parameter sequence and recurrence tables");
    const ParamSeq& seq = *in.seq;
    const RecurrenceTables& tab = *in.tab;
    if (!phi.subadditive())
        throw std::invalid_argument("bounds need an increasing subadditive phi; '" + phi.name() + "' is not");
    BoundsReport b;
    b.phi = phi.name();
    const std::size_t K = seq.size();
    const std::size_t R = tab.N();
    b.steps = K;
    b.rows = R;
    if (K == 0 || R == 0) throw std::invalid_argument("bounds need at least one step and one table row");

    auto h = [&](std::size_t k) { return I(seq.h.at(k)); };
    auto hp = [&](std::size_t k) { return I(tab.hprime(k)); };
    auto Hp = [&](std::size_t k) { return I(tab.Hprime(k)); };
    // Z_k, or C h_k past the built steps.
    auto Z = [&](std::size_t k, bool& env) {
        if (k < K) return I(seq.Z[k]);
        env = true;
        return I(in.C) * h(k);
    };
    auto f = [&](const Interval& t) { return phi.bound_phi(t); };

    // eps_m <= M_0 sum_{m <= k < K} sigma_k / (q_0...q_k) (+ the scheduler tail).
    std::vector<Interval> terms;
    Interval Q = Interval::point(1);
    Interval total = Interval::point(0);
    for (std::size_t k = 0; k < K; ++k) {
        Q = Q * I(seq.q(k));
        terms.push_back(I(seq.sigma[k]) / Q);
        total = total + terms.back();
    }
    b.M0_upper = Interval::point(1) / (Interval::point(1) + total);
    Interval tail = Interval::point(0);
    if (in.scheduler_tail) tail = (I(in.Cprime) + Interval::point(1)) / I(seq.q(K - 1));
    b.eps.assign(K + 1, Interval::point(0));
    Interval suffix = Interval::point(0);
    for (std::size_t m = K + 1; m-- > 0;) {
        if (m < K) suffix = suffix + terms[m];
        b.eps[m] = b.M0_upper * suffix + tail;
    }

    const auto& primes = tab.primes();
    for (std::size_t n = 0; n <= R && n + 1 <= K; ++n) {
        if (n >= primes.size()) break;
        bool env = false;
        const Interval h1 = h(n + 1), Z1 = Z(n + 1, env);
        const Interval A = Hp(n) + I(primes[n]) * hp(n);
        const Interval h1sq = h1 * h1, h1cu = h1sq * h1;
        const Interval cube = f(h1cu) + f(Z1 * h1sq);
        const Interval hp2 = hp(n) * hp(n);
        b.Delta.push_back({n, 0, (Interval::point(1) + Interval::point(2) * A) * hp2 * cube / h1, env});
        b.Delta_eps.push_back({n, 0, b.eps[n + 1] * hp2 * cube, env || in.scheduler_tail});
        b.Gamma1.push_back({n, 0, Interval::point(4) * hp(n) * (f(h1sq) + f(Z1 * h1)) / h1, env});
        b.Gamma2.push_back({n, 0, A * hp(n) * (f(h1) + f(Z1)) / h1, env});
    }
    for (std::size_t n = 0; n <= R; ++n)
        for (std::size_t m = n + 1; m <= K; ++m) {
            bool env = false;
            const Interval hm = h(m), Zm = Z(m, env);
            const Interval s = f(hm) + f(Zm);
            if (n >= 1) b.Gamma3.push_back({n, m, Hp(n) * hp(n - 1) * s / hm, env});
            b.Gamma_eps.push_back({n, m, b.eps[m] * hp(n) * s, env || in.scheduler_tail});
        }

    bool env0 = false;
    const Interval hZ0 = h(0) + Z(0, env0);
    b.cT_master = f(Interval::point(4) * hZ0 * hp(0) * hp(0));
    for (const auto& t : b.Delta) b.cT_master = b.cT_master + Interval::point(4) * t.value;
    for (const auto& t : b.Delta_eps) b.cT_master = b.cT_master + Interval::point(4) * t.value;
    b.D11 = I(tab.qprime(0)) / h(1) * f(hZ0 * hp(0));
    b.cS_master = b.D11;
    for (const auto* v : {&b.Gamma1, &b.Gamma2, &b.Gamma3, &b.Gamma_eps})
        for (const auto& t : *v) b.cS_master = b.cS_master + t.value;
    return b;
}

Interval truncated_cS_bound(const BoundsReport& b, std::size_t F) {
    auto get = [&](const std::vector<BoundTerm>& v, std::size_t n, std::size_t m, const char* name) {
        const BoundTerm* t = b.find(v, n, m);
        if (!t)
            throw std::out_of_range(std::string("bound term ") + name + "(" + std::to_string(n) + "," +
                                    std::to_string(m) + ") was not tabulated");
        return t->value;
    };
    if (F < 1) throw std::invalid_argument("truncation stage must be >= 1");
    Interval s = b.D11;
    for (std::size_t n = 2; n <= F; ++n) s = s + get(b.Gamma1, n - 2, 0, "Gamma1");
    for (std::size_t n = 1; n + 1 <= F; ++n)
        s = s + get(b.Gamma_eps, n - 1, n, "Gamma_eps") + get(b.Gamma2, n - 1, 0, "Gamma2");
    for (std::size_t n = 1; n + 2 <= F; ++n)
        for (std::size_t m = n + 2; m <= F; ++m)
            s = s + get(b.Gamma_eps, n - 1, m - 1, "Gamma_eps") + get(b.Gamma3, n, m - 1, "Gamma3");
    return s;
}

bool EnvelopeReport::all_ok() const {
    for (const auto& r : rows)
        if (!r.ok) return false;
    return !rows.empty();
}

EnvelopeReport strict_envelopes(const BoundsReport& b, const ParamSeq& seq, std::size_t depth) {
    EnvelopeReport rep;
    auto add = [&](std::size_t n, std::string q, Interval v, Interval lim) {
        bool ok = certainly_le(v, lim);
        rep.rows.push_back({n, std::move(q), std::move(v), std::move(lim), ok});
    };
    auto need = [&](const BoundTerm* t, const std::string& what) {
        if (!t) throw std::out_of_range(what + " was not tabulated");
        return t->value;
    };
    const std::size_t K = b.steps;
    for (std::size_t n = 1; n <= depth; ++n) {
        const long ln = static_cast<long>(n);
        add(n, "Delta", need(b.find(b.Delta, n), "Delta(" + std::to_string(n) + ")"), pow2_iv(-ln));
        // Built Gamma_3 terms must each respect 2^-(m+1); the unbuilt tail then sums to 2^-(K+1).
        Interval sum = pow2_iv(-static_cast<long>(K) - 1);
        bool terms_ok = true;
        for (std::size_t m = n + 1; m <= K; ++m) {
            Interval g = need(b.find(b.Gamma3, n, m), "Gamma3");
            terms_ok = terms_ok && certainly_le(g, pow2_iv(-static_cast<long>(m) - 1));
            sum = sum + g;
        }
        add(n, "Gamma3_sum", sum, pow2_iv(-ln - 1));
        if (!terms_ok) rep.rows.back().ok = false;
        Interval lim = pow2_iv(-(ln - 1)) / b.M0_upper;
        add(n, "Delta_eps", need(b.find(b.Delta_eps, n), "Delta_eps(" + std::to_string(n) + ")"), lim);
        add(n, "eps", b.eps.at(n), Interval::point(2) / I(seq.q(n - 1)));
    }
    return rep;
}

Comparison compare(const CocycleReport& rep, const BoundsReport& b) {
    Comparison c;
    c.empirical = rep.phi_sum;
    c.bound = truncated_cS_bound(b, rep.M);
    c.slack = c.bound - c.empirical;
    c.ok = certainly_le(c.empirical, c.bound);
    return c;
}

std::string histogram_csv(const std::map<std::int64_t, Rational>& hist) {
    std::ostringstream os;
    os << "value,mass_num,mass_den\n";
    for (const auto& [v, p] : hist) os << v << ',' << to_dec(p.get_num()) << ',' << to_dec(p.get_den()) << '\n';
    return os.str();
}

std::string bounds_csv(const BoundsReport& b) {
    std::ostringstream os;
    os << "term,n,m,lo,hi\n";
    auto dump = [&](const char* name, const std::vector<BoundTerm>& v) {
        for (const auto& t : v) os << name << ',' << t.n << ',' << t.m << ',' << t.value.lo.str() << ','
                                   << t.value.hi.str() << '\n';
    };
    dump("Delta", b.Delta);
    dump("Delta_eps", b.Delta_eps);
    dump("Gamma1", b.Gamma1);
    dump("Gamma2", b.Gamma2);
    dump("Gamma3", b.Gamma3);
    dump("Gamma_eps", b.Gamma_eps);
    return os.str();
}

}  // namespace r1oe
