// Acceptance criteria 1-10. One line per criterion; exit status 0 only if all pass.

#include "families.hpp"
#include "oracles.hpp"

#include "r1oe/cli.hpp"
#include "r1oe/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <unistd.h>

using namespace r1oe;

namespace {

// Pinned limits.
constexpr double kLimitOracleSeconds = 10.0;
constexpr double kLimitOrbitSeconds = 60.0;
constexpr double kLimitStrictSeconds = 30.0;
constexpr std::size_t kStrictSteps = 9;
constexpr std::size_t kStrictDepth = 8;
constexpr int kPhiGrid = 10000;
constexpr int kPhiPairs = 1000;
constexpr double kPhiGridMax = 1.0e6;

struct Outcome {
    bool pass = true;
    std::string detail;
    double seconds = 0;
    double limit = 0;
};

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Built {
    fam::Family f;
    RecurrenceTables tab;
    std::optional<Engine> eng;
};

std::vector<Built>& oracle_builds() {
    static std::vector<Built> b;
    return b;
}

struct StrictRun {
    Schedule sched;
    RecurrenceTables tab;
    double seconds = 0;
};

const StrictRun& strict_rotation() {
    static std::optional<StrictRun> run;
    if (!run) {
        auto t0 = std::chrono::steady_clock::now();
        RotationGen g({0, 3});
        ScheduleOptions o;
        o.mode = Mode::strict;
        o.steps = kStrictSteps;
        Schedule s = schedule(g, PhiSpec::power(1, 4), o);
        RecurrenceTables tab(s.seq, s.primes, kStrictDepth, kStrictDepth);
        run = StrictRun{std::move(s), std::move(tab), since(t0)};
    }
    return *run;
}

// ---- 1 -------------------------------------------------------------------

Outcome criterion1() {
    Outcome o;
    o.limit = kLimitOracleSeconds;
    auto t0 = std::chrono::steady_clock::now();
    std::size_t cells = 0;
    std::ostringstream bad;
    auto& builds = oracle_builds();
    for (auto& f : fam::oracle_families()) {
        bool shape = f.N <= 4 && f.M <= 6;
        for (std::size_t k = 0; k < f.seq.size(); ++k) shape = shape && f.seq.q(k) <= 12;
        if (!shape) {
            o.pass = false;
            bad << " " << f.name << ":out-of-scope";
        }
        Built b{f, RecurrenceTables(f.seq, f.primes, f.N, f.M), std::nullopt};
        b.eng.emplace(f.seq, f.primes, f.N, f.M);
        for (std::size_t n = 1; n <= f.N; ++n) {
            ++cells;
            if (BigInt(static_cast<long>(b.eng->qprime(n - 1))) != b.tab.qprime(n - 1)) {
                o.pass = false;
                bad << " " << f.name << ":q'_" << n - 1;
            }
            for (std::size_t m = n; m <= f.M; ++m) {
                cells += 2;
                if (BigInt(static_cast<long>(b.eng->r(n, m))) != b.tab.r(n, m) ||
                    BigInt(static_cast<long>(b.eng->t(n, m))) != b.tab.t(n, m)) {
                    o.pass = false;
                    bad << " " << f.name << ":(" << n << "," << m << ")";
                }
            }
        }
        builds.push_back(std::move(b));
    }
    o.seconds = since(t0);
    if (o.seconds >= o.limit) o.pass = false;
    o.detail = std::to_string(builds.size()) + " families, " + std::to_string(cells) +
               " table cells equal (r, t, q')" + bad.str();
    return o;
}

// ---- 2 -------------------------------------------------------------------

Outcome criterion2() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    std::int64_t zeta = 0, zeta_bad = 0, cs = 0, cs_bad = 0;
    for (const auto& b : oracle_builds()) {
        const Engine& e = *b.eng;
        const ParamSeq& s = b.f.seq;
        for (std::size_t n = 1; n <= e.N(); ++n)
            for (std::size_t m = n; m <= e.M(); ++m) {
                const BigInt cap = s.h[m - 1] + s.Z[m - 1];
                for (auto d : e.entry(n, m).deltas) {
                    ++zeta;
                    if (d <= 0 || BigInt(static_cast<long>(d)) > cap) ++zeta_bad;
                }
            }
        for (std::int64_t x = 0; x < e.hF(); ++x) {
            SResult r = e.s_apply(x);
            if (!r.resolved) continue;
            ++cs;
            const BigInt cap = (s.h[r.m - 1] + s.Z[r.m - 1]) * b.tab.hprime(r.n - 1);
            const bool lands = r.image == x + r.c;
            if (!lands || BigInt(static_cast<long>(std::abs(r.c))) > cap) ++cs_bad;
        }
        const CocycleBoundReport rep = e.cocycle_bounds();
        if (!rep.ok() || rep.zeta_values == 0 || rep.cs_values == 0) o.pass = false;
    }
    o.pass = o.pass && zeta_bad == 0 && cs_bad == 0 && zeta > 0 && cs > 0;
    o.seconds = since(t0);
    o.detail = std::to_string(zeta) + " zeta values (" + std::to_string(zeta_bad) + " out of bound), " +
               std::to_string(cs) + " c_S values (" + std::to_string(cs_bad) + " out of bound)";
    return o;
}

// ---- 3 -------------------------------------------------------------------

Outcome criterion3() {
    Outcome o;
    o.limit = kLimitOrbitSeconds;
    auto t0 = std::chrono::steady_clock::now();
    std::int64_t points = 0, found = 0, worst_num = 0, worst_den = 1;
    std::ostringstream bad;
    for (const auto& b : oracle_builds()) {
        const Engine& e = *b.eng;
        const ParamSeq& s = b.f.seq;
        for (std::size_t n = 1; n <= std::min<std::size_t>(3, e.N()); ++n) {
            const BigInt hp = b.tab.hprime(n - 1);
            const BigInt B = 4 * (s.h[n - 1] + s.Z[n - 1]) * hp * hp;
            const std::int64_t Bi = to_i64(B);
            OrbitReport rep = e.verify_orbit_on_K(n);
            if (!rep.ok() || rep.bound != Bi) {
                o.pass = false;
                bad << " " << b.f.name << ":n=" << n;
            }
            // Independent scan over the K_n points.
            KReport K = e.build_K(n);
            std::vector<char> inK(e.h(n), 0);
            for (auto i : K.levels) inK[i] = 1;
            for (std::int64_t y = 0; y < e.hF(); ++y) {
                std::int64_t a = e.towers().ancestor(e.M(), y, n);
                if (a < 0 || !inK[a]) continue;
                ++points;
                std::optional<std::int64_t> k = oracle::orbit_scan(e, y, Bi);
                if (k) {
                    ++found;
                    if (std::abs(*k) * worst_den > worst_num * Bi) {
                        worst_num = std::abs(*k);
                        worst_den = Bi;
                    }
                } else if (bad.str().size() < 200) {
                    bad << " " << b.f.name << ":y=" << y;
                }
            }
        }
    }
    o.seconds = since(t0);
    o.pass = o.pass && points == found && points > 0 && o.seconds < o.limit;
    o.detail = std::to_string(found) + "/" + std::to_string(points) + " K_n levels (n <= 3) with |k| <= bound" +
               ", largest |k|/bound = " + std::to_string(worst_num) + "/" + std::to_string(worst_den) + bad.str();
    return o;
}

// ---- 4 -------------------------------------------------------------------

Outcome criterion4() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    std::int64_t parts = 0, ecount = 0;
    std::ostringstream bad;
    for (const auto& b : oracle_builds()) {
        const Engine& e = *b.eng;
        for (std::size_t n = 1; n <= e.N(); ++n) {
            ++parts;
            PartitionReport p = e.partition_check(n);
            if (!p.disjoint || !oracle::levels_disjoint(e, n) || !p.ok()) {
                o.pass = false;
                bad << " " << b.f.name << ":R'_" << n;
            }
            for (std::size_t m = n; m <= e.M(); ++m) {
                ++ecount;
                EReport r = e.E_report(n, m);
                BigInt limit = n < m ? b.tab.Hprime(n)
                                     : b.tab.Hprime(n - 1) + b.f.primes[n - 1] * b.tab.hprime(n - 1);
                std::int64_t uncovered = oracle::uncovered_levels(e, n, m);
                if (!r.whole_levels || uncovered != r.uncovered || BigInt(static_cast<long>(uncovered)) > limit) {
                    o.pass = false;
                    bad << " " << b.f.name << ":E(" << n << "," << m << ")";
                }
            }
        }
    }
    o.seconds = since(t0);
    o.detail = std::to_string(parts) + " R'_n partitions disjoint, " + std::to_string(ecount) +
               " count(X_m \\ E_{n,m}) bounds hold" + bad.str();
    return o;
}

// ---- 5 -------------------------------------------------------------------

Outcome criterion5() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    std::int64_t rows = 0, ratio_rows = 0;
    std::ostringstream bad;
    auto check = [&](const std::string& name, const ParamSeq& s, const RecurrenceTables& tab, bool strict) {
        BigInt prod = 1;  // q'_0 ... q'_{n-1}
        for (std::size_t n = 0; n < tab.qprime_count() && n < s.size(); ++n) {
            ++rows;
            const BigInt& qp = tab.qprime(n);
            const BigInt& q = s.q(n);
            bool ok = qp >= q - (1 + tab.prime(n));
            // q'_n <= 3 q_n + sigma_n / prod, times prod.
            ok = ok && qp * prod <= 3 * q * prod + s.sigma[n];
            if (strict) {
                ++ratio_rows;
                ok = ok && qp <= 4 * q;
            }
            if (!ok) {
                o.pass = false;
                bad << " " << name << ":n=" << n;
            }
            prod = mul_sparse(prod, qp);
        }
        QPrimeReport rep = qprime_bounds_check(tab, s, strict);
        if (!rep.all_ok()) {
            o.pass = false;
            bad << " " << name << ":report";
        }
    };
    for (const auto& b : oracle_builds()) check(b.f.name, b.f.seq, b.tab, false);
    fam::Family odo = fam::odometer_relaxed(6);
    check("odometer relaxed", odo.seq, RecurrenceTables(odo.seq, odo.primes, 6, 6), false);
    {
        OdometerGen g;
        ScheduleOptions so;
        so.mode = Mode::strict;
        so.steps = 5;
        Schedule s = schedule(g, PhiSpec::power(1, 4), so);
        check("odometer strict", s.seq, RecurrenceTables(s.seq, s.primes, 4, 4), true);
    }
    const StrictRun& sr = strict_rotation();
    check("rotation strict", sr.sched.seq, sr.tab, true);
    o.seconds = since(t0);
    o.detail = std::to_string(rows) + " q' rows within both bounds, " + std::to_string(ratio_rows) +
               " strict rows with q'_n/q_n <= 4" + bad.str();
    return o;
}

// ---- 6 -------------------------------------------------------------------

Outcome criterion6() {
    Outcome o;
    o.limit = kLimitStrictSeconds;
    const StrictRun& sr = strict_rotation();
    auto t0 = std::chrono::steady_clock::now();
    const PhiSpec phi = PhiSpec::power(1, 4);
    BoundsInput in;
    in.seq = &sr.sched.seq;
    in.tab = &sr.tab;
    in.C = sr.sched.C;
    in.Cprime = sr.sched.Cprime;
    in.scheduler_tail = true;
    BoundsReport b = bounds_tables(in, phi);
    EnvelopeReport env = strict_envelopes(b, sr.sched.seq, kStrictDepth);
    o.seconds = sr.seconds + since(t0);
    std::map<std::string, int> ok, total;
    for (const auto& r : env.rows) {
        ++total[r.quantity];
        if (r.ok) ++ok[r.quantity];
    }
    o.pass = env.all_ok() && env.rows.size() == 4 * kStrictDepth && o.seconds < o.limit;
    std::ostringstream d;
    d << "strict rotation [0;3], " << kStrictSteps << " steps, n = 1.." << kStrictDepth << ":";
    for (const auto& [k, v] : total) d << " " << k << " " << ok[k] << "/" << v;
    d << "; Delta(0) = " << b.Delta.at(0).value.hi.str(4) << " (q_0 fixed, informational)";
    o.detail = d.str();
    return o;
}

// ---- 7 -------------------------------------------------------------------

Outcome criterion7() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    int steps = 0;
    std::ostringstream bad;
    const Rational eps = make_rational(1, 2), alpha = make_rational(5, 4);
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        MixingGen g(seed, eps, 3);
        ScheduleOptions so;
        so.steps = 3;
        Schedule s = schedule(g, PhiSpec::power(1, 4), so);
        for (std::size_t n = 1; n < s.seq.size(); ++n) {
            ++steps;
            // Recover a_i = sigma_{n,i} - h_{n-1} from the emitted step alone.
            const auto sp = s.seq.entries[n].spacers_i64();
            const std::int64_t K = to_i64(s.seq.h[n - 1]);
            std::vector<std::int64_t> a(sp.begin() + 1, sp.end());
            for (auto& v : a) v -= K;
            const bool first_zero = sp.front() == 0;
            const bool m_ok = static_cast<std::int64_t>(a.size()) > 3;
            if (!first_zero || !m_ok || !oracle::ornstein_holds(a, K, eps, alpha) ||
                !ornstein_certify(a, K, eps, alpha).ok()) {
                o.pass = false;
                bad << " seed " << seed << " step " << n;
            }
        }
    }
    const std::vector<std::int64_t> zeros(64, 0);
    const bool zero_rejected = !oracle::ornstein_holds(zeros, 4, eps, alpha) && !ornstein_certify(zeros, 4, eps, alpha).ok();
    o.pass = o.pass && zero_rejected && steps > 0;
    o.seconds = since(t0);
    o.detail = std::to_string(steps) + " emitted mixing steps pass the O(m^2) window check; all-zero vector " +
               (zero_rejected ? "rejected" : "ACCEPTED") + bad.str();
    return o;
}

// ---- 8 -------------------------------------------------------------------

Outcome criterion8() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    const PhiSpec phi = PhiSpec::power(1, 4);
    Interval zero = phi.Phi(Interval::of(BigInt(0)));
    const bool zero_exact = mpfr_zero_p(zero.lo.get()) && mpfr_zero_p(zero.hi.get());
    int mono_bad = 0, sub_bad = 0;
    Interval prev = zero;
    for (int i = 0; i < kPhiGrid; ++i) {
        // Geometric grid from 10^-3 to kPhiGridMax; each point is an exact binary rational.
        const double t = 1e-3 * std::pow(kPhiGridMax / 1e-3, static_cast<double>(i) / (kPhiGrid - 1));
        Interval cur = phi.Phi(Interval::of(Rational(t)));
        if (!certainly_le(prev, cur)) ++mono_bad;
        prev = cur;
    }
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> expo(-3.0, 6.0);
    for (int i = 0; i < kPhiPairs; ++i) {
        Rational a(std::pow(10.0, expo(rng))), b(std::pow(10.0, expo(rng)));
        Interval lhs = phi.Phi(Interval::of(Rational(a + b)));
        Interval rhs = phi.Phi(Interval::of(a)) + phi.Phi(Interval::of(b));
        if (!certainly_le(lhs, rhs)) ++sub_bad;
    }
    o.pass = zero_exact && mono_bad == 0 && sub_bad == 0;
    o.seconds = since(t0);
    o.detail = "Phi(0) " + std::string(zero_exact ? "= 0 exactly" : "!= 0") + ", monotone on " +
               std::to_string(kPhiGrid - mono_bad) + "/" + std::to_string(kPhiGrid) + " grid steps, subadditive on " +
               std::to_string(kPhiPairs - sub_bad) + "/" + std::to_string(kPhiPairs) + " pairs";
    return o;
}

// ---- 9 -------------------------------------------------------------------

Outcome criterion9() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    const PhiSpec phi = PhiSpec::power(1, 4);
    std::ostringstream d;
    std::optional<Interval> last;
    for (std::size_t M = 2; M <= 6; ++M) {
        fam::Family f = fam::odometer_relaxed(M);
        Engine eng(f.seq, f.primes, M, M);
        RecurrenceTables tab(f.seq, f.primes, M, M);
        CocycleReport rep = cocycle_histogram(eng, phi);
        BoundsInput in;
        in.seq = &f.seq;
        in.tab = &tab;
        BoundsReport b = bounds_tables(in, phi);
        Comparison c = compare(rep, b);
        // The empirical sum never decreases with M.
        const bool mono = !last || !certainly_lt(c.empirical, *last);
        last = c.empirical;
        o.pass = o.pass && c.ok && mono && rep.bound_violations == 0;
        d << " M=" << M << ": " << c.empirical.hi.str(4) << " <= " << c.bound.lo.str(4);
    }
    o.seconds = since(t0);
    o.detail = "relaxed odometer, phi = t^(1/4):" + d.str();
    return o;
}

// ---- 10 ------------------------------------------------------------------

int run_cli(std::vector<std::string> args) {
    std::vector<char*> argv;
    static std::string prog = "rank1oe";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    return cli::cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion10() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / ("rank1oe_acceptance_" + std::to_string(::getpid()));
    struct Config {
        std::string name;
        std::vector<std::string> gen;
    };
    const std::vector<Config> configs{
        {"mixing", {"--class", "mixing", "--seed", "7", "--ornstein-n", "3", "--depth-n", "3"}},
        {"odometer", {"--class", "odometer", "--depth-n", "5"}},
        {"chacon-skip", {"--class", "chacon-skip", "--depth-n", "4"}},
        {"rotation", {"--class", "rotation", "--theta-cf", "0,3", "--depth-n", "5"}},
    };
    int files = 0;
    std::ostringstream bad;
    for (const auto& c : configs) {
        std::string first[6];
        for (int run = 0; run < 2; ++run) {
            const fs::path dir = root / (c.name + "_" + std::to_string(run));
            std::vector<std::string> g{"gen"};
            g.insert(g.end(), c.gen.begin(), c.gen.end());
            g.insert(g.end(), {"--out", dir.string()});
            int rc = run_cli(g);
            rc = rc ? rc : run_cli({"build", (dir / "params.json").string(), "--out", dir.string()});
            rc = rc ? rc : run_cli({"verify", (dir / "state.json").string(), "--out", dir.string()});
            if (rc != 0) {
                o.pass = false;
                bad << " " << c.name << ":exit " << rc;
            }
            const char* names[6] = {"params.json", "state.json", "tables.json", "report.json", "histogram.csv",
                                    "bounds.csv"};
            for (int i = 0; i < 6; ++i) {
                std::string text = slurp(dir / names[i]);
                if (run == 0) {
                    first[i] = text;
                } else {
                    ++files;
                    if (text != first[i] || text.empty()) {
                        o.pass = false;
                        bad << " " << c.name << "/" << names[i];
                    }
                }
            }
        }
    }
    std::error_code ec;
    fs::remove_all(root, ec);
    o.seconds = since(t0);
    o.detail = std::to_string(files) + " output files byte-identical across two runs" + bad.str();
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", criterion1}, {"cocycle bounds", criterion2},   {"orbit surrogate", criterion3},
        {"partition and E counts", criterion4}, {"q' bounds", criterion5},    {"scheduler envelopes", criterion6},
        {"Ornstein certificate", criterion7},   {"phi normalizer", criterion8}, {"empirical <= bound", criterion9},
        {"determinism", criterion10}};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failed;
        std::string timing = fmt("%.2f s", o.seconds);
        if (o.limit > 0) timing += fmt(", limit %.0f s", o.limit);
        std::cout << "criterion " << (i + 1) << " [" << (o.pass ? "PASS" : "FAIL") << "] " << criteria[i].first << ": "
                  << o.detail << " (" << timing << ")" << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all 10 criteria passed") << std::endl;
    return failed ? 1 : 0;
}
