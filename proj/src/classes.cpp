#include "r1oe/classes.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace r1oe {

// ---- continued fractions -------------------------------------------------

CFResult continued_fraction(const Rational& x, std::size_t count) {
    CFResult out;
    Rational cur = x;
    cur.canonicalize();
    while (out.coeffs.size() < count) {
        BigInt a = floor_div(cur.get_num(), cur.get_den());
        out.coeffs.push_back(a);
        Rational frac = cur - Rational(a);
        if (frac == 0) {
            out.terminated = out.coeffs.size() < count;
            break;
        }
        cur = 1 / frac;
        cur.canonicalize();
    }
    return out;
}

Rational parse_decimal(const std::string& text) {
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    if (s.empty()) throw std::invalid_argument("empty decimal");
    if (s.find('/') != std::string::npos) {
        auto slash = s.find('/');
        BigInt den = parse_dec(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
        return make_rational(parse_dec(s.substr(0, slash)), den);
    }
    bool negative = false;
    std::size_t pos = 0;
    if (s[0] == '-' || s[0] == '+') {
        negative = s[0] == '-';
        pos = 1;
    }
    auto dot = s.find('.', pos);
    std::string ip = s.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    std::string fp = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (ip.empty()) ip = "0";
    if (fp.find_first_not_of("0123456789") != std::string::npos || ip.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("bad decimal '" + text + "'");
    BigInt num = parse_dec(ip + fp);
    BigInt den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
    Rational r = make_rational(negative ? BigInt(-num) : num, den);
    return r;
}

Rational convergent(const std::vector<BigInt>& coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("empty continued fraction");
    Rational r = Rational(coeffs.back());
    for (std::size_t i = coeffs.size() - 1; i-- > 0;) {
        r = Rational(coeffs[i]) + 1 / r;
        r.canonicalize();
    }
    return r;
}

ThetaCF ThetaCF::parse(const std::string& text) {
    ThetaCF out;
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    if (s.size() >= 3 && s.compare(s.size() - 3, 3, "...") == 0) {
        out.repeats_last = true;
        s.erase(s.size() - 3);
        if (!s.empty() && s.back() == ',') s.pop_back();
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw std::invalid_argument("empty coefficient in '" + text + "'");
        out.coeffs.push_back(parse_dec(item));
    }
    if (out.coeffs.size() < 2) throw std::invalid_argument("continued fraction needs q_{-1} and at least q_0");
    for (std::size_t i = 1; i < out.coeffs.size(); ++i)
        if (out.coeffs[i] < 1) throw std::invalid_argument("coefficients after q_{-1} must be positive");
    return out;
}

RotationVerdict rotation_series_verdict(const std::vector<BigInt>& q, bool repeats_last) {
    RotationVerdict v;
    v.partial_sum = 0;
    for (std::size_t k = 0; k + 1 < q.size(); ++k) v.partial_sum += make_rational(BigInt(1), q[k] * q[k + 1]);
    v.partial_sum.canonicalize();
    if (repeats_last && !q.empty()) {
        v.verdict = SeriesVerdict::diverges;
        v.reason = "coefficient " + to_dec(q.back()) + " repeats forever: terms 1/" + to_dec(BigInt(q.back() * q.back())) +
                   " do not tend to zero";
        return v;
    }
    bool doubling = q.size() >= 3;
    for (std::size_t k = 1; k + 1 < q.size(); ++k)
        if (q[k + 1] < 2 * q[k]) doubling = false;
    if (doubling) {
        v.verdict = SeriesVerdict::converged_bound;
        v.reason = "q_{k+1} >= 2 q_k from k = 1 on; continued doubling bounds the tail by 2/(3 q_last^2)";
    } else {
        v.verdict = SeriesVerdict::inconclusive;
        v.reason = "finite prefix without certified growth";
    }
    return v;
}

RotationPrefix rotation_params(const std::vector<BigInt>& cf) {
    if (cf.size() < 2) throw std::invalid_argument("rotation needs q_{-1} and q_0");
    std::vector<BigInt> Q(cf.begin() + 1, cf.end());
    for (const auto& c : Q)
        if (c < 1) throw std::invalid_argument("continued-fraction coefficients must be positive");
    RotationPrefix out;
    BigInt prod = 1;
    std::size_t n0 = Q.size();
    for (std::size_t i = 0; i < Q.size(); ++i) {
        prod *= Q[i];
        if (prod >= 3) {
            n0 = i;
            break;
        }
    }
    if (n0 == Q.size()) throw std::invalid_argument("prefix product Q_0...Q_n0 never reaches 3");
    // Tilde steps: q~_k = Q_k, last spacer h~_{k-1}.
    BigInt h_prev = 0, h = 1;
    CutSpacParam head;
    for (std::size_t k = 0; k < Q.size(); ++k) {
        CutSpacParam step = CutSpacParam::last_only(Q[k], h_prev);
        if (k <= n0) {
            head = k == 0 ? step : compose(head, step);
        } else {
            if (Q[k] < 2) throw std::invalid_argument("coefficient after the collapsed head must be >= 2");
            if (k == n0 + 1) out.entries.push_back(head);
            out.entries.push_back(step);
        }
        if (k == n0) out.h_tilde_n0 = h;
        BigInt next = Q[k] * h + h_prev;
        h_prev = h;
        h = next;
    }
    if (out.entries.empty()) out.entries.push_back(head);
    out.n0 = n0;
    for (const auto& e : out.entries) out.q.push_back(e.q);
    return out;
}

// ---- generators ----------------------------------------------------------

CutSpacParam OdometerGen::next(const ParamSeq&, const BigInt& q_floor) {
    CutSpacParam p;
    p.q = std::max(q_floor, BigInt(2));
    return p;
}

BspGen::BspGen(Entries period, std::string name) : period_(std::move(period)), name_(std::move(name)) {
    if (period_.empty()) throw std::invalid_argument("empty BSP period");
    C_ = 0;
    for (const auto& e : period_) {
        e.validate();
        if (e.first() != 0 || e.last() != 0) throw std::invalid_argument("BSP steps need zero first and last spacers");
        C_ = std::max(C_, e.max());
    }
}

std::unique_ptr<BspGen> BspGen::chacon() {
    return std::make_unique<BspGen>(Entries{CutSpacParam::dense(3, {0, 0, 1, 0})}, "chacon");
}

CutSpacParam BspGen::next(const ParamSeq&, const BigInt& q_floor) {
    CutSpacParam acc = period_[cursor_++ % period_.size()];
    while (acc.q < q_floor) acc = compose(acc, period_[cursor_++ % period_.size()]);
    return acc;
}

std::map<std::string, std::string> BspGen::provenance() const {
    return {{"base_steps_consumed", std::to_string(cursor_)}, {"C", to_dec(C_)}};
}

std::pair<CutSpacParam, std::size_t> gen_bsp_extension(const Entries& base, std::size_t start, const BigInt& min_q) {
    if (start >= base.size()) throw std::out_of_range("no base steps left");
    Classification cls = csp_bsp_classify(derive_sequences(base));
    if (!cls.bsp) throw std::invalid_argument("base sequence is not BSP");
    CutSpacParam acc = base[start];
    std::size_t k = start + 1;
    while (acc.q < min_q) {
        if (k >= base.size()) throw std::out_of_range("base sequence too short to reach min_q");
        acc = compose(acc, base[k++]);
    }
    return {acc, k};
}

RotationGen::RotationGen(std::vector<BigInt> cf) : cf_(std::move(cf)), prefix_(rotation_params(cf_)) {}

CutSpacParam RotationGen::next(const ParamSeq& prefix, const BigInt& q_floor) {
    const std::size_t n = prefix.size();
    if (n < prefix_.entries.size()) return prefix_.entries[n];
    BigInt q = std::max(q_floor, BigInt(2));
    const BigInt& last = n == 1 ? prefix_.h_tilde_n0 : prefix.h.at(n - 1);
    return CutSpacParam::last_only(q, last);
}

std::map<std::string, std::string> RotationGen::provenance() const {
    std::string cf;
    for (std::size_t i = 0; i < cf_.size(); ++i) cf += (i ? "," : "") + to_dec(cf_[i]);
    return {{"theta_cf_prefix", cf}, {"n0", std::to_string(prefix_.n0)}, {"C", to_dec(prefix_.h_tilde_n0)}};
}

// ---- eigenvalue class ------------------------------------------------------

EigenvalueGen::EigenvalueGen(Rational theta_lo, Rational theta_hi) : lo_(std::move(theta_lo)), hi_(std::move(theta_hi)) {
    if (hi_ < lo_) std::swap(lo_, hi_);
}

Interval EigenvalueGen::chord(const BigInt& j) const {
    Rational a = lo_ * Rational(j), b = hi_ * Rational(j);
    BigInt fl = floor_div(a.get_num(), a.get_den());
    Rational f_lo = a - Rational(fl), f_hi = b - Rational(fl);
    if (f_hi >= 1 || (f_lo == 0 && j != 0))
        throw std::runtime_error("theta known too coarsely to place " + to_dec(j) + " theta mod 1");
    const Rational half = make_rational(1, 2);
    Rational d_lo, d_hi;
    if (f_hi <= half) {
        d_lo = f_lo;
        d_hi = f_hi;
    } else if (f_lo >= half) {
        d_lo = 1 - f_hi;
        d_hi = 1 - f_lo;
    } else {
        d_lo = std::min(f_lo, Rational(1 - f_hi));
        d_hi = half;
    }
    Interval d = Interval::hull(Interval::of(d_lo).lo, Interval::of(d_hi).hi);
    return Interval::point(2) * sin_pi_iv(d);
}

std::pair<std::int64_t, Interval> EigenvalueGen::j_delta(std::int64_t n) {
    auto it = jd_cache_.find(n);
    if (it != jd_cache_.end()) return it->second;
    std::int64_t best = 0;
    Interval best_iv;
    for (std::int64_t j = 1; j <= n; ++j) {
        Interval c = chord(BigInt(static_cast<long>(j)));
        if (best == 0 || mpfr_less_p(c.hi.get(), best_iv.hi.get())) {
            best = j;
            best_iv = c;
        }
    }
    Interval bound = Interval::point(2) * pi_iv() / Interval::of(BigInt(static_cast<long>(n)));
    if (!certainly_lt(best_iv, bound))
        throw std::runtime_error("no certified j <= " + std::to_string(n) + " with |1 - lambda^j| < 2 pi / n");
    auto res = std::make_pair(best, best_iv);
    jd_cache_.emplace(n, res);
    return res;
}

bool EigenvalueGen::aux_ok(const BigInt& h, std::int64_t n) {
    Interval H = Interval::of(h);
    for (std::int64_t k : {n, n + 1}) {
        BigInt k4 = BigInt(static_cast<long>(k));
        k4 = k4 * k4 * k4 * k4;
        Interval need = Interval::of(k4) / j_delta(k * k).second;
        if (!certainly_lt(need, H)) return false;
    }
    return true;
}

CutSpacParam EigenvalueGen::next(const ParamSeq& prefix, const BigInt& q_floor) {
    const std::size_t n = prefix.size();
    last_ells_.clear();
    if (n == 0) {
        BigInt q = std::max(q_floor, BigInt(3));
        while (!aux_ok(q, 1)) {
            if (q > BigInt(100000000)) throw std::runtime_error("auxiliary condition unreachable at step 0");
            ++q;
        }
        // C' covers steps 1 and 2; from step 3 on sigma_n <= q_n h_{n-1} by the auxiliary condition.
        auto L = [&](std::int64_t k) {
            return floor_lo(Interval::point(2) * pi_iv() / j_delta(k).second);
        };
        BigInt c2 = L(4) * j_delta(4).first;
        BigInt c2q = (c2 + q - 1) / q;
        Cprime_ = std::max({BigInt(1), L(1), c2q});
        CutSpacParam p;
        p.q = q;
        return p;
    }
    const auto nn = static_cast<std::int64_t>(n);
    const auto [j, delta] = j_delta(nn * nn);
    const BigInt L = floor_lo(Interval::point(2) * pi_iv() / delta);
    const Interval target = Interval::point(2) * pi_iv() / Interval::of(BigInt(static_cast<long>(nn * nn)));
    const BigInt& hn = prefix.h.at(n);
    const BigInt jj = BigInt(static_cast<long>(j));
    std::vector<BigInt> spacers{0};
    BigInt S = 0;
    const BigInt qmin = std::max(q_floor, BigInt(2));
    for (BigInt m = 1;; ++m) {
        // ell^{(n)}_m: least ell <= L with |1 - lambda^{m h_n + (S + ell) j}| < 2 pi / n^2.
        BigInt ell = 0;
        for (BigInt c = 1; c <= L; ++c) {
            if (certainly_lt(chord(m * hn + (S + c) * jj), target)) {
                ell = c;
                break;
            }
        }
        if (ell == 0)
            throw std::runtime_error("ell search exhausted at step " + std::to_string(n) + ", m = " + to_dec(m));
        S += ell;
        last_ells_.push_back(to_i64(ell));
        spacers.push_back(ell * jj);
        BigInt q = m + 1;
        if (q >= qmin && aux_ok(q * hn + S * jj, nn + 1)) {
            spacers.push_back(0);
            return CutSpacParam::dense(q, spacers);
        }
        if (q > BigInt(10000000)) throw std::runtime_error("eigenvalue step did not reach the auxiliary condition");
    }
}

std::map<std::string, std::string> EigenvalueGen::provenance() const {
    return {{"theta_lo", to_dec(lo_)}, {"theta_hi", to_dec(hi_)}, {"C", "7"}, {"Cprime", to_dec(Cprime_)}};
}

// ---- Ornstein sampling -----------------------------------------------------

void OrnsteinParams::validate() const {
    if (N < 1 || K < 1) throw std::invalid_argument("Ornstein N and K must be positive");
    if (eps <= 0 || eps >= 1) throw std::invalid_argument("Ornstein eps must lie in (0, 1)");
    if (alpha <= 0) throw std::invalid_argument("Ornstein alpha must be positive");
}

namespace {

// Largest k with k < (1 - eps) m, or -1.
std::int64_t k_limit_of(std::int64_t m, const Rational& eps) {
    Rational bound = (1 - eps) * Rational(BigInt(static_cast<long>(m)));
    BigInt c;
    mpz_cdiv_q(c.get_mpz_t(), bound.get_num_mpz_t(), bound.get_den_mpz_t());
    return to_i64(c) - 1;
}

// H * K < alpha (m - k), exactly.
bool H_within(std::int64_t H, std::int64_t K, std::int64_t windows, const Rational& alpha) {
    BigInt lhs = BigInt(static_cast<long>(H)) * BigInt(static_cast<long>(K)) * alpha.get_den();
    BigInt rhs = alpha.get_num() * BigInt(static_cast<long>(windows));
    return lhs < rhs;
}

OrnsteinCertificate certify_impl(const std::vector<std::int64_t>& a, std::int64_t K, const Rational& eps,
                                 const Rational& alpha, bool early_exit) {
    OrnsteinCertificate c;
    const auto m = static_cast<std::int64_t>(a.size());
    c.m = m;
    c.K = K;
    c.k_limit = k_limit_of(m, eps);
    c.max_H.assign(m, 0);
    std::vector<std::int64_t> S(m + 1, 0);
    for (std::int64_t i = 0; i < m; ++i) S[i + 1] = S[i] + a[i];
    std::int64_t lo = *std::min_element(S.begin(), S.end()), hi = *std::max_element(S.begin(), S.end());
    const std::int64_t R = hi - lo;
    std::vector<std::int32_t> cnt(2 * R + 1, 0);
    std::vector<std::int64_t> touched;
    c.window_ok = true;
    c.H_ok = true;
    // Shortest window counts first: those are the binding H bounds.
    for (std::int64_t k = m - 1; k >= 0; --k) {
        touched.clear();
        std::int64_t best = 0;
        for (std::int64_t j = 1; j + k <= m; ++j) {
            std::int64_t w = S[j + k] - S[j - 1];
            c.max_abs_window = std::max(c.max_abs_window, w < 0 ? -w : w);
            std::int32_t& slot = cnt[w + R];
            if (slot == 0) touched.push_back(w + R);
            best = std::max<std::int64_t>(best, ++slot);
        }
        for (auto t : touched) cnt[t] = 0;
        c.max_H[k] = best;
        if (k <= c.k_limit && !H_within(best, K, m - k, alpha)) {
            c.H_ok = false;
            if (early_exit) break;
        }
    }
    if (c.max_abs_window > K) c.window_ok = false;
    return c;
}

}  // namespace

OrnsteinCertificate ornstein_certify(const std::vector<std::int64_t>& a, std::int64_t K, const Rational& eps,
                                     const Rational& alpha) {
    return certify_impl(a, K, eps, alpha, false);
}

OrnsteinSample ornstein_sample(const OrnsteinParams& p) {
    p.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(p.seed), static_cast<std::uint32_t>(p.seed >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::int64_t> level(0, p.K);
    std::int64_t m = p.N + 1;
    auto feasible = [&](std::int64_t mm) {
        std::int64_t kl = k_limit_of(mm, p.eps);
        // Some window value occurs at least once, so the bound must exceed 1.
        return kl < 0 || H_within(1, p.K, mm - kl, p.alpha);
    };
    while (!feasible(m)) {
        if (m > p.max_m) throw std::runtime_error("Ornstein bound infeasible below max_m");
        m += std::max<std::int64_t>(1, m / 8);
    }
    OrnsteinSample out;
    std::int64_t since_growth = 0;
    const std::int64_t per_m = std::max<std::int64_t>(1, std::min<std::int64_t>(200, p.max_tries / 4));
    std::vector<std::int64_t> a;
    while (out.tries < p.max_tries) {
        ++out.tries;
        ++since_growth;
        // Prefix sums S_0..S_m uniform in [0, K], so every window sum lies in [-K, K].
        std::int64_t prev = level(rng);
        a.assign(m, 0);
        for (std::int64_t i = 0; i < m; ++i) {
            std::int64_t s = level(rng);
            a[i] = s - prev;
            prev = s;
        }
        OrnsteinCertificate c = certify_impl(a, p.K, p.eps, p.alpha, true);
        if (c.ok()) {
            out.a = a;
            out.cert = ornstein_certify(a, p.K, p.eps, p.alpha);
            return out;
        }
        if (since_growth >= per_m) {
            since_growth = 0;
            m += std::max<std::int64_t>(1, m / 2);
            if (m > p.max_m) break;
        }
    }
    throw std::runtime_error("Ornstein sampling budget exhausted after " + std::to_string(out.tries) +
                             " tries (m reached " + std::to_string(m) + ")");
}

MixingGen::MixingGen(std::uint64_t seed, Rational eps, std::optional<std::int64_t> N_override, std::int64_t q0)
    : seed_(seed), eps_(std::move(eps)), N_override_(N_override), q0_(q0) {}

CutSpacParam mixing_step(const ParamSeq& prev, std::size_t n, const OrnsteinSample& s) {
    if (n == 0 || n > prev.size()) throw std::out_of_range("mixing step needs 1 <= n <= prefix length");
    const BigInt& K = prev.h.at(n - 1);
    std::vector<BigInt> sp{0};
    for (auto ai : s.a) {
        BigInt v = BigInt(static_cast<long>(ai)) + K;
        if (v < 0) throw std::logic_error("negative spacer from an Ornstein vector");
        sp.push_back(v);
    }
    return CutSpacParam::dense(BigInt(static_cast<long>(s.a.size())), sp);
}

CutSpacParam MixingGen::next(const ParamSeq& prefix, const BigInt& q_floor) {
    const std::size_t n = prefix.size();
    if (n == 0) {
        CutSpacParam p;
        p.q = std::max(q_floor, BigInt(static_cast<long>(q0_)));
        return p;
    }
    OrnsteinParams op;
    op.K = to_i64(prefix.h.at(n - 1));
    std::int64_t N = 1;
    if (N_override_) {
        N = *N_override_;
    } else {
        for (std::size_t i = 0; i < n && N < 1000000000000LL; ++i) N *= 10;
    }
    N = std::max(N, to_i64(q_floor) - 1);
    op.N = N;
    op.eps = eps_;
    op.seed = seed_ * 1000003ULL + n;
    OrnsteinSample s = ornstein_sample(op);
    samples_.push_back(s);
    return mixing_step(prefix, n, s);
}

std::map<std::string, std::string> MixingGen::provenance() const {
    std::map<std::string, std::string> p{{"seed", std::to_string(seed_)}, {"eps", to_dec(eps_)}, {"alpha", "5/4"}};
    if (N_override_) p["N"] = std::to_string(*N_override_);
    std::string tries;
    for (std::size_t i = 0; i < samples_.size(); ++i) tries += (i ? "," : "") + std::to_string(samples_[i].tries);
    p["ornstein_tries"] = tries;
    return p;
}

// ---- scheduler -----------------------------------------------------------

std::string to_string(Mode m) { return m == Mode::strict ? "strict" : "relaxed"; }

Mode parse_mode(const std::string& s) {
    if (s == "strict") return Mode::strict;
    if (s == "relaxed") return Mode::relaxed;
    throw std::invalid_argument("mode must be strict or relaxed");
}

namespace {

using Pred = std::function<bool(const Interval&)>;

Interval I(const BigInt& x) { return Interval::of(x); }

Interval pow2_iv(long e) {
    Interval r = Interval::point(1);
    if (e >= 0) {
        mpfr_mul_2si(r.lo.get(), r.lo.get(), e, MPFR_RNDD);
        mpfr_mul_2si(r.hi.get(), r.hi.get(), e, MPFR_RNDU);
    } else {
        mpfr_mul_2si(r.lo.get(), r.lo.get(), e, MPFR_RNDD);
        mpfr_mul_2si(r.hi.get(), r.hi.get(), e, MPFR_RNDU);
    }
    return r;
}

// Least kappa >= 1 with pred(h kappa); pred is monotone in kappa. Small
// values are exact; above 2^256 the result is ceil(2^x) for the returned x.
struct KappaCand {
    bool exact = true;
    BigInt k;
    Real x;
    Real log2_hi() const { return exact ? log2_iv(I(k)).hi : x; }
    BigInt value() const { return exact ? k : ceil_hi(exp2_iv(Interval::hull(x, x))); }
};

bool cand_less(const KappaCand& a, const KappaCand& b) {
    if (a.exact && b.exact) return a.k < b.k;
    return mpfr_less_p(a.log2_hi().get(), b.log2_hi().get()) != 0;
}

KappaCand least_kappa(const BigInt& h, const Pred& pred) {
    const Interval H = I(h);
    auto at = [&](const BigInt& k) { return pred(H * I(k)); };
    KappaCand out;
    out.k = 1;
    if (at(out.k)) return out;
    // Exponential search on e = log2 kappa.
    long e = 1;
    while (!pred(H * pow2_iv(e))) {
        e *= 2;
        if (e > (1L << 40)) throw std::runtime_error("kappa search diverged");
    }
    const long e_lo = e / 2;
    if (e <= 512) {
        BigInt lo = pow2(e_lo), hi = pow2(e);  // pred(lo) false, pred(hi) true
        while (hi - lo > 1) {
            BigInt mid = (lo + hi) / 2;
            if (at(mid))
                hi = mid;
            else
                lo = mid;
        }
        out.k = hi;
        return out;
    }
    // Bisection on the exponent to relative tolerance 2^-40; hi always passes.
    Real lo(static_cast<double>(e_lo)), hi(static_cast<double>(e));
    for (int it = 0; it < 200; ++it) {
        Real w, tol, mid;
        mpfr_sub(w.get(), hi.get(), lo.get(), MPFR_RNDU);
        mpfr_mul_2si(tol.get(), hi.get(), -40, MPFR_RNDD);
        if (mpfr_lessequal_p(w.get(), tol.get())) break;
        mpfr_add(mid.get(), lo.get(), hi.get(), MPFR_RNDN);
        mpfr_div_2ui(mid.get(), mid.get(), 1, MPFR_RNDN);
        if (pred(H * exp2_iv(Interval::hull(mid, mid))))
            hi = mid;
        else
            lo = mid;
    }
    out.exact = false;
    out.k = 0;
    out.x = hi;
    return out;
}

}  // namespace

StepFloor strict_floor(const ParamSeq& prefix, const RecurrenceTables& tab, const std::vector<BigInt>& primes,
                       const PhiSpec& phi, const BigInt& C, const BigInt& Cprime) {
    const std::size_t n = prefix.size();
    if (n >= 1 && tab.qprime_count() < n) throw std::invalid_argument("strict floor needs q'_0..q'_{n-1}");
    if (primes.size() <= n) throw std::invalid_argument("strict floor needs p_n");
    const BigInt one_b = 1, zero_b = 0;
    auto hp = [&](std::size_t k) -> const BigInt& { return k == 0 ? one_b : tab.hprime(k); };
    auto Hp = [&](std::size_t k) -> const BigInt& { return k == 0 ? zero_b : tab.Hprime(k); };
    const BigInt& hn = prefix.h.at(n);
    const BigInt& pn = primes[n];
    BigInt Q = 1;
    for (std::size_t k = 0; k < n; ++k) Q = mul_sparse(Q, prefix.q(k));
    const BigInt A = Hp(n) + pn * hp(n);
    const Interval iA = I(A), ihp = I(hp(n)), iQ = I(Q), iC = I(std::max(C, BigInt(1)));
    const Interval two_n = pow2_iv(static_cast<long>(n));
    // H'_l h'_{l-1} and h'_l increase with l, so l = n is the worst case.
    const Interval i7 = n >= 1 ? I(Hp(n)) * I(hp(n - 1)) : Interval::point(0);
    const Interval ihp_max = ihp;

    auto S = [&](const Interval& t, unsigned long k) {
        Interval tk = pow_ui(t, k);
        return phi.phi(tk) + phi.phi(iC * tk);
    };
    const Interval one = Interval::point(1);
    std::vector<std::pair<std::string, Pred>> preds = {
        {"critpr4",
         [&](const Interval& t) {
             return certainly_le((one + Interval::point(2) * iA) * ihp * ihp * S(t, 3) / t, one / two_n);
         }},
        {"critpr4bis", [&](const Interval& t) { return certainly_le(ihp * ihp * S(t, 3), t / (two_n * iQ)); }},
        {"critpr5",
         [&](const Interval& t) { return certainly_le(Interval::point(4) * ihp * S(t, 2) / t, one / two_n); }},
        {"critpr6",
         [&](const Interval& t) {
             return certainly_le(iA * ihp * S(t, 1) / t, one / (two_n * Interval::point(2)));
         }},
        {"critpr8", [&](const Interval& t) { return certainly_le(ihp_max * S(t, 1), t / (two_n * iQ)); }},
    };
    if (n >= 1)
        preds.push_back({"critpr7", [&](const Interval& t) {
                             return certainly_le(i7 * S(t, 1) / t, one / (two_n * Interval::point(4)));
                         }});

    StepFloor f;
    KappaCand best;
    best.k = 1;
    f.binding = "none";
    auto raise = [&](KappaCand c, const std::string& name) {
        if (cand_less(best, c)) {
            best = std::move(c);
            f.binding = name;
        }
    };
    auto exact = [](BigInt v) {
        KappaCand c;
        c.k = std::move(v);
        return c;
    };
    BigInt mx = pn;
    for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, tab.qprime(k));
    raise(exact(mx + 1), "critpr1");
    if (n >= 1) {
        BigInt need = BigInt(static_cast<long>(n)) * A;
        raise(exact((need + hn - 1) / hn), "critpr2");
    }
    Rational thr = phi.monotone_threshold();
    if (thr > 0) {
        BigInt tn;
        mpz_cdiv_q(tn.get_mpz_t(), thr.get_num_mpz_t(), thr.get_den_mpz_t());
        raise(exact((tn + hn - 1) / hn), "monotone-threshold");
    }
    for (const auto& [name, pred] : preds) raise(least_kappa(hn, pred), name);
    BigInt kappa = best.value();
    // Every predicate must hold at t = h_n kappa.
    const Interval ik = I(kappa);
    const Interval t = I(hn) * ik;
    for (const auto& [name, pred] : preds)
        if (!pred(t)) throw std::logic_error("strict floor: " + name + " fails at the chosen kappa");
    f.log2_kappa = log2_iv(ik).mid_double();
    f.kappa_bits = mpz_sizeinbase(kappa.get_mpz_t(), 2);
    if (f.kappa_bits <= StepFloor::kept_bits) f.kappa = kappa;

    f.floor = std::move(kappa);
    f.q_binding = "kappa";
    auto lift = [&](BigInt v, const std::string& name) {
        if (v > f.floor) {
            f.floor = std::move(v);
            f.q_binding = name;
        }
    };
    lift(Cprime * hn + 1 + pn, "critpr3");
    for (std::size_t k = 0; k < n; ++k) {
        BigInt v = Cprime * prefix.q(k);
        mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), n - k);
        lift(v, "critpr10");
    }
    if (n == 0) lift(3, "q0>=3");
    return f;
}

Schedule schedule(Generator& gen, const PhiSpec& phi, const ScheduleOptions& opt) {
    if (opt.steps < 1) throw std::invalid_argument("schedule needs at least one step");
    if (opt.mode == Mode::strict) {
        if (!gen.strict_capable())
            throw std::invalid_argument("class '" + gen.kind() +
                                        "' has dense steps; strict mode cannot reach its floors (use relaxed)");
        if (!phi.certified()) throw std::invalid_argument("strict mode needs a certified phi family");
    }
    Schedule out;
    out.cls = gen.kind();
    out.mode = opt.mode;
    out.primes = extend_primes(opt.primes, opt.steps + 1);
    out.seq = derive_sequences({});
    RecurrenceTables tab;
    std::vector<BigInt> qprime;
    for (std::size_t n = 0; n < opt.steps; ++n) {
        if (n >= 1) {
            if (tab.N() == 0)
                tab = RecurrenceTables(out.seq, out.primes, n, n);
            else
                tab.grow(out.seq, n, n);
            qprime.push_back(tab.qprime(n - 1));
        }
        KappaEntry e;
        e.n = n;
        BigInt floor;
        if (opt.mode == Mode::strict) {
            StepFloor f = strict_floor(out.seq, tab, out.primes, phi, gen.C(), gen.Cprime());
            e.kappa = std::move(f.kappa);
            e.kappa_bits = f.kappa_bits;
            e.log2_kappa = f.log2_kappa;
            e.binding = f.binding;
            e.q_binding = f.q_binding;
            floor = std::move(f.floor);
        } else {
            floor = std::max({opt.min_q, BigInt(out.primes[n] + 1), BigInt(n == 0 ? 3 : 2)});
            for (const auto& qp : qprime) floor = std::max(floor, BigInt(qp + 1));
            e.binding = "relaxed";
            e.q_binding = "relaxed-floor";
        }
        CutSpacParam step = gen.next(out.seq, floor);
        if (n < gen.fixed_steps()) {
            e.q_binding = "fixed";
            if (opt.mode == Mode::strict && n >= 1 && step.q < floor)
                throw std::invalid_argument("listed coefficient for step " + std::to_string(n) +
                                            " is below the strict floor");
        }
        floor = 0;
        BigInt mx = out.primes[n];
        for (const auto& qp : qprime) mx = std::max(mx, qp);
        e.crit1_holds = step.q > mx;
        append_step(out.seq, std::move(step));
        out.log.push_back(std::move(e));
    }
    out.C = gen.C();
    out.Cprime = gen.Cprime();
    return out;
}

namespace {

class BranchGen : public Generator {
public:
    BranchGen(RotationGen& inner, std::vector<int> bits) : inner_(inner), bits_(std::move(bits)) {}
    std::string kind() const override { return "rotation-branch"; }
    BigInt C() const override { return inner_.C(); }
    BigInt Cprime() const override { return inner_.Cprime(); }
    bool strict_capable() const override { return true; }
    std::size_t fixed_steps() const override { return inner_.fixed_steps(); }
    CutSpacParam next(const ParamSeq& prefix, const BigInt& q_floor) override {
        const std::size_t n = prefix.size();
        if (n < fixed_steps()) return inner_.next(prefix, q_floor);
        const std::size_t i = n - fixed_steps();
        BigInt bump = i < bits_.size() ? BigInt(bits_[i]) : BigInt(0);
        return inner_.next(prefix, q_floor + bump);
    }

private:
    RotationGen& inner_;
    std::vector<int> bits_;
};

}  // namespace

BranchFamily branch_family(const std::vector<BigInt>& cf_prefix, const PhiSpec& phi, Mode mode,
                           const std::vector<std::vector<int>>& bits, const std::vector<BigInt>& primes) {
    BranchFamily fam;
    for (const auto& b : bits) {
        for (int v : b)
            if (v != 0 && v != 1) throw std::invalid_argument("branch bits must be 0 or 1");
        RotationGen rot(cf_prefix);
        BranchGen gen(rot, b);
        ScheduleOptions opt;
        opt.mode = mode;
        opt.steps = rot.fixed_steps() + b.size();
        opt.primes = primes;
        Branch br;
        br.bits = b;
        br.sched = schedule(gen, phi, opt);
        std::vector<BigInt> q;
        for (std::size_t k = 0; k < br.sched.seq.size(); ++k) q.push_back(br.sched.seq.q(k));
        br.verdict = rotation_series_verdict(q, false);
        fam.branches.push_back(std::move(br));
    }
    fam.injective = true;
    for (std::size_t i = 0; i < fam.branches.size(); ++i)
        for (std::size_t j = i + 1; j < fam.branches.size(); ++j) {
            if (fam.branches[i].bits == fam.branches[j].bits) continue;
            bool same = fam.branches[i].sched.seq.size() == fam.branches[j].sched.seq.size();
            for (std::size_t k = 0; same && k < fam.branches[i].sched.seq.size(); ++k)
                same = fam.branches[i].sched.seq.q(k) == fam.branches[j].sched.seq.q(k);
            if (same) fam.injective = false;
        }
    return fam;
}

}  // namespace r1oe
