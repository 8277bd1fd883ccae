#include "r1oe/interval.hpp"
#include "r1oe/oe_engine.hpp"

#include <algorithm>
#include <cstdlib>

namespace r1oe {

namespace {

std::vector<unsigned long> small_primes(std::size_t count) {
    std::vector<unsigned long> out;
    for (unsigned long c = 2; out.size() < count; ++c)
        if (is_prime_u64(c)) out.push_back(c);
    return out;
}

std::string crit1_text(std::optional<std::size_t> k) {
    std::string s = "criterion q_n > max(p_n, q'_0, ..., q'_{n-1})";
    if (k) return s + " fails at n=" + std::to_string(*k);
    return s + " holds on the built prefix";
}

}  // namespace

std::vector<BigInt> default_primes(std::size_t count) {
    std::vector<BigInt> out;
    auto ps = small_primes(64);
    for (std::size_t n = 0; n < count; ++n) {
        std::size_t v = 0, x = n + 1;
        while (x % 2 == 0) {
            x /= 2;
            ++v;
        }
        out.emplace_back(ps.at(v));
    }
    return out;
}

std::vector<BigInt> extend_primes(const std::vector<BigInt>& given, std::size_t count) {
    if (given.empty()) return default_primes(count);
    std::vector<BigInt> out;
    for (std::size_t n = 0; n < count; ++n) out.push_back(given[n % given.size()]);
    return out;
}

IllPosed::IllPosed(std::size_t n_, std::size_t m_, std::string what_kind, std::optional<std::size_t> crit)
    : std::runtime_error("construction ill-posed at step (" + std::to_string(n_) + "," + std::to_string(m_) +
                         "): " + what_kind + " is zero; " + crit1_text(crit)),
      n(n_),
      m(m_),
      crit1_violation(crit) {}

RecurrenceTables::RecurrenceTables(const ParamSeq& seq, const std::vector<BigInt>& primes, std::size_t N,
                                   std::size_t M)
    : primes_(primes) {
    grow(seq, N, M);
}

void RecurrenceTables::grow(const ParamSeq& seq, std::size_t N, std::size_t M) {
    if (N < 1 || M < N) throw std::invalid_argument("recurrence tables need 1 <= N <= M");
    if (M > seq.size()) throw std::invalid_argument("recurrence tables need M <= number of steps");
    if (primes_.size() < N) throw std::invalid_argument("not enough primes for N steps");
    for (const auto& p : primes_)
        if (p < 2 || mpz_probab_prime_p(p.get_mpz_t(), 30) == 0)
            throw std::invalid_argument("prime schedule contains a non-prime: " + to_dec(p));
    N = std::max(N, N_);
    M = std::max(M, M_);
    r_.resize(N + 1);
    t_.resize(N + 1);
    left_.resize(N + 1);
    for (auto& row : left_) row.resize(M + 1, BigInt(-1));
    for (auto& row : r_) row.resize(M + 1, BigInt(-1));
    for (auto& row : t_) row.resize(M + 1, BigInt(-1));
    // Stage one: all h_1 levels are candidates, so t_{0,1} = sigma_0.
    for (std::size_t m = 1; m <= M; ++m) t_[0][m] = seq.sigma[m - 1];
    stage_one_divergence_ = seq.sigma[0] > 0;
    qp_.resize(N, BigInt(-1));

    auto crit = [&](std::size_t upto) -> std::optional<std::size_t> {
        BigInt mx = 0;
        for (std::size_t k = 0; k < upto && k < seq.size(); ++k) {
            if (seq.q(k) <= std::max(mx, primes_[k])) return k;
            if (k < qp_.size() && qp_[k] > 0) mx = std::max(mx, qp_[k]);
        }
        return std::nullopt;
    };

    for (std::size_t m = 1; m <= M; ++m) {
        for (std::size_t n = 1; n <= std::min(N, m); ++n) {
            if (r_[n][m] >= 0) continue;
            if (n == m) {
                BigInt r = seq.q(n - 1) + t_[n - 1][n];
                const BigInt& p = primes_[n - 1];
                BigInt qprime = floor_div(r - 1, p) * p;
                if (qprime <= 0) throw IllPosed(n, m, "q'_" + std::to_string(n - 1), crit(n));
                left_[n][m] = r - qprime;
                r_[n][m] = r;
                qp_[n - 1] = qprime;
                t_[n][m] = 1;
            } else {
                const BigInt& qprime = qp_[n - 1];
                BigInt r = mul_sparse(seq.q(m - 1), left_[n][m - 1]) + t_[n - 1][m];
                BigInt t, rem;
                mpz_fdiv_qr(t.get_mpz_t(), rem.get_mpz_t(), BigInt(r - 1).get_mpz_t(), qprime.get_mpz_t());
                if (t <= 0) throw IllPosed(n, m, "t_{" + std::to_string(n) + "," + std::to_string(m) + "}", crit(m));
                r_[n][m] = std::move(r);
                t_[n][m] = std::move(t);
                left_[n][m] = rem + 1;
            }
        }
    }
    N_ = N;
    M_ = M;
    if (hp_.empty()) {
        hp_.assign(1, BigInt(1));
        Hp_.assign(1, BigInt(0));
    }
    for (std::size_t k = hp_.size() - 1; k < N_; ++k) {
        hp_.push_back(hp_.back() * qp_[k]);
        Hp_.push_back(Hp_.back() + hp_.back());
    }
}

std::vector<std::size_t> RecurrenceTables::crit1_failures(const ParamSeq& seq) const {
    std::vector<std::size_t> out;
    BigInt mx = 0;
    for (std::size_t k = 0; k < N_ && k < seq.size(); ++k) {
        if (seq.q(k) <= std::max(mx, primes_[k])) out.push_back(k);
        mx = std::max(mx, qp_[k]);
    }
    return out;
}

bool QPrimeReport::all_ok() const {
    for (const auto& r : rows)
        if (!r.lower_ok || !r.upper_ok || (r.ratio_ok && !*r.ratio_ok)) return false;
    return true;
}

QPrimeReport qprime_bounds_check(const RecurrenceTables& tab, const ParamSeq& seq, bool scheduler_attached) {
    QPrimeReport rep;
    for (std::size_t n = 0; n < tab.qprime_count() && n < seq.size(); ++n) {
        QPrimeRow row;
        row.n = n;
        const BigInt& qp = tab.qprime(n);
        const BigInt& q = seq.q(n);
        row.lower_ok = qp >= q - (1 + tab.prime(n));
        const BigInt& hp = tab.hprime(n);
        row.upper_ok = qp * hp <= 3 * q * hp + seq.sigma[n];
        if (scheduler_attached) row.ratio_ok = qp <= 4 * q;
        row.ratio = (Interval::of(qp) / Interval::of(q)).mid_double();
        rep.rows.push_back(row);
    }
    return rep;
}

Universality universality_check(const RecurrenceTables& tab) {
    Universality u;
    for (std::size_t n = 0; n < tab.qprime_count(); ++n) {
        const BigInt& qp = tab.qprime(n);
        if (!mpz_divisible_p(qp.get_mpz_t(), tab.prime(n).get_mpz_t())) {
            u.divisible = false;
            u.failures.push_back(n);
        }
        if (mpz_sizeinbase(qp.get_mpz_t(), 2) > 4096) continue;
        for (const auto& [f, e] : trial_factor(qp)) u.prime_factors[to_dec(f)] += std::max(e, 1u);
    }
    return u;
}

unsigned worker_count() {
    const char* env = std::getenv("RANK1_OE_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) return 1;
    return static_cast<unsigned>(std::min<long>(v, 256));
}

}  // namespace r1oe
