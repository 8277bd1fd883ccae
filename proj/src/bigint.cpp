#include "r1oe/bigint.hpp"

#include <stdexcept>

namespace r1oe {

std::string to_dec(const BigInt& x) { return x.get_str(10); }

std::string to_dec(const Rational& x) { return x.get_str(10); }

BigInt parse_dec(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("bad integer literal: " + s);
    for (std::size_t k = i; k < s.size(); ++k)
        if (s[k] < '0' || s[k] > '9') throw std::invalid_argument("bad integer literal: " + s);
    BigInt out;
    if (out.set_str(s[0] == '+' ? s.substr(1) : s, 10) != 0)
        throw std::invalid_argument("bad integer literal: " + s);
    return out;
}

bool fits_i64(const BigInt& x) {
    static const BigInt lo("-9223372036854775808");
    static const BigInt hi("9223372036854775807");
    return x >= lo && x <= hi;
}

std::int64_t to_i64(const BigInt& x) {
    if (!fits_i64(x)) throw std::overflow_error("integer does not fit in 64 bits");
    if (x.fits_slong_p()) return x.get_si();
    return std::stoll(x.get_str(10));
}

BigInt mul_sparse(const BigInt& a, const BigInt& b) {
    if (sgn(a) == 0 || sgn(b) == 0) return BigInt(0);
    mp_bitcnt_t za = mpz_scan1(a.get_mpz_t(), 0);
    mp_bitcnt_t zb = mpz_scan1(b.get_mpz_t(), 0);
    if (za < 64 && zb < 64) return a * b;
    BigInt oa, ob, out;
    mpz_fdiv_q_2exp(oa.get_mpz_t(), a.get_mpz_t(), za);
    mpz_fdiv_q_2exp(ob.get_mpz_t(), b.get_mpz_t(), zb);
    out = oa * ob;
    mpz_mul_2exp(out.get_mpz_t(), out.get_mpz_t(), za + zb);
    return out;
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
    if (sgn(b) <= 0) throw std::domain_error("floor_div needs a positive divisor");
    BigInt q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

Rational make_rational(const BigInt& num, const BigInt& den) {
    if (sgn(den) == 0) throw std::domain_error("zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

BigInt pow2(unsigned long e) {
    BigInt out(1);
    mpz_mul_2exp(out.get_mpz_t(), out.get_mpz_t(), e);
    return out;
}

std::vector<std::pair<BigInt, unsigned>> trial_factor(BigInt n, unsigned long limit) {
    std::vector<std::pair<BigInt, unsigned>> out;
    if (n < 0) n = -n;
    if (n < 2) return out;
    for (unsigned long p = 2; p <= limit; p += (p == 2 ? 1 : 2)) {
        if (BigInt(p) * p > n) break;
        unsigned e = 0;
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
            ++e;
        }
        if (e) out.emplace_back(BigInt(p), e);
    }
    if (n > 1) {
        bool prime = mpz_probab_prime_p(n.get_mpz_t(), 30) > 0;
        out.emplace_back(n, prime ? 1u : 0u);
    }
    return out;
}

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace r1oe
