#include "r1oe/interval.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace r1oe {

namespace {

mpfr_prec_t g_prec = 256;

void widen_exponent_range() {
    static const bool done = [] {
        mpfr_set_emax(mpfr_get_emax_max());
        mpfr_set_emin(mpfr_get_emin_min());
        return true;
    }();
    (void)done;
}

}  // namespace

void set_real_precision(mpfr_prec_t bits) { g_prec = bits; }
mpfr_prec_t real_precision() { return g_prec; }

Real::Real() {
    widen_exponent_range();
    mpfr_init2(v_, g_prec);
    mpfr_set_zero(v_, 1);
}

Real::Real(double v) {
    widen_exponent_range();
    mpfr_init2(v_, g_prec);
    mpfr_set_d(v_, v, MPFR_RNDN);
}

Real::Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
}

Real::Real(Real&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
}

Real& Real::operator=(const Real& o) {
    if (this != &o) {
        mpfr_set_prec(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
}

Real& Real::operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
}

Real::~Real() { mpfr_clear(v_); }

std::string Real::str(int digits) const {
    if (mpfr_nan_p(v_)) return "nan";
    if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
    std::vector<char> buf(64 + static_cast<std::size_t>(digits));
    mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", digits, v_);
    return std::string(buf.data());
}

Interval Interval::point(double v) {
    Interval r;
    mpfr_set_d(r.lo.get(), v, MPFR_RNDD);
    mpfr_set_d(r.hi.get(), v, MPFR_RNDU);
    return r;
}

Interval Interval::of(const BigInt& x) {
    Interval r;
    mpfr_set_z(r.lo.get(), x.get_mpz_t(), MPFR_RNDD);
    mpfr_set_z(r.hi.get(), x.get_mpz_t(), MPFR_RNDU);
    return r;
}

Interval Interval::of(const Rational& x) {
    Interval r;
    mpfr_set_q(r.lo.get(), x.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(r.hi.get(), x.get_mpq_t(), MPFR_RNDU);
    return r;
}

Interval Interval::hull(const Real& a, const Real& b) {
    Interval r;
    mpfr_min(r.lo.get(), a.get(), b.get(), MPFR_RNDD);
    mpfr_max(r.hi.get(), a.get(), b.get(), MPFR_RNDU);
    return r;
}

double Interval::mid_double() const {
    Real m;
    mpfr_add(m.get(), lo.get(), hi.get(), MPFR_RNDN);
    mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
    return m.to_double();
}

std::string Interval::str(int digits) const { return "[" + lo.str(digits) + ", " + hi.str(digits) + "]"; }

Interval operator+(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_add(r.lo.get(), a.lo.get(), b.lo.get(), MPFR_RNDD);
    mpfr_add(r.hi.get(), a.hi.get(), b.hi.get(), MPFR_RNDU);
    return r;
}

Interval operator-(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_sub(r.lo.get(), a.lo.get(), b.hi.get(), MPFR_RNDD);
    mpfr_sub(r.hi.get(), a.hi.get(), b.lo.get(), MPFR_RNDU);
    return r;
}

Interval operator*(const Interval& a, const Interval& b) {
    if (mpfr_sgn(a.lo.get()) < 0 || mpfr_sgn(b.lo.get()) < 0)
        throw std::domain_error("interval product expects non-negative operands");
    Interval r;
    mpfr_mul(r.lo.get(), a.lo.get(), b.lo.get(), MPFR_RNDD);
    mpfr_mul(r.hi.get(), a.hi.get(), b.hi.get(), MPFR_RNDU);
    return r;
}

Interval operator/(const Interval& a, const Interval& b) {
    if (mpfr_sgn(a.lo.get()) < 0 || mpfr_sgn(b.lo.get()) <= 0)
        throw std::domain_error("interval quotient expects a >= 0 and b > 0");
    Interval r;
    mpfr_div(r.lo.get(), a.lo.get(), b.hi.get(), MPFR_RNDD);
    mpfr_div(r.hi.get(), a.hi.get(), b.lo.get(), MPFR_RNDU);
    return r;
}

Interval pow_ui(const Interval& x, unsigned long e) {
    Interval r;
    mpfr_pow_ui(r.lo.get(), x.lo.get(), e, MPFR_RNDD);
    mpfr_pow_ui(r.hi.get(), x.hi.get(), e, MPFR_RNDU);
    return r;
}

Interval pow_frac(const Interval& x, unsigned long num, unsigned long den) {
    if (mpfr_sgn(x.lo.get()) < 0) throw std::domain_error("pow_frac expects x >= 0");
    Interval p = pow_ui(x, num);
    Interval r;
    mpfr_rootn_ui(r.lo.get(), p.lo.get(), den, MPFR_RNDD);
    mpfr_rootn_ui(r.hi.get(), p.hi.get(), den, MPFR_RNDU);
    return r;
}

Interval log_iv(const Interval& x) {
    Interval r;
    mpfr_log(r.lo.get(), x.lo.get(), MPFR_RNDD);
    mpfr_log(r.hi.get(), x.hi.get(), MPFR_RNDU);
    return r;
}

Interval log1p_iv(const Interval& x) {
    Interval r;
    mpfr_log1p(r.lo.get(), x.lo.get(), MPFR_RNDD);
    mpfr_log1p(r.hi.get(), x.hi.get(), MPFR_RNDU);
    return r;
}

Interval log2_iv(const Interval& x) {
    Interval r;
    mpfr_log2(r.lo.get(), x.lo.get(), MPFR_RNDD);
    mpfr_log2(r.hi.get(), x.hi.get(), MPFR_RNDU);
    return r;
}

Interval exp2_iv(const Interval& x) {
    Interval r;
    mpfr_exp2(r.lo.get(), x.lo.get(), MPFR_RNDD);
    mpfr_exp2(r.hi.get(), x.hi.get(), MPFR_RNDU);
    return r;
}

Interval li2_neg_iv(const Interval& x) {
    if (mpfr_sgn(x.hi.get()) > 0) throw std::domain_error("li2_neg_iv expects x <= 0");
    Interval r;
    // Li_2 is increasing on (-inf, 0].
    mpfr_li2(r.lo.get(), x.lo.get(), MPFR_RNDD);
    mpfr_li2(r.hi.get(), x.hi.get(), MPFR_RNDU);
    return r;
}

Interval min_iv(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_min(r.lo.get(), a.lo.get(), b.lo.get(), MPFR_RNDD);
    mpfr_min(r.hi.get(), a.hi.get(), b.hi.get(), MPFR_RNDU);
    return r;
}

Interval max_iv(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_max(r.lo.get(), a.lo.get(), b.lo.get(), MPFR_RNDD);
    mpfr_max(r.hi.get(), a.hi.get(), b.hi.get(), MPFR_RNDU);
    return r;
}

Interval pi_iv() {
    Interval r;
    mpfr_const_pi(r.lo.get(), MPFR_RNDD);
    mpfr_const_pi(r.hi.get(), MPFR_RNDU);
    return r;
}

Interval sin_pi_iv(const Interval& x) {
    Interval pi = pi_iv();
    Interval r;
    Real arg, half_pi;
    mpfr_mul(arg.get(), pi.lo.get(), x.lo.get(), MPFR_RNDD);
    mpfr_sin(r.lo.get(), arg.get(), MPFR_RNDD);
    if (mpfr_sgn(r.lo.get()) < 0) mpfr_set_zero(r.lo.get(), 1);
    mpfr_mul(arg.get(), pi.hi.get(), x.hi.get(), MPFR_RNDU);
    mpfr_div_2ui(half_pi.get(), pi.lo.get(), 1, MPFR_RNDD);
    if (mpfr_greaterequal_p(arg.get(), half_pi.get()))
        mpfr_set_ui(r.hi.get(), 1, MPFR_RNDU);
    else
        mpfr_sin(r.hi.get(), arg.get(), MPFR_RNDU);
    return r;
}

bool certainly_le(const Interval& a, const Interval& b) { return mpfr_lessequal_p(a.hi.get(), b.lo.get()) != 0; }

bool certainly_lt(const Interval& a, const Interval& b) { return mpfr_less_p(a.hi.get(), b.lo.get()) != 0; }

Cmp compare(const Interval& a, const Interval& b) {
    if (certainly_lt(a, b)) return Cmp::less;
    if (certainly_lt(b, a)) return Cmp::greater;
    return Cmp::undecided;
}

BigInt floor_lo(const Interval& x) {
    BigInt out;
    mpfr_get_z(out.get_mpz_t(), x.lo.get(), MPFR_RNDD);
    return out;
}

BigInt ceil_hi(const Interval& x) {
    BigInt out;
    mpfr_get_z(out.get_mpz_t(), x.hi.get(), MPFR_RNDU);
    return out;
}

}  // namespace r1oe
