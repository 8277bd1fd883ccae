#pragma once

#include "r1oe/bigint.hpp"

#include <mpfr.h>

#include <string>

namespace r1oe {

// Working precision (bits) for new MPFR values. Exponent range is widened to
// the MPFR maximum on first use so values like 2^(10^9) stay finite.
void set_real_precision(mpfr_prec_t bits);
mpfr_prec_t real_precision();

class Real {
public:
    Real();
    explicit Real(double v);
    Real(const Real& o);
    Real(Real&& o) noexcept;
    Real& operator=(const Real& o);
    Real& operator=(Real&& o) noexcept;
    ~Real();

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    std::string str(int digits = 12) const;

private:
    mpfr_t v_;
};

// Closed interval [lo, hi] with outward rounding. Multiplication, division and
// the power functions assume non-negative operands, which is all the bound
// tables need.
struct Interval {
    Real lo, hi;

    static Interval point(double v);
    static Interval of(const BigInt& x);
    static Interval of(const Rational& x);
    static Interval hull(const Real& a, const Real& b);

    double mid_double() const;
    std::string str(int digits = 12) const;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);

Interval pow_ui(const Interval& x, unsigned long e);
// x^(num/den) for x >= 0.
Interval pow_frac(const Interval& x, unsigned long num, unsigned long den);
Interval log_iv(const Interval& x);
Interval log1p_iv(const Interval& x);
Interval log2_iv(const Interval& x);
Interval exp2_iv(const Interval& x);
// Real dilogarithm Li_2 on x <= 0.
Interval li2_neg_iv(const Interval& x);
Interval min_iv(const Interval& a, const Interval& b);
Interval max_iv(const Interval& a, const Interval& b);
Interval pi_iv();
// sin(pi x) for x in [0, 1/2], where it is increasing.
Interval sin_pi_iv(const Interval& x);

// Certified comparisons: true only when the relation holds for every point.
bool certainly_le(const Interval& a, const Interval& b);
bool certainly_lt(const Interval& a, const Interval& b);
// Undecided when the intervals overlap.
enum class Cmp { less, greater, undecided };
Cmp compare(const Interval& a, const Interval& b);

// Integer n with n <= x for every x in the interval (floor of lo).
BigInt floor_lo(const Interval& x);
// Integer n with n >= x for every x in the interval (ceil of hi).
BigInt ceil_hi(const Interval& x);

}  // namespace r1oe
