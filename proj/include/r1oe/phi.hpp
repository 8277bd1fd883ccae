#pragma once

#include "r1oe/bigint.hpp"
#include "r1oe/interval.hpp"

#include <string>
#include <utility>
#include <vector>

namespace r1oe {

enum class PhiFamily { power, log1p, table };

// phi together with its normalized companion
//   theta(t) = min(1, sup_{s >= t} (phi(s) + 1) / s),  Phi(t) = int_0^t theta.
// Built-in families have (phi(s) + 1) / s decreasing on (0, inf), so the sup
// is attained at s = t and theta(t) = 1 exactly up to the fixed point s*
// of phi(s) + 1 = s.
class PhiSpec {
public:
    // phi(t) = t^(num/den), num/den < 1/3.
    static PhiSpec power(unsigned long num, unsigned long den);
    static PhiSpec log1p();
    // Piecewise-linear through (t_i, phi_i), constant after the last point.
    // Throws std::invalid_argument unless the table is a monotone envelope.
    static PhiSpec table(std::vector<std::pair<Rational, Rational>> points);
    // "power:1/4", "log1p", or "table:t0=v0,t1=v1,...".
    static PhiSpec parse(const std::string& text);

    PhiFamily family() const { return family_; }
    std::string name() const;
    // Built-in families are certified o(t^(1/3)); tables are not.
    bool certified() const { return family_ != PhiFamily::table; }
    // Built-in families are concave with phi(0) = 0, hence subadditive.
    bool subadditive() const { return family_ != PhiFamily::table; }
    // For t at least this value, phi(C t^k) / t is non-increasing for k <= 3, C >= 1.
    Rational monotone_threshold() const;

    Interval phi(const Interval& t) const;
    Interval phi(const BigInt& t) const { return phi(Interval::of(t)); }
    Interval theta(const Interval& t) const;
    Interval Phi(const Interval& t) const;
    // Fixed point s* of phi(s) + 1 = s.
    const Interval& fixed_point() const { return sstar_; }

    // The function bounds should use: phi itself when increasing and
    // subadditive, Phi otherwise.
    Interval bound_phi(const Interval& t) const { return subadditive() ? phi(t) : Phi(t); }

private:
    PhiFamily family_ = PhiFamily::power;
    unsigned long num_ = 1, den_ = 4;
    std::vector<std::pair<Rational, Rational>> points_;
    Interval sstar_;

    Interval phi_point(const Real& t, mpfr_rnd_t dir) const;
    Interval Phi_point(const Real& t) const;
    Rational table_value(const Rational& t) const;
    void locate_fixed_point();
};

}  // namespace r1oe
