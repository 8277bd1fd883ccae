#include "r1oe/phi.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace r1oe {

namespace {

Interval pt(const Real& x) { return Interval::hull(x, x); }

Interval neg(const Interval& x) { return Interval::point(0) - x; }

Rational real_to_q(const Real& x) {
    Rational q;
    mpfr_get_q(q.get_mpq_t(), x.get());
    return q;
}

Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(parse_dec(s));
    BigInt den = parse_dec(s.substr(slash + 1));
    if (den <= 0) throw std::invalid_argument("bad denominator in '" + s + "'");
    return make_rational(parse_dec(s.substr(0, slash)), den);
}

}  // namespace

PhiSpec PhiSpec::power(unsigned long num, unsigned long den) {
    if (num == 0 || den == 0 || 3 * num >= den)
        throw std::invalid_argument("power family needs 0 < a < 1/3");
    PhiSpec p;
    p.family_ = PhiFamily::power;
    p.num_ = num;
    p.den_ = den;
    p.locate_fixed_point();
    return p;
}

PhiSpec PhiSpec::log1p() {
    PhiSpec p;
    p.family_ = PhiFamily::log1p;
    p.locate_fixed_point();
    return p;
}

PhiSpec PhiSpec::table(std::vector<std::pair<Rational, Rational>> points) {
    if (points.size() < 2) throw std::invalid_argument("phi table needs at least two points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].first < 0 || points[i].second < 0)
            throw std::invalid_argument("phi table entries must be non-negative");
        if (i > 0 && points[i].first <= points[i - 1].first)
            throw std::invalid_argument("phi table abscissae must increase");
        if (i > 0 && points[i].second < points[i - 1].second)
            throw std::invalid_argument("phi table has no monotone envelope (values decrease)");
    }
    PhiSpec p;
    p.family_ = PhiFamily::table;
    p.points_ = std::move(points);
    return p;
}

PhiSpec PhiSpec::parse(const std::string& text) {
    if (text == "log1p") return log1p();
    if (text.rfind("power:", 0) == 0) {
        std::string a = text.substr(6);
        auto slash = a.find('/');
        if (slash == std::string::npos) throw std::invalid_argument("power exponent must be num/den");
        try {
            return power(std::stoul(a.substr(0, slash)), std::stoul(a.substr(slash + 1)));
        } catch (const std::logic_error& e) {
            throw std::invalid_argument("bad phi spec '" + text + "': " + e.what());
        }
    }
    if (text.rfind("table:", 0) == 0) {
        std::vector<std::pair<Rational, Rational>> pts;
        std::stringstream ss(text.substr(6));
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("table entries are t=value");
            pts.emplace_back(parse_rational(item.substr(0, eq)), parse_rational(item.substr(eq + 1)));
        }
        return table(std::move(pts));
    }
    throw std::invalid_argument("unknown phi family '" + text + "'");
}

std::string PhiSpec::name() const {
    switch (family_) {
        case PhiFamily::power:
            return "power:" + std::to_string(num_) + "/" + std::to_string(den_);
        case PhiFamily::log1p:
            return "log1p";
        case PhiFamily::table: {
            std::string s = "table:";
            for (std::size_t i = 0; i < points_.size(); ++i)
                s += (i ? "," : "") + to_dec(points_[i].first) + "=" + to_dec(points_[i].second);
            return s;
        }
    }
    return "?";
}

Rational PhiSpec::monotone_threshold() const {
    switch (family_) {
        case PhiFamily::power:
            return 0;
        case PhiFamily::log1p:
            // ln(1 + C t^3) / t decreases once ln(1 + t^3) > 3, i.e. t >= 3.
            return 3;
        case PhiFamily::table:
            return points_.back().first;
    }
    return 0;
}

Rational PhiSpec::table_value(const Rational& t) const {
    if (t <= points_.front().first) return points_.front().second;
    if (t >= points_.back().first) return points_.back().second;
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](const Rational& v, const auto& p) { return v < p.first; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

Interval PhiSpec::phi(const Interval& t) const {
    switch (family_) {
        case PhiFamily::power:
            return pow_frac(t, num_, den_);
        case PhiFamily::log1p:
            return log1p_iv(t);
        case PhiFamily::table: {
            Interval lo = Interval::of(table_value(real_to_q(t.lo)));
            Interval hi = Interval::of(table_value(real_to_q(t.hi)));
            return Interval::hull(lo.lo, hi.hi);
        }
    }
    return t;
}

void PhiSpec::locate_fixed_point() {
    // f(s) = s - phi(s) - 1 is increasing past 1 and changes sign in [1, 3].
    Real lo(family_ == PhiFamily::power ? 1.0 : 2.0), hi(3.0);
    auto f = [&](const Real& s) { return pt(s) - phi(pt(s)) - Interval::point(1); };
    for (int it = 0; it < static_cast<int>(real_precision()); ++it) {
        Real mid;
        mpfr_add(mid.get(), lo.get(), hi.get(), MPFR_RNDN);
        mpfr_div_2ui(mid.get(), mid.get(), 1, MPFR_RNDN);
        if (mpfr_equal_p(mid.get(), lo.get()) || mpfr_equal_p(mid.get(), hi.get())) break;
        Interval v = f(mid);
        if (mpfr_sgn(v.hi.get()) < 0)
            lo = mid;
        else if (mpfr_sgn(v.lo.get()) > 0)
            hi = mid;
        else
            break;
    }
    sstar_ = Interval::hull(lo, hi);
}

Interval PhiSpec::theta(const Interval& t) const {
    auto at = [&](const Real& s) -> Interval {
        if (mpfr_sgn(s.get()) <= 0) return Interval::point(1);
        Interval one = Interval::point(1);
        if (family_ != PhiFamily::table) return min_iv(one, (phi(pt(s)) + one) / pt(s));
        Rational q = real_to_q(s);
        Rational best = (table_value(q) + 1) / q;
        for (const auto& [ti, vi] : points_)
            if (ti >= q && ti > 0) best = std::max(best, Rational((vi + 1) / ti));
        return min_iv(one, Interval::of(best));
    };
    // theta is non-increasing.
    Interval a = at(t.hi), b = at(t.lo);
    return Interval::hull(a.lo, b.hi);
}

Interval PhiSpec::Phi_point(const Real& t) const {
    if (mpfr_sgn(t.get()) <= 0) return Interval::point(0);
    const Interval T = pt(t);
    if (family_ == PhiFamily::table) {
        // theta is non-increasing: left and right Riemann sums bracket the integral.
        const int pieces = 1024;
        Rational tq = real_to_q(t);
        Interval lo_sum = Interval::point(0), hi_sum = Interval::point(0);
        Interval width = Interval::of(Rational(tq / pieces));
        for (int i = 0; i < pieces; ++i) {
            Interval left = Interval::of(Rational(tq * i / pieces));
            Interval right = Interval::of(Rational(tq * (i + 1) / pieces));
            hi_sum = hi_sum + theta(Interval::hull(left.lo, left.lo)) * width;
            lo_sum = lo_sum + theta(Interval::hull(right.hi, right.hi)) * width;
        }
        return Interval::hull(lo_sum.lo, hi_sum.hi);
    }
    const Interval& s = sstar_;
    Interval tail;
    bool above = mpfr_greaterequal_p(t.get(), s.lo.get());
    bool below = mpfr_lessequal_p(t.get(), s.hi.get());
    if (above) {
        if (family_ == PhiFamily::power) {
            Interval inv_a = Interval::of(make_rational(BigInt(den_), BigInt(num_)));
            tail = s + (phi(T) - phi(s)) * inv_a + log_iv(T / s);
        } else {
            // int ln(1+u)/u du = -Li_2(-u).
            tail = s + log_iv(T / s) - li2_neg_iv(neg(T)) + li2_neg_iv(neg(s));
        }
    }
    if (above && below) return Interval::hull(std::min(T.lo, tail.lo, [](const Real& a, const Real& b) {
                                                  return mpfr_less_p(a.get(), b.get()) != 0;
                                              }),
                                              std::max(T.hi, tail.hi, [](const Real& a, const Real& b) {
                                                  return mpfr_less_p(a.get(), b.get()) != 0;
                                              }));
    return above ? tail : T;
}

Interval PhiSpec::Phi(const Interval& t) const {
    Interval a = Phi_point(t.lo), b = Phi_point(t.hi);
    return Interval::hull(a.lo, b.hi);
}

}  // namespace r1oe
