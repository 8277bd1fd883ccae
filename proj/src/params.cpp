#include "r1oe/params.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace r1oe {

CutSpacParam CutSpacParam::dense(const BigInt& q, const std::vector<BigInt>& spacers) {
    if (BigInt(static_cast<unsigned long>(spacers.size())) != q + 1)
        throw std::invalid_argument("spacer vector must have q+1 entries");
    CutSpacParam p;
    p.q = q;
    for (std::size_t i = 0; i < spacers.size(); ++i) {
        if (spacers[i] < 0) throw std::invalid_argument("negative spacer");
        if (spacers[i] > 0) p.nonzero.emplace_back(BigInt(static_cast<unsigned long>(i)), spacers[i]);
    }
    return p;
}

CutSpacParam CutSpacParam::dense(std::int64_t q, const std::vector<std::int64_t>& spacers) {
    std::vector<BigInt> s;
    s.reserve(spacers.size());
    for (auto v : spacers) s.emplace_back(static_cast<long>(v));
    return dense(BigInt(static_cast<long>(q)), s);
}

CutSpacParam CutSpacParam::last_only(const BigInt& q, const BigInt& last) {
    CutSpacParam p;
    p.q = q;
    if (last > 0) p.nonzero.emplace_back(q, last);
    return p;
}

BigInt CutSpacParam::spacer(const BigInt& i) const {
    auto it = std::lower_bound(nonzero.begin(), nonzero.end(), i,
                               [](const auto& e, const BigInt& k) { return e.first < k; });
    if (it != nonzero.end() && it->first == i) return it->second;
    return BigInt(0);
}

BigInt CutSpacParam::total() const {
    BigInt s = 0;
    for (const auto& e : nonzero) s += e.second;
    return s;
}

BigInt CutSpacParam::max() const {
    BigInt m = 0;
    for (const auto& e : nonzero) m = std::max(m, e.second);
    return m;
}

std::vector<BigInt> CutSpacParam::spacers(std::uint64_t cap) const {
    if (q > BigInt(static_cast<unsigned long>(cap)))
        throw std::length_error("cutting value too large to materialize spacers");
    std::vector<BigInt> out(q.get_ui() + 1, BigInt(0));
    for (const auto& e : nonzero) out[e.first.get_ui()] = e.second;
    return out;
}

std::vector<std::int64_t> CutSpacParam::spacers_i64(std::uint64_t cap) const {
    auto big = spacers(cap);
    std::vector<std::int64_t> out;
    out.reserve(big.size());
    for (const auto& v : big) out.push_back(to_i64(v));
    return out;
}

void CutSpacParam::validate(long min_q) const {
    if (q < min_q) throw std::invalid_argument("cutting parameter q must be >= " + std::to_string(min_q));
    for (std::size_t k = 0; k < nonzero.size(); ++k) {
        const auto& [i, v] = nonzero[k];
        if (i < 0 || i > q) throw std::invalid_argument("spacer index out of range [0, q]");
        if (v <= 0) throw std::invalid_argument("sparse spacer entries must be positive");
        if (k > 0 && nonzero[k - 1].first >= i) throw std::invalid_argument("spacer indices must increase");
    }
}

ParamSeq derive_sequences(const Entries& entries) {
    ParamSeq s;
    s.entries = entries;
    s.h.reserve(entries.size() + 1);
    s.h.emplace_back(1);
    BigInt z = 0;
    for (const auto& e : entries) {
        e.validate();
        BigInt sig = e.total();
        z = std::max(z, e.max());
        s.h.push_back(mul_sparse(e.q, s.h.back()) + sig);
        s.sigma.push_back(sig);
        s.Z.push_back(z);
    }
    return s;
}

void append_step(ParamSeq& seq, CutSpacParam step) {
    step.validate();
    if (seq.h.empty()) seq.h.emplace_back(1);
    BigInt sig = step.total();
    BigInt z = seq.Z.empty() ? BigInt(0) : seq.Z.back();
    z = std::max(z, step.max());
    seq.h.push_back(mul_sparse(step.q, seq.h.back()) + sig);
    seq.sigma.push_back(sig);
    seq.Z.push_back(z);
    seq.entries.push_back(std::move(step));
}

std::string to_string(SeriesVerdict v) {
    switch (v) {
        case SeriesVerdict::converged_bound: return "converged-bound";
        case SeriesVerdict::diverges: return "diverges";
        default: return "inconclusive";
    }
}

ConditionF check_condition_F(const ParamSeq& seq, std::size_t horizon, const std::optional<TailCertificate>& tail) {
    if (horizon > seq.size()) throw std::invalid_argument("horizon exceeds sequence length");
    ConditionF out;
    out.partial_sum = 0;
    for (std::size_t n = 0; n < horizon; ++n) out.partial_sum += make_rational(seq.sigma[n], seq.h[n + 1]);
    if (tail) {
        out.verdict = SeriesVerdict::converged_bound;
        out.tail_bound = tail->bound;
    }
    return out;
}

TailCertificate geometric_tail(const BigInt& sigma_max, const BigInt& h_next, const Rational& growth) {
    if (growth <= 1) throw std::invalid_argument("geometric tail needs growth > 1");
    Rational first = make_rational(sigma_max, h_next);
    Rational b = first * growth / (growth - 1);
    b.canonicalize();
    return {b, "sigma_n <= " + to_dec(sigma_max) + ", h grows by factor >= " + growth.get_str()};
}

Rational m0_truncated(const ParamSeq& seq) {
    Rational s = 1;
    BigInt prod = 1;
    for (std::size_t n = 0; n < seq.size(); ++n) {
        prod = mul_sparse(prod, seq.q(n));
        if (seq.sigma[n] != 0) s += make_rational(seq.sigma[n], prod);
    }
    Rational r = 1 / s;
    r.canonicalize();
    return r;
}

MeasureModel::MeasureModel(const ParamSeq& seq) : seq_(&seq), m0_(m0_truncated(seq)) {
    qprod_.emplace_back(1);
    for (std::size_t n = 0; n < seq.size(); ++n) qprod_.push_back(mul_sparse(qprod_.back(), seq.q(n)));
}

Rational MeasureModel::level_measure(std::size_t n) const {
    if (n >= qprod_.size()) throw std::out_of_range("stage beyond sequence");
    Rational r = m0_ / Rational(qprod_[n]);
    r.canonicalize();
    return r;
}

Rational MeasureModel::epsilon(std::size_t n) const {
    Rational r = 1 - Rational(seq_->h.at(n)) * level_measure(n);
    r.canonicalize();
    return r;
}

Rational MeasureModel::epsilon_tail_bound(const ParamSeq& seq, std::size_t n) {
    if (n == 0 || n > seq.size()) throw std::out_of_range("tail bound needs 1 <= n <= N");
    return make_rational(BigInt(2), seq.q(n - 1));
}

std::string Classification::label() const {
    if (bsp) return "BSP(" + to_dec(bsp_C) + ")";
    if (csp) return "CSP(" + to_dec(csp_C) + ")";
    return "neither";
}

Classification csp_bsp_classify(const ParamSeq& seq) {
    Classification c;
    c.csp = true;
    c.csp_C = 0;
    c.bsp = true;
    c.bsp_C = 0;
    for (std::size_t n = 0; n < seq.size(); ++n) {
        BigInt need;
        mpz_cdiv_q(need.get_mpz_t(), seq.Z[n].get_mpz_t(), seq.h[n].get_mpz_t());
        c.csp_C = std::max(c.csp_C, need);
        c.bsp_C = std::max(c.bsp_C, seq.Z[n]);
        const auto& e = seq.entries[n];
        if (e.first() != 0 || e.last() != 0) c.bsp = false;
    }
    if (!c.bsp) c.bsp_C = 0;
    return c;
}

CutSpacParam compose(const CutSpacParam& a, const CutSpacParam& b) {
    a.validate(1);
    b.validate(1);
    // Sum contributions per index; block j of b holds one copy of a's inner layout.
    std::map<BigInt, BigInt> acc;
    auto add = [&acc](const BigInt& i, const BigInt& v) {
        if (v > 0) acc[i] += v;
    };
    const BigInt a0 = a.first(), aq = a.last();
    std::vector<std::pair<BigInt, BigInt>> inner;
    for (const auto& e : a.nonzero)
        if (e.first > 0 && e.first < a.q) inner.push_back(e);
    if (!b.q.fits_ulong_p()) throw std::length_error("outer cutting value too large to compose");
    const unsigned long qb = b.q.get_ui();
    for (unsigned long j = 0; j < qb; ++j) {
        BigInt base = a.q * j;
        for (const auto& [i, v] : inner) add(base + i, v);
    }
    add(BigInt(0), b.first() + a0);
    for (unsigned long j = 1; j < qb; ++j) add(a.q * j, aq + b.spacer(BigInt(j)) + a0);
    add(a.q * b.q, aq + b.last());
    CutSpacParam out;
    out.q = a.q * b.q;
    for (auto& [i, v] : acc) out.nonzero.emplace_back(i, v);
    return out;
}

SkipResult skip_steps(const Entries& entries, const std::vector<std::size_t>& keep) {
    if (keep.empty()) throw std::invalid_argument("keep list is empty");
    if (keep.front() != 0) throw std::invalid_argument("keep list must start at 0");
    for (std::size_t k = 1; k < keep.size(); ++k)
        if (keep[k] <= keep[k - 1]) throw std::invalid_argument("keep indices must be strictly increasing");
    if (keep.back() >= entries.size()) throw std::invalid_argument("keep index out of range");
    SkipResult out;
    bool all_bsp = true;
    for (const auto& e : entries)
        if (e.first() != 0 || e.last() != 0) all_bsp = false;
    out.accumulation_warning = !all_bsp;
    for (std::size_t k = 0; k < keep.size(); ++k) {
        std::size_t lo = keep[k], hi = (k + 1 < keep.size()) ? keep[k + 1] : entries.size();
        CutSpacParam step = entries[lo];
        for (std::size_t n = lo + 1; n < hi; ++n) step = compose(step, entries[n]);
        out.entries.push_back(std::move(step));
    }
    return out;
}

}  // namespace r1oe
