#pragma once

#include "r1oe/bigint.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace r1oe {

// One cutting-and-stacking step: q copies, q+1 spacer counts. Spacers are kept
// sparsely as sorted (index, value) pairs with value > 0, because scheduled
// steps can have q far beyond anything that fits in memory.
struct CutSpacParam {
    BigInt q;
    std::vector<std::pair<BigInt, BigInt>> nonzero;

    static CutSpacParam dense(const BigInt& q, const std::vector<BigInt>& spacers);
    static CutSpacParam dense(std::int64_t q, const std::vector<std::int64_t>& spacers);
    // Spacer layout with only the last spacer non-zero.
    static CutSpacParam last_only(const BigInt& q, const BigInt& last);

    BigInt spacer(const BigInt& i) const;
    BigInt total() const;
    BigInt max() const;
    BigInt first() const { return spacer(0); }
    BigInt last() const { return spacer(q); }

    // Dense spacer vector; throws if q exceeds `cap`.
    std::vector<BigInt> spacers(std::uint64_t cap = 10000000) const;
    std::vector<std::int64_t> spacers_i64(std::uint64_t cap = 10000000) const;

    // Throws std::invalid_argument on q < min_q, bad indices or bad values.
    void validate(long min_q = 2) const;

    bool operator==(const CutSpacParam& o) const { return q == o.q && nonzero == o.nonzero; }
};

using Entries = std::vector<CutSpacParam>;

struct ParamSeq {
    Entries entries;
    std::vector<BigInt> h;      // h_0 .. h_N
    std::vector<BigInt> sigma;  // sigma_0 .. sigma_{N-1}
    std::vector<BigInt> Z;      // Z_0 .. Z_{N-1}

    std::size_t size() const { return entries.size(); }
    const BigInt& q(std::size_t n) const { return entries[n].q; }
};

ParamSeq derive_sequences(const Entries& entries);
// Appends one step and its derived h, sigma, Z.
void append_step(ParamSeq& seq, CutSpacParam step);

struct TailCertificate {
    Rational bound;
    std::string reason;
};

enum class SeriesVerdict { converged_bound, inconclusive, diverges };
std::string to_string(SeriesVerdict v);

struct ConditionF {
    Rational partial_sum;
    SeriesVerdict verdict = SeriesVerdict::inconclusive;
    std::optional<Rational> tail_bound;
};

// Sum_{n < horizon} sigma_n / h_{n+1}. Converged only with a caller tail bound.
ConditionF check_condition_F(const ParamSeq& seq, std::size_t horizon,
                             const std::optional<TailCertificate>& tail = std::nullopt);

// Tail bound Sum_{n >= horizon} sigma_n/h_{n+1} for families with sigma_n <= s
// and h_{n+1} >= h_horizon+1 * g^(n-horizon), g > 1.
TailCertificate geometric_tail(const BigInt& sigma_max, const BigInt& h_next, const Rational& growth);

Rational m0_truncated(const ParamSeq& seq);

// Truncated normalization: the sequence's tail spacers are all zero.
class MeasureModel {
public:
    explicit MeasureModel(const ParamSeq& seq);

    const Rational& M0() const { return m0_; }
    Rational level_measure(std::size_t n) const;
    // mu(X_n^c) under the truncated convention.
    Rational epsilon(std::size_t n) const;
    // Bound eps_n <= 2/q_{n-1} attached by the scheduler guarantee.
    static Rational epsilon_tail_bound(const ParamSeq& seq, std::size_t n);

private:
    const ParamSeq* seq_;
    Rational m0_;
    std::vector<BigInt> qprod_;  // q_0...q_{n-1}
};

struct Classification {
    bool csp = false;
    BigInt csp_C;
    bool bsp = false;
    BigInt bsp_C;
    std::string label() const;
};

Classification csp_bsp_classify(const ParamSeq& seq);

// a then b as a single step (q = q_a q_b). q == 1 inputs are allowed here.
CutSpacParam compose(const CutSpacParam& a, const CutSpacParam& b);

struct SkipResult {
    Entries entries;
    // Set when the input is not BSP: composed spacers may exceed the old Z.
    bool accumulation_warning = false;
};

// Keeps towers R_{k} for k in keep (which starts at 0) plus the last tower.
SkipResult skip_steps(const Entries& entries, const std::vector<std::size_t>& keep);

}  // namespace r1oe
