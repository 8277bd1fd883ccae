#pragma once

#include "r1oe/interval.hpp"
#include "r1oe/oe_engine.hpp"
#include "r1oe/phi.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace r1oe {

// ---- empirical cocycles ----------------------------------------------------

// c_{T^{-1}} on K'_n = K_n \ (K_1 u ... u K_{n-1}).
struct CTWindow {
    std::size_t n = 0;
    std::int64_t points = 0;
    std::int64_t found = 0;
    std::int64_t bound = 0;  // 4 (h_{n-1} + Z_{n-1}) h'_{n-1}^2
    std::int64_t max_abs = 0;
    std::map<std::int64_t, Rational> hist;
    Interval phi_sum;
    bool ok() const { return found == points && max_abs <= bound; }
};

// Stage-F levels carry mass 1/h_F (truncated normalization, F = M).
struct CocycleReport {
    std::size_t N = 0, M = 0;
    std::int64_t hF = 0;
    std::map<std::int64_t, Rational> hist;  // c_S value -> mass
    std::map<std::pair<std::size_t, std::size_t>, Rational> cell_mass;  // D_n(m) -> mass
    Rational resolved_mass, unresolved_mass;
    std::int64_t bound_violations = 0;
    double entropy = 0;  // over the resolved atoms; the only floating-point output
    Interval phi_sum;    // sum of mass * phi(|c_S|)
    std::vector<CTWindow> ct;
};

// ct_depth: windows K'_1 .. K'_{ct_depth} (0 skips c_T).
CocycleReport cocycle_histogram(const Engine& eng, const PhiSpec& phi, std::size_t ct_depth = 0);

// ---- analytic bounds -------------------------------------------------------

struct BoundsInput {
    const ParamSeq* seq = nullptr;
    const RecurrenceTables* tab = nullptr;
    BigInt C = 1, Cprime = 1;
    // The family continues by the scheduler (critpr10), so epsilon has the
    // tail envelope (C'+1)/q_{K-1}; otherwise the sequence is truncated.
    bool scheduler_tail = false;
};

struct BoundTerm {
    std::size_t n = 0, m = 0;
    Interval value;
    bool envelope = false;  // some Z or epsilon came from an envelope
};

struct BoundsReport {
    std::string phi;
    std::size_t steps = 0;  // K
    std::size_t rows = 0;   // h'_0 .. h'_rows known
    std::vector<Interval> eps;  // upper enclosures of eps_0 .. eps_K
    Interval M0_upper;          // truncated M_0, an upper bound of the true one
    std::vector<BoundTerm> Delta, Delta_eps, Gamma1, Gamma2;  // index n
    std::vector<BoundTerm> Gamma3, Gamma_eps;                 // (n, m), m >= n+1, m <= K
    Interval cT_master;  // phi(4(h_0+Z_0)h'_0^2) + 4 sum Delta + 4 sum Delta_eps (built terms)
    Interval D11;        // (q'_0/h_1) phi((h_0+Z_0)h'_0), bounds mu(D_1(1)) phi(...)
    Interval cS_master;  // D11 + all built Gamma terms

    const BoundTerm* find(const std::vector<BoundTerm>& v, std::size_t n, std::size_t m = 0) const;
};

BoundsReport bounds_tables(const BoundsInput& in, const PhiSpec& phi);

// Bound on the c_S integral over the cells D_n(m) with m <= F, following the
// gamma decomposition term by term.
Interval truncated_cS_bound(const BoundsReport& b, std::size_t F);

struct EnvelopeRow {
    std::size_t n = 0;
    std::string quantity;
    Interval value;
    Interval limit;
    bool ok = false;
};

struct EnvelopeReport {
    std::vector<EnvelopeRow> rows;
    bool all_ok() const;
};

// Delta(n) <= 2^-n, sum_{m>n} Gamma_3(n,m) <= 2^-(n+1), Delta_eps(n) <= 2^-(n-1)/M_0
// and eps_n <= 2/q_{n-1}, for 1 <= n <= depth. The Gamma_3 tail beyond the
// built steps uses the scheduler's 2^-(m+1) term bound.
EnvelopeReport strict_envelopes(const BoundsReport& b, const ParamSeq& seq, std::size_t depth);

struct Comparison {
    Interval empirical;
    Interval bound;
    Interval slack;
    bool ok = false;  // certified empirical <= bound
};

Comparison compare(const CocycleReport& rep, const BoundsReport& b);

// ---- export ------------------------------------------------------------------

std::string histogram_csv(const std::map<std::int64_t, Rational>& hist);
// Plot data: term,n,m,lo,hi.
std::string bounds_csv(const BoundsReport& b);

}  // namespace r1oe
