#pragma once

#include "r1oe/params.hpp"
#include "r1oe/towers.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace r1oe {

// p_n = (nu_2(n+1))-th prime: 2,3,2,5,2,3,2,7,... so every prime recurs.
std::vector<BigInt> default_primes(std::size_t count);
// Repeats `given` cyclically up to `count` entries.
std::vector<BigInt> extend_primes(const std::vector<BigInt>& given, std::size_t count);

// A "largest multiple" came out zero at step (n, m).
class IllPosed : public std::runtime_error {
public:
    IllPosed(std::size_t n, std::size_t m, std::string what_kind, std::optional<std::size_t> crit1_violation);
    std::size_t n, m;
    // First step k where q_k > max(p_k, q'_0, ..., q'_{k-1}) fails, if any.
    std::optional<std::size_t> crit1_violation;
};

// Closed recurrences for r_{n,m}, t_{n,m}, q'_n. Rows n = 1..N, columns m = n..M;
// t also has row 0. Missing cells hold -1.
class RecurrenceTables {
public:
    RecurrenceTables() = default;
    RecurrenceTables(const ParamSeq& seq, const std::vector<BigInt>& primes, std::size_t N, std::size_t M);

    // Fills the cells of a larger (N, M) triangle; earlier cells are kept.
    void grow(const ParamSeq& seq, std::size_t N, std::size_t M);

    std::size_t N() const { return N_; }
    std::size_t M() const { return M_; }
    const BigInt& r(std::size_t n, std::size_t m) const { return r_.at(n).at(m); }
    const BigInt& t(std::size_t n, std::size_t m) const { return t_.at(n).at(m); }
    const BigInt& qprime(std::size_t k) const { return qp_.at(k); }
    const BigInt& hprime(std::size_t k) const { return hp_.at(k); }
    const BigInt& Hprime(std::size_t k) const { return Hp_.at(k); }
    const BigInt& prime(std::size_t k) const { return primes_.at(k); }
    const std::vector<BigInt>& primes() const { return primes_; }
    std::size_t qprime_count() const { return qp_.size(); }

    // sigma_0 > 0: the stage-one reading r_{1,1} = h_1 differs from r_{1,1} = q_0.
    bool stage_one_divergence() const { return stage_one_divergence_; }
    // Steps k < N with q_k <= max(p_k, q'_0..q'_{k-1}).
    std::vector<std::size_t> crit1_failures(const ParamSeq& seq) const;

private:
    std::size_t N_ = 0, M_ = 0;
    std::vector<BigInt> primes_;
    std::vector<std::vector<BigInt>> r_, t_;
    std::vector<std::vector<BigInt>> left_;  // r_{n,m} - q'_{n-1} t_{n,m}
    std::vector<BigInt> qp_, hp_, Hp_;
    bool stage_one_divergence_ = false;
};

struct QPrimeRow {
    std::size_t n = 0;
    bool lower_ok = false;  // q'_n >= q_n - (1 + p_n)
    bool upper_ok = false;  // q'_n <= 3 q_n + sigma_n / h'_n
    std::optional<bool> ratio_ok;  // q'_n / q_n <= 4, only with scheduler preconditions
    double ratio = 0;
};

struct QPrimeReport {
    std::vector<QPrimeRow> rows;
    bool all_ok() const;
};

QPrimeReport qprime_bounds_check(const RecurrenceTables& tab, const ParamSeq& seq, bool scheduler_attached);

struct Universality {
    bool divisible = true;
    std::vector<std::size_t> failures;
    std::map<std::string, unsigned> prime_factors;  // of q'_0...q'_{N-1}
};

Universality universality_check(const RecurrenceTables& tab);

// Step (n, m) of the enumerative construction.
struct BrickEntry {
    std::size_t n = 0, m = 0;
    std::vector<std::int64_t> W;  // sorted stage-m indices of W_{n,m}
    std::int64_t r = 0, t = 0, qprime = 0;
    // Cocycle of zeta_n(m) on brick e (groups 0..q'-2), in brick order.
    std::vector<std::int64_t> deltas;
    std::vector<std::int64_t> bricks() const { return {W.begin(), W.begin() + qprime * t}; }
};

struct SResult {
    bool resolved = false;
    std::int64_t image = 0;
    std::int64_t c = 0;
    std::size_t n = 0, m = 0;  // cell D_n(m) of the argument
};

struct Descent {
    std::size_t depth = 0;            // steps descended
    std::vector<std::int64_t> digit;  // i_0 .. i_{depth-1}
    std::vector<std::int64_t> point;  // x_0 .. x_depth
};

struct EReport {
    std::size_t n = 0, m = 0;
    std::int64_t uncovered = 0;  // count(X_m \ E_{n,m}) in stage-m levels
    std::int64_t bound = 0;      // H'_n (n < m) or H'_{n-1} + p_{n-1} h'_{n-1}
    bool whole_levels = true;    // every stage-m level is inside or outside E_{n,m}
    bool ok() const { return whole_levels && uncovered <= bound; }
};

struct KReport {
    std::size_t n = 0;
    std::vector<std::int64_t> levels;  // K_n as stage-n indices
    bool two_ways_agree = false;
    std::int64_t lower_bound = 0;  // h_n - 1 - 2 count(X_n \ E_{n,n})
    bool ok() const { return two_ways_agree && static_cast<std::int64_t>(levels.size()) >= lower_bound; }
};

struct OrbitReport {
    std::size_t n = 0;
    std::int64_t points = 0;
    std::int64_t found = 0;
    std::int64_t max_abs_k = 0;
    std::int64_t bound = 0;
    std::int64_t minus_one_cases = 0;
    std::int64_t constructive_mismatch = 0;
    std::vector<std::int64_t> failures;  // stage-F witnesses
    bool ok() const { return found == points && max_abs_k <= bound && constructive_mismatch == 0; }
};

struct OrbitStep {
    std::optional<std::int64_t> constructive;  // from the digits of R'_n
    std::optional<std::int64_t> scanned;       // least |k| with S^k y = y - 1 within the window
};

struct PartitionReport {
    std::size_t n = 0;
    bool disjoint = false;
    std::int64_t covered = 0;
    std::int64_t total = 0;
    std::int64_t predicted_uncovered = 0;
    std::int64_t tail = 0;  // un-bricked step-one material left at the final stage
    Rational coverage_all;      // covered / h_F
    Rational coverage_bricked;  // covered / (h_F - tail)
    bool ok() const { return disjoint && total - covered == predicted_uncovered; }
};

struct CocycleBoundReport {
    std::int64_t zeta_values = 0;
    std::int64_t zeta_violations = 0;
    std::int64_t cs_values = 0;
    std::int64_t cs_violations = 0;
    bool ok() const { return zeta_violations == 0 && cs_violations == 0; }
};

// Enumerative backend: levels of R_0..R_M as integer indices, every step
// (n, m) with n <= N, m <= M built explicitly, S evaluated on stage-M levels.
class Engine {
public:
    Engine(const ParamSeq& seq, const std::vector<BigInt>& primes, std::size_t N, std::size_t M);

    std::size_t N() const { return N_; }
    std::size_t M() const { return M_; }
    std::int64_t hF() const { return towers_.height(M_); }
    const ParamSeq& seq() const { return seq_; }
    const TowerStack& towers() const { return towers_; }
    const std::vector<BigInt>& primes() const { return primes_; }

    const BrickEntry& entry(std::size_t n, std::size_t m) const;
    std::int64_t qprime(std::size_t k) const { return qprime_.at(k); }
    std::int64_t hprime(std::size_t k) const { return hprime_.at(k); }
    std::int64_t Hprime(std::size_t k) const { return Hprime_.at(k); }
    std::int64_t h(std::size_t m) const { return towers_.height(m); }
    std::int64_t Z(std::size_t m) const { return Z_.at(m); }
    std::int64_t p(std::size_t k) const { return to_i64(primes_.at(k)); }

    // Group of stage-M level x at step k (1-based), -1 if not a brick there.
    std::int32_t group(std::size_t k, std::int64_t x) const { return grp_[k - 1][x]; }
    std::int32_t birth(std::size_t k, std::int64_t x) const { return birth_[k - 1][x]; }

    std::vector<std::int64_t> compute_W(std::size_t n, std::size_t m) const { return entry(n, m).W; }

    std::optional<std::int64_t> zeta(std::size_t k, std::int64_t x) const;
    std::optional<std::int64_t> zeta_inv(std::size_t k, std::int64_t x) const;

    Descent descend(std::int64_t x, std::size_t depth) const;
    // Position of x in R'_n, or nullopt if x is not yet covered by R'_n.
    std::optional<std::int64_t> position(std::int64_t x, std::size_t n) const;
    // S^pos on the base point b of R'_n via the digit composition.
    std::optional<std::int64_t> ascend(std::int64_t b, std::int64_t pos, std::size_t n) const;

    SResult s_apply(std::int64_t x) const;
    SResult s_inverse(std::int64_t x) const;

    // Stage-M membership of x in E_{n,m}.
    bool in_E(std::int64_t x, std::size_t n, std::size_t m) const;
    std::vector<std::int64_t> build_E(std::size_t n, std::size_t m) const;
    EReport E_report(std::size_t n, std::size_t m) const;
    KReport build_K(std::size_t n) const;
    OrbitReport verify_orbit_on_K(std::size_t n) const;
    // k with S^k y = T^{-1} y, scanning |k| <= B.
    OrbitStep orbit_step(std::int64_t y, std::size_t n, std::int64_t B) const;
    PartitionReport partition_check(std::size_t n) const;
    CocycleBoundReport cocycle_bounds() const;

    // Enumerative analogue of the analytic tables (same layout).
    std::int64_t r(std::size_t n, std::size_t m) const { return entry(n, m).r; }
    std::int64_t t(std::size_t n, std::size_t m) const { return entry(n, m).t; }

private:
    ParamSeq seq_;
    std::vector<BigInt> primes_;
    std::size_t N_, M_;
    TowerStack towers_;
    std::vector<std::int64_t> Z_;  // Z_m for m < M, Z_{-1} := 0 not stored
    std::vector<std::int64_t> qprime_, hprime_, Hprime_;
    std::map<std::pair<std::size_t, std::size_t>, BrickEntry> entries_;
    // Stage-M labels per step.
    std::vector<std::vector<std::int32_t>> grp_, birth_;
    std::vector<std::vector<std::int32_t>> fwd_, back_;

    void build();
};

// Worker count from RANK1_OE_THREADS (default 1).
unsigned worker_count();

}  // namespace r1oe
