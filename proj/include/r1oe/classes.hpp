#pragma once

#include "r1oe/interval.hpp"
#include "r1oe/oe_engine.hpp"
#include "r1oe/params.hpp"
#include "r1oe/phi.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace r1oe {

// ---- continued fractions -------------------------------------------------

struct CFResult {
    std::vector<BigInt> coeffs;  // q_{-1}, q_0, q_1, ...
    bool terminated = false;     // the rational input ran out before `count`
};

CFResult continued_fraction(const Rational& x, std::size_t count);
// Exact rational value of a decimal literal such as "-0.4142".
Rational parse_decimal(const std::string& text);
// Convergent p/q of [a_0; a_1, ..., a_k].
Rational convergent(const std::vector<BigInt>& coeffs);

// A coefficient list "a,b,c" or "a,b,c..." where the ellipsis repeats c forever.
struct ThetaCF {
    std::vector<BigInt> coeffs;
    bool repeats_last = false;
    static ThetaCF parse(const std::string& text);
};

struct RotationVerdict {
    SeriesVerdict verdict = SeriesVerdict::inconclusive;
    Rational partial_sum;  // sum_k 1/(q_k q_{k+1}) over the listed coefficients
    std::string reason;
};

// Admissibility of sum_k 1/(q_k q_{k+1}) for q_0, q_1, ... (post-collapse).
RotationVerdict rotation_series_verdict(const std::vector<BigInt>& q, bool repeats_last);

struct RotationPrefix {
    Entries entries;        // collapsed steps: q_0 = Q_0...Q_{n0} >= 3, then the listed tail
    std::size_t n0 = 0;     // last collapsed index
    BigInt h_tilde_n0;      // C = C' for the family
    std::vector<BigInt> q;  // cutting values of `entries`
};

// cf = (Q_{-1}, Q_0, Q_1, ...). Collapses the shortest head with product >= 3.
RotationPrefix rotation_params(const std::vector<BigInt>& cf);

// ---- generators ----------------------------------------------------------

class Generator {
public:
    virtual ~Generator() = default;
    virtual std::string kind() const = 0;
    virtual BigInt C() const = 0;
    virtual BigInt Cprime() const = 0;
    // Steps stay sparse, so astronomically large q is representable.
    virtual bool strict_capable() const { return false; }
    // Steps fixed by the class data (e.g. listed continued-fraction terms).
    virtual std::size_t fixed_steps() const { return 0; }
    // Step n = prefix.size() with cutting value >= q_floor (when not fixed).
    virtual CutSpacParam next(const ParamSeq& prefix, const BigInt& q_floor) = 0;
    virtual std::map<std::string, std::string> provenance() const { return {}; }
};

class OdometerGen : public Generator {
public:
    std::string kind() const override { return "odometer"; }
    BigInt C() const override { return 1; }
    BigInt Cprime() const override { return 1; }
    bool strict_capable() const override { return true; }
    CutSpacParam next(const ParamSeq& prefix, const BigInt& q_floor) override;
};

// BSP base sequence repeated periodically; each emitted step composes base
// steps until the product reaches the floor.
class BspGen : public Generator {
public:
    explicit BspGen(Entries period, std::string name = "bsp");
    static std::unique_ptr<BspGen> chacon();
    std::string kind() const override { return name_; }
    BigInt C() const override { return C_; }
    BigInt Cprime() const override { return C_ > 0 ? C_ : BigInt(1); }
    CutSpacParam next(const ParamSeq& prefix, const BigInt& q_floor) override;
    std::map<std::string, std::string> provenance() const override;

private:
    Entries period_;
    std::string name_;
    BigInt C_;
    std::size_t cursor_ = 0;
};

// Gives a composed step of a BSP sequence with q >= min_q, starting at base
// index `start`; returns the step and the next unused base index.
std::pair<CutSpacParam, std::size_t> gen_bsp_extension(const Entries& base, std::size_t start, const BigInt& min_q);

class RotationGen : public Generator {
public:
    explicit RotationGen(std::vector<BigInt> cf);
    std::string kind() const override { return "rotation"; }
    BigInt C() const override { return prefix_.h_tilde_n0; }
    BigInt Cprime() const override { return prefix_.h_tilde_n0; }
    bool strict_capable() const override { return true; }
    std::size_t fixed_steps() const override { return prefix_.entries.size(); }
    CutSpacParam next(const ParamSeq& prefix, const BigInt& q_floor) override;
    std::map<std::string, std::string> provenance() const override;
    const RotationPrefix& rotation_prefix() const { return prefix_; }

private:
    std::vector<BigInt> cf_;
    RotationPrefix prefix_;
};

// Eigenvalue exp(2 pi i theta); theta is known to lie in [lo, hi].
class EigenvalueGen : public Generator {
public:
    EigenvalueGen(Rational theta_lo, Rational theta_hi);
    std::string kind() const override { return "eigenvalue"; }
    BigInt C() const override { return 7; }
    BigInt Cprime() const override { return Cprime_; }
    CutSpacParam next(const ParamSeq& prefix, const BigInt& q_floor) override;
    std::map<std::string, std::string> provenance() const override;

    // |1 - lambda^j| as a certified interval.
    Interval chord(const BigInt& j) const;
    // (j_n, delta_n) with delta_n minimal over j <= n and certified < 2 pi / n.
    std::pair<std::int64_t, Interval> j_delta(std::int64_t n);
    const std::vector<std::int64_t>& last_ells() const { return last_ells_; }

private:
    Rational lo_, hi_;
    BigInt Cprime_ = 1;
    std::map<std::int64_t, std::pair<std::int64_t, Interval>> jd_cache_;
    std::vector<std::int64_t> last_ells_;
    // Certified h > max(n^4/delta_{n^2}, (n+1)^4/delta_{(n+1)^2}).
    bool aux_ok(const BigInt& h, std::int64_t n);
};

struct OrnsteinParams {
    std::int64_t N = 1;
    std::int64_t K = 1;
    Rational eps = make_rational(1, 1000);
    Rational alpha = make_rational(5, 4);
    std::uint64_t seed = 0;
    std::int64_t max_tries = 20000;
    std::int64_t max_m = 200000;
    void validate() const;
};

struct OrnsteinCertificate {
    std::int64_t m = 0;
    std::int64_t K = 0;
    std::int64_t max_abs_window = 0;
    // max_l H(l, k) for k = 0..m-1.
    std::vector<std::int64_t> max_H;
    // Largest k with k < (1 - eps) m, or -1.
    std::int64_t k_limit = -1;
    bool window_ok = false;
    bool H_ok = false;
    bool ok() const { return window_ok && H_ok; }
    bool operator==(const OrnsteinCertificate& o) const {
        return m == o.m && K == o.K && max_abs_window == o.max_abs_window && max_H == o.max_H &&
               k_limit == o.k_limit && window_ok == o.window_ok && H_ok == o.H_ok;
    }
};

// Window counts for a_1..a_m (stored 0-based).
OrnsteinCertificate ornstein_certify(const std::vector<std::int64_t>& a, std::int64_t K, const Rational& eps,
                                     const Rational& alpha);

struct OrnsteinSample {
    std::vector<std::int64_t> a;
    OrnsteinCertificate cert;
    std::int64_t tries = 0;
};

// Rejection sampling of bounded prefix sums; throws std::runtime_error when
// the budget runs out.
OrnsteinSample ornstein_sample(const OrnsteinParams& p);

class MixingGen : public Generator {
public:
    // eps and N overrides make tiny families possible; q0 is the initial step.
    MixingGen(std::uint64_t seed, Rational eps, std::optional<std::int64_t> N_override, std::int64_t q0 = 3);
    std::string kind() const override { return "mixing"; }
    BigInt C() const override { return 2; }
    BigInt Cprime() const override { return 2; }
    CutSpacParam next(const ParamSeq& prefix, const BigInt& q_floor) override;
    std::map<std::string, std::string> provenance() const override;
    const std::vector<OrnsteinSample>& samples() const { return samples_; }

private:
    std::uint64_t seed_;
    Rational eps_;
    std::optional<std::int64_t> N_override_;
    std::int64_t q0_;
    std::vector<OrnsteinSample> samples_;
};

// Step n of the strongly mixing family from an Ornstein vector.
CutSpacParam mixing_step(const ParamSeq& prev, std::size_t n, const OrnsteinSample& s);

// ---- scheduler -----------------------------------------------------------

enum class Mode { strict, relaxed };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct KappaEntry {
    std::size_t n = 0;
    BigInt kappa;               // strict only; 0 when wider than StepFloor::kept_bits
    std::size_t kappa_bits = 0; // strict only
    double log2_kappa = 0;      // strict only
    std::string binding;        // condition that fixed kappa
    std::string q_binding;      // kappa, critpr3, critpr10, fixed, relaxed-floor
    bool crit1_holds = true;    // q_n > max(p_n, q'_0, ..., q'_{n-1})
};

struct ScheduleOptions {
    Mode mode = Mode::relaxed;
    std::size_t steps = 4;
    std::vector<BigInt> primes;  // empty: default schedule
    BigInt min_q = 3;            // relaxed floor
};

struct Schedule {
    ParamSeq seq;
    std::vector<BigInt> primes;
    std::vector<KappaEntry> log;
    std::string cls;
    BigInt C, Cprime;
    Mode mode = Mode::relaxed;
};

Schedule schedule(Generator& gen, const PhiSpec& phi, const ScheduleOptions& opt);

// Least integer floor of the scheduler at step n = prefix.size().
struct StepFloor {
    static constexpr std::size_t kept_bits = 4096;
    BigInt floor;
    BigInt kappa;  // exact when kappa_bits <= kept_bits, else 0
    std::size_t kappa_bits = 0;
    double log2_kappa = 0;
    std::string binding;
    std::string q_binding;
};

// tab must cover rows 1..n (q'_0 .. q'_{n-1}); it is ignored for n = 0.
StepFloor strict_floor(const ParamSeq& prefix, const RecurrenceTables& tab, const std::vector<BigInt>& primes,
                       const PhiSpec& phi, const BigInt& C, const BigInt& Cprime);

struct Branch {
    std::vector<int> bits;
    Schedule sched;
    RotationVerdict verdict;
};

struct BranchFamily {
    std::vector<Branch> branches;
    bool injective = false;
};

// q(eps)_{i+1} = floor_i + eps_i over a fixed rotation prefix.
BranchFamily branch_family(const std::vector<BigInt>& cf_prefix, const PhiSpec& phi, Mode mode,
                           const std::vector<std::vector<int>>& bits, const std::vector<BigInt>& primes = {});

}  // namespace r1oe
