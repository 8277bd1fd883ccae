#include "r1oe/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace r1oe::io {

ParseError::ParseError(std::string w, const std::string& what)
    : std::runtime_error(w.empty() ? what : w + ": " + what), where(std::move(w)) {}

namespace {

std::string real_str(const Real& x, bool up) {
    if (mpfr_nan_p(x.get())) return "nan";
    if (mpfr_inf_p(x.get())) return mpfr_sgn(x.get()) > 0 ? "inf" : "-inf";
    char buf[96];
    mpfr_snprintf(buf, sizeof buf, up ? "%.20RUe" : "%.20RDe", x.get());
    return buf;
}

const Json& member(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw ParseError(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(where, std::string("missing field '") + key + "'");
    return *it;
}

std::size_t size_from(const Json& j, const std::string& where) {
    if (!j.is_number_unsigned()) throw ParseError(where, "expected a non-negative integer");
    return j.get<std::size_t>();
}

Json term_list(const std::vector<BoundTerm>& v, bool with_m) {
    Json a = Json::array();
    for (const auto& t : v) {
        Json e = {{"n", t.n}, {"value", to_json(t.value)}, {"envelope", t.envelope}};
        if (with_m) e["m"] = t.m;
        a.push_back(std::move(e));
    }
    return a;
}

}  // namespace

Json to_json(const BigInt& x) {
    if (mpz_sizeinbase(x.get_mpz_t(), 2) / 3 > kMaxSerializedDigits)
        throw std::length_error("integer with " + std::to_string(mpz_sizeinbase(x.get_mpz_t(), 2)) +
                                " bits is too large to serialize");
    return to_dec(x);
}

Json to_json(const Rational& x) { return {{"num", to_json(x.get_num())}, {"den", to_json(x.get_den())}}; }

Json to_json(const Interval& x) { return {{"lo", real_str(x.lo, false)}, {"hi", real_str(x.hi, true)}}; }

BigInt big_from(const Json& j, const std::string& where) {
    if (j.is_number_integer()) return BigInt(std::to_string(j.get<long long>()));
    if (j.is_number_unsigned()) return BigInt(std::to_string(j.get<unsigned long long>()));
    if (!j.is_string()) throw ParseError(where, "expected a decimal integer string");
    try {
        return parse_dec(j.get<std::string>());
    } catch (const std::exception& e) {
        throw ParseError(where, e.what());
    }
}

Rational rational_from(const Json& j, const std::string& where) {
    BigInt num = big_from(member(j, "num", where), where + "/num");
    BigInt den = big_from(member(j, "den", where), where + "/den");
    if (den <= 0) throw ParseError(where + "/den", "denominator must be positive");
    return make_rational(num, den);
}

Json step_json(const CutSpacParam& p) {
    Json s;
    s["q"] = to_json(p.q);
    if (p.q <= 100000) {
        Json dense = Json::array();
        for (const auto& v : p.spacers()) dense.push_back(to_json(v));
        s["spacers"] = std::move(dense);
    } else {
        Json nz = Json::array();
        for (const auto& [i, v] : p.nonzero) nz.push_back(Json::array({to_json(i), to_json(v)}));
        s["spacers"] = {{"nonzero", std::move(nz)}};
    }
    return s;
}

CutSpacParam step_from(const Json& j, const std::string& where) {
    BigInt q = big_from(member(j, "q", where), where + "/q");
    const Json& sp = member(j, "spacers", where);
    CutSpacParam p;
    try {
        if (sp.is_array()) {
            std::vector<BigInt> v;
            for (std::size_t i = 0; i < sp.size(); ++i)
                v.push_back(big_from(sp[i], where + "/spacers/" + std::to_string(i)));
            p = CutSpacParam::dense(q, v);
        } else {
            const Json& nz = member(sp, "nonzero", where + "/spacers");
            if (!nz.is_array()) throw ParseError(where + "/spacers/nonzero", "expected an array");
            p.q = q;
            for (std::size_t i = 0; i < nz.size(); ++i) {
                const std::string w = where + "/spacers/nonzero/" + std::to_string(i);
                if (!nz[i].is_array() || nz[i].size() != 2) throw ParseError(w, "expected [index, value]");
                p.nonzero.emplace_back(big_from(nz[i][0], w + "/0"), big_from(nz[i][1], w + "/1"));
            }
        }
        p.validate(2);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(where, e.what());
    }
    return p;
}

Json params_document(const Entries& entries, const Json& provenance) {
    Json steps = Json::array();
    for (const auto& e : entries) steps.push_back(step_json(e));
    Json doc = {{"params", std::move(steps)}};
    if (!provenance.empty()) doc["provenance"] = provenance;
    return doc;
}

Entries params_from(const Json& doc) {
    const Json& steps = member(doc, "params", "");
    if (!steps.is_array() || steps.empty()) throw ParseError("/params", "expected a non-empty array");
    Entries out;
    for (std::size_t i = 0; i < steps.size(); ++i) out.push_back(step_from(steps[i], "/params/" + std::to_string(i)));
    return out;
}

Json kappa_log_json(const std::vector<KappaEntry>& log) {
    Json a = Json::array();
    for (const auto& e : log) {
        Json x = {{"n", e.n}, {"q_binding", e.q_binding}, {"crit1_holds", e.crit1_holds}};
        if (!e.binding.empty()) x["binding"] = e.binding;
        if (e.kappa_bits > 0) {
            x["kappa"] = e.kappa > 0 ? to_json(e.kappa) : Json(nullptr);
            x["kappa_bits"] = e.kappa_bits;
            std::ostringstream os;
            os << std::setprecision(15) << e.log2_kappa;
            x["log2_kappa"] = os.str();
        }
        a.push_back(std::move(x));
    }
    return a;
}

Json schedule_provenance(const Schedule& s, const Generator& gen, const PhiSpec& phi) {
    Json p;
    p["class"] = s.cls;
    p["mode"] = to_string(s.mode);
    p["phi"] = phi.name();
    p["C"] = to_json(s.C);
    p["Cprime"] = to_json(s.Cprime);
    Json pr = Json::array();
    for (const auto& x : s.primes) pr.push_back(to_json(x));
    p["primes"] = std::move(pr);
    p["kappa_log"] = kappa_log_json(s.log);
    Json g = Json::object();
    for (const auto& [k, v] : gen.provenance()) g[k] = v;
    p["generator"] = std::move(g);
    return p;
}

Json tables_json(const RecurrenceTables& tab) {
    Json r = Json::array(), t = Json::array();
    for (std::size_t n = 0; n <= tab.N(); ++n)
        for (std::size_t m = std::max<std::size_t>(n, 1); m <= tab.M(); ++m) {
            if (n >= 1) r.push_back({{"n", n}, {"m", m}, {"value", to_json(tab.r(n, m))}});
            t.push_back({{"n", n}, {"m", m}, {"value", to_json(tab.t(n, m))}});
        }
    Json qp = Json::array(), hp = Json::array(), Hp = Json::array();
    for (std::size_t k = 0; k < tab.qprime_count(); ++k) qp.push_back(to_json(tab.qprime(k)));
    for (std::size_t k = 0; k <= tab.N(); ++k) {
        hp.push_back(to_json(tab.hprime(k)));
        Hp.push_back(to_json(tab.Hprime(k)));
    }
    return {{"N", tab.N()}, {"M", tab.M()}, {"r", r}, {"t", t}, {"qprime", qp}, {"hprime", hp}, {"Hprime", Hp},
            {"stage_one_divergence", tab.stage_one_divergence()}};
}

Json tables_json(const Engine& eng) {
    Json r = Json::array(), t = Json::array();
    for (std::size_t n = 1; n <= eng.N(); ++n)
        for (std::size_t m = n; m <= eng.M(); ++m) {
            r.push_back({{"n", n}, {"m", m}, {"value", std::to_string(eng.r(n, m))}});
            t.push_back({{"n", n}, {"m", m}, {"value", std::to_string(eng.t(n, m))}});
        }
    Json qp = Json::array(), hp = Json::array(), Hp = Json::array();
    for (std::size_t k = 0; k < eng.N(); ++k) qp.push_back(std::to_string(eng.qprime(k)));
    for (std::size_t k = 0; k <= eng.N(); ++k) {
        hp.push_back(std::to_string(eng.hprime(k)));
        Hp.push_back(std::to_string(eng.Hprime(k)));
    }
    return {{"N", eng.N()}, {"M", eng.M()}, {"r", r}, {"t", t}, {"qprime", qp}, {"hprime", hp}, {"Hprime", Hp}};
}

Json state_json(const StateDoc& s) {
    Json pr = Json::array();
    for (const auto& p : s.primes) pr.push_back(to_json(p));
    Json doc = {{"format", "rank1oe-state"},
                {"version", 1},
                {"params", params_document(s.entries)["params"]},
                {"primes", std::move(pr)},
                {"N", s.N},
                {"M", s.M},
                {"mode", s.mode},
                {"C", to_json(s.C)},
                {"Cprime", to_json(s.Cprime)},
                {"enumerative", s.enumerative},
                {"tables", s.tables}};
    doc["hash"] = fnv1a_hex(dump(doc));
    return doc;
}

StateDoc state_from(const Json& doc) {
    if (member(doc, "format", "") != "rank1oe-state") throw ParseError("/format", "not a rank1oe state file");
    if (member(doc, "version", "") != 1) throw ParseError("/version", "unsupported state version");
    const Json& h = member(doc, "hash", "");
    if (!h.is_string()) throw ParseError("/hash", "expected a string");
    Json body = doc;
    body.erase("hash");
    if (fnv1a_hex(dump(body)) != h.get<std::string>())
        throw ParseError("/hash", "content hash mismatch (file modified or corrupted)");
    StateDoc s;
    s.entries = params_from(doc);
    const Json& pr = member(doc, "primes", "");
    if (!pr.is_array()) throw ParseError("/primes", "expected an array");
    for (std::size_t i = 0; i < pr.size(); ++i) s.primes.push_back(big_from(pr[i], "/primes/" + std::to_string(i)));
    s.N = size_from(member(doc, "N", ""), "/N");
    s.M = size_from(member(doc, "M", ""), "/M");
    if (s.N < 1 || s.M < s.N || s.M > s.entries.size())
        throw ParseError("/M", "need 1 <= N <= M <= number of steps");
    if (s.primes.size() < s.N) throw ParseError("/primes", "fewer primes than N");
    const Json& mode = member(doc, "mode", "");
    if (mode != "strict" && mode != "relaxed") throw ParseError("/mode", "expected strict or relaxed");
    s.mode = mode.get<std::string>();
    s.C = big_from(member(doc, "C", ""), "/C");
    s.Cprime = big_from(member(doc, "Cprime", ""), "/Cprime");
    const Json& en = member(doc, "enumerative", "");
    if (!en.is_boolean()) throw ParseError("/enumerative", "expected a boolean");
    s.enumerative = en.get<bool>();
    s.tables = member(doc, "tables", "");
    s.hash = h.get<std::string>();
    return s;
}

Json to_json(const PartitionReport& r) {
    return {{"n", r.n},
            {"disjoint", r.disjoint},
            {"covered", r.covered},
            {"total", r.total},
            {"predicted_uncovered", r.predicted_uncovered},
            {"tail", r.tail},
            {"coverage_all", to_json(r.coverage_all)},
            {"coverage_bricked", to_json(r.coverage_bricked)},
            {"pass", r.ok()}};
}

Json to_json(const EReport& r) {
    return {{"n", r.n}, {"m", r.m}, {"uncovered", r.uncovered}, {"bound", r.bound},
            {"whole_levels", r.whole_levels}, {"pass", r.ok()}};
}

Json to_json(const KReport& r) {
    return {{"n", r.n}, {"size", r.levels.size()}, {"lower_bound", r.lower_bound},
            {"two_ways_agree", r.two_ways_agree}, {"pass", r.ok()}};
}

Json to_json(const OrbitReport& r) {
    return {{"n", r.n},
            {"points", r.points},
            {"found", r.found},
            {"max_abs_k", r.max_abs_k},
            {"bound", r.bound},
            {"minus_one_cases", r.minus_one_cases},
            {"constructive_mismatch", r.constructive_mismatch},
            {"failures", r.failures},
            {"pass", r.ok()}};
}

Json to_json(const CocycleBoundReport& r) {
    return {{"zeta_values", r.zeta_values}, {"zeta_violations", r.zeta_violations}, {"cs_values", r.cs_values},
            {"cs_violations", r.cs_violations}, {"pass", r.ok()}};
}

Json to_json(const QPrimeReport& r) {
    Json rows = Json::array();
    for (const auto& x : r.rows) {
        Json e = {{"n", x.n}, {"lower_ok", x.lower_ok}, {"upper_ok", x.upper_ok}};
        if (x.ratio_ok) e["ratio_ok"] = *x.ratio_ok;
        std::ostringstream os;
        os << std::setprecision(12) << x.ratio;
        e["ratio"] = os.str();
        rows.push_back(std::move(e));
    }
    return {{"rows", rows}, {"pass", r.all_ok()}};
}

Json to_json(const Universality& u) {
    Json f = Json::object();
    for (const auto& [p, e] : u.prime_factors) f[p] = e;
    return {{"divisible", u.divisible}, {"failures", u.failures}, {"prime_factors", f}, {"pass", u.divisible}};
}

Json to_json(const CocycleReport& r) {
    Json hist = Json::array();
    for (const auto& [c, m] : r.hist) hist.push_back({{"c", c}, {"mass", to_json(m)}});
    Json cells = Json::array();
    for (const auto& [nm, m] : r.cell_mass) cells.push_back({{"n", nm.first}, {"m", nm.second}, {"mass", to_json(m)}});
    Json ct = Json::array();
    for (const auto& w : r.ct) {
        Json wh = Json::array();
        for (const auto& [c, m] : w.hist) wh.push_back({{"k", c}, {"mass", to_json(m)}});
        ct.push_back({{"n", w.n},
                      {"points", w.points},
                      {"found", w.found},
                      {"bound", w.bound},
                      {"max_abs", w.max_abs},
                      {"hist", wh},
                      {"phi_sum", to_json(w.phi_sum)},
                      {"pass", w.ok()}});
    }
    std::ostringstream ent;
    ent << std::setprecision(15) << r.entropy;
    return {{"N", r.N},
            {"M", r.M},
            {"hF", r.hF},
            {"hist", hist},
            {"cell_mass", cells},
            {"resolved_mass", to_json(r.resolved_mass)},
            {"unresolved_mass", to_json(r.unresolved_mass)},
            {"bound_violations", r.bound_violations},
            {"entropy", ent.str()},
            {"phi_sum", to_json(r.phi_sum)},
            {"ct", ct}};
}

Json to_json(const BoundsReport& b) {
    Json eps = Json::array();
    for (const auto& e : b.eps) eps.push_back(to_json(e));
    return {{"phi", b.phi},
            {"steps", b.steps},
            {"rows", b.rows},
            {"eps", eps},
            {"M0_upper", to_json(b.M0_upper)},
            {"Delta", term_list(b.Delta, false)},
            {"Delta_eps", term_list(b.Delta_eps, false)},
            {"Gamma1", term_list(b.Gamma1, false)},
            {"Gamma2", term_list(b.Gamma2, false)},
            {"Gamma3", term_list(b.Gamma3, true)},
            {"Gamma_eps", term_list(b.Gamma_eps, true)},
            {"cT_master", to_json(b.cT_master)},
            {"D11", to_json(b.D11)},
            {"cS_master", to_json(b.cS_master)}};
}

Json to_json(const EnvelopeReport& e) {
    Json rows = Json::array();
    for (const auto& r : e.rows)
        rows.push_back({{"n", r.n}, {"quantity", r.quantity}, {"value", to_json(r.value)},
                        {"limit", to_json(r.limit)}, {"pass", r.ok}});
    return {{"rows", rows}, {"pass", e.all_ok()}};
}

Json to_json(const Comparison& c) {
    return {{"empirical", to_json(c.empirical)}, {"bound", to_json(c.bound)}, {"slack", to_json(c.slack)},
            {"pass", c.ok}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

Json load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const Json::parse_error& e) {
        throw ParseError("", "'" + path + "' is not valid JSON (" + e.what() + ")");
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace r1oe::io
