#include "r1oe/cli.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <sstream>

namespace r1oe::cli {

namespace {

using io::Json;

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        cur.erase(0, cur.find_first_not_of(" \t"));
        cur.erase(cur.find_last_not_of(" \t") + 1);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::vector<BigInt> parse_primes(const std::string& s) {
    std::vector<BigInt> out;
    for (const auto& tok : split_commas(s)) {
        BigInt p;
        try {
            p = parse_dec(tok);
        } catch (const std::exception&) {
            throw InputError("--primes: '" + tok + "' is not an integer");
        }
        if (!fits_i64(p) || p < 2 || !is_prime_u64(static_cast<std::uint64_t>(to_i64(p))))
            throw InputError("--primes: " + tok + " is not a prime");
        out.push_back(p);
    }
    if (out.empty() && !s.empty()) throw InputError("--primes: empty list");
    return out;
}

Rational parse_rational_flag(const std::string& flag, const std::string& text) {
    try {
        return parse_decimal(text);
    } catch (const std::exception& e) {
        throw InputError(flag + ": " + e.what());
    }
}

// Every theta within 10^-k of the literal, k = digits after the point.
std::pair<Rational, Rational> decimal_interval(const std::string& text) {
    Rational d = parse_rational_flag("--theta-decimal", text);
    std::size_t dot = text.find('.');
    std::size_t digits = dot == std::string::npos ? 0 : text.size() - dot - 1;
    BigInt ten;
    mpz_ui_pow_ui(ten.get_mpz_t(), 10, digits);
    Rational u = make_rational(BigInt(1), ten);
    return {d - u, d + u};
}

// Coefficients shared by every number in [lo, hi], minus the last shared one.
std::vector<BigInt> certain_cf(const Rational& lo, const Rational& hi) {
    CFResult a = continued_fraction(lo, 64), b = continued_fraction(hi, 64);
    std::vector<BigInt> out;
    for (std::size_t i = 0; i < a.coeffs.size() && i < b.coeffs.size() && a.coeffs[i] == b.coeffs[i]; ++i)
        out.push_back(a.coeffs[i]);
    if (!out.empty()) out.pop_back();
    return out;
}

ThetaCF parse_cf_flag(const std::string& text) {
    try {
        return ThetaCF::parse(text);
    } catch (const std::exception& e) {
        throw InputError(std::string("--theta-cf: ") + e.what());
    }
}

// All theta = [a_0; a_1, ..., a_k, x] with x >= 1.
std::pair<Rational, Rational> cf_interval(ThetaCF cf) {
    if (cf.repeats_last)
        while (cf.coeffs.size() < 64) cf.coeffs.push_back(cf.coeffs.back());
    Rational a = convergent(cf.coeffs);
    auto ext = cf.coeffs;
    ext.push_back(1);
    Rational b = convergent(ext);
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

Json rotation_verdict_json(const RotationVerdict& v) {
    return {{"verdict", to_string(v.verdict)}, {"partial_sum", io::to_json(v.partial_sum)}, {"reason", v.reason}};
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InputError&) {
        throw;
    } catch (const io::ParseError& e) {
        throw InputError(e.what());
    } catch (const IllPosed& e) {
        throw InputError(e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    } catch (const std::length_error& e) {
        throw InputError(e.what());
    } catch (const std::out_of_range& e) {
        throw InputError(e.what());
    }
}

// Runs tasks[i] for every i on at most worker_count() threads, in index order per worker.
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& task) {
    std::vector<T> out(count);
    const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(worker_count(), count));
    if (w <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = task(i);
        return out;
    }
    std::vector<std::future<void>> jobs;
    for (std::size_t t = 0; t < w; ++t)
        jobs.push_back(std::async(std::launch::async, [&, t] {
            for (std::size_t i = t; i < count; i += w) out[i] = task(i);
        }));
    for (auto& j : jobs) j.get();
    return out;
}

}  // namespace

Json cmd_gen(const GenOptions& opt) {
    return guarded([&]() -> Json {
        if (opt.depth_n < 1) throw InputError("--depth-n must be >= 1");
        const PhiSpec phi = PhiSpec::parse(opt.phi);
        ScheduleOptions so;
        so.mode = parse_mode(opt.mode);
        so.steps = opt.depth_n;
        so.primes = parse_primes(opt.primes);
        if (opt.min_q) so.min_q = parse_dec(*opt.min_q);
        if (so.mode == Mode::strict && !phi.certified())
            throw InputError("strict mode needs a certified phi family, not '" + phi.name() + "'");

        const std::string& c = opt.cls;
        if (c == "odometer" && opt.q) {
            BigInt q = parse_dec(*opt.q);
            if (q < 2) throw InputError("--q must be >= 2");
            Entries e(opt.depth_n, CutSpacParam::last_only(q, 0));
            Json prov = {{"class", "odometer"}, {"mode", "fixed"}, {"q", io::to_json(q)}, {"C", "1"}, {"Cprime", "1"}};
            Json pr = Json::array();
            for (const auto& p : extend_primes(so.primes, opt.depth_n + 1)) pr.push_back(io::to_json(p));
            prov["primes"] = std::move(pr);
            return io::params_document(e, prov);
        }

        std::unique_ptr<Generator> gen;
        Json extra = Json::object();
        if (c == "odometer") {
            gen = std::make_unique<OdometerGen>();
        } else if (c == "chacon") {
            Entries e(opt.depth_n, CutSpacParam::dense(3, {0, 0, 1, 0}));
            Json prov = {{"class", "chacon"}, {"mode", "fixed"}, {"C", "1"}, {"Cprime", "1"}};
            Json pr = Json::array();
            for (const auto& p : extend_primes(so.primes, opt.depth_n + 1)) pr.push_back(io::to_json(p));
            prov["primes"] = std::move(pr);
            return io::params_document(e, prov);
        } else if (c == "chacon-skip") {
            gen = BspGen::chacon();
        } else if (c == "rotation") {
            std::vector<BigInt> cf;
            bool repeats = false;
            if (!opt.theta_cf.empty()) {
                ThetaCF t = parse_cf_flag(opt.theta_cf);
                cf = t.coeffs;
                repeats = t.repeats_last;
            } else if (!opt.theta_decimal.empty()) {
                auto [lo, hi] = decimal_interval(opt.theta_decimal);
                cf = certain_cf(lo, hi);
            } else {
                throw InputError("rotation needs --theta-cf or --theta-decimal");
            }
            RotationPrefix pre = rotation_params(cf);
            RotationVerdict listed = rotation_series_verdict(pre.q, repeats);
            if (listed.verdict == SeriesVerdict::diverges)
                throw InputError("rotation rejected: series sum 1/(q_k q_{k+1}) diverges (" + listed.reason + ")");
            extra["listed_verdict"] = rotation_verdict_json(listed);
            gen = std::make_unique<RotationGen>(cf);
        } else if (c == "eigenvalue") {
            std::pair<Rational, Rational> iv;
            if (!opt.theta_decimal.empty())
                iv = decimal_interval(opt.theta_decimal);
            else if (!opt.theta_cf.empty())
                iv = cf_interval(parse_cf_flag(opt.theta_cf));
            else
                throw InputError("eigenvalue needs --theta-cf or --theta-decimal");
            gen = std::make_unique<EigenvalueGen>(iv.first, iv.second);
        } else if (c == "mixing") {
            Rational eps = parse_rational_flag("--ornstein-eps", opt.ornstein_eps);
            gen = std::make_unique<MixingGen>(opt.seed, eps, opt.ornstein_n);
        } else {
            throw InputError("unknown class '" + c +
                             "' (odometer, chacon, chacon-skip, rotation, eigenvalue, mixing)");
        }

        Schedule s = schedule(*gen, phi, so);
        Json prov = io::schedule_provenance(s, *gen, phi);
        if (c == "mixing") {
            Json certs = Json::array();
            for (const auto& smp : static_cast<MixingGen&>(*gen).samples())
                certs.push_back({{"m", smp.cert.m},
                                 {"K", smp.cert.K},
                                 {"max_abs_window", smp.cert.max_abs_window},
                                 {"k_limit", smp.cert.k_limit},
                                 {"pass", smp.cert.ok()},
                                 {"tries", smp.tries}});
            prov["ornstein"] = std::move(certs);
            prov["seed"] = opt.seed;
        }
        if (c == "rotation") {
            std::vector<BigInt> q;
            for (std::size_t k = 0; k < s.seq.size(); ++k) q.push_back(s.seq.q(k));
            prov["series"] = rotation_verdict_json(rotation_series_verdict(q, false));
        }
        for (auto& [k, v] : extra.items()) prov[k] = v;
        return io::params_document(s.seq.entries, prov);
    });
}

BuildOutput cmd_build(const Json& params_doc, const BuildOptions& opt) {
    return guarded([&]() -> BuildOutput {
        io::StateDoc st;
        st.entries = io::params_from(params_doc);
        const Json prov = params_doc.contains("provenance") ? params_doc["provenance"] : Json::object();
        const std::size_t steps = st.entries.size();
        st.M = opt.depth_m ? opt.depth_m : steps;
        st.N = opt.depth_n ? opt.depth_n : std::min<std::size_t>(3, st.M);
        if (st.N < 1 || st.M < st.N) throw InputError("need 1 <= --depth-n <= --depth-m");
        if (st.M > steps)
            throw InputError("--depth-m " + std::to_string(st.M) + " exceeds the " + std::to_string(steps) +
                             " parameter steps");

        std::vector<BigInt> primes = parse_primes(opt.primes);
        if (primes.empty() && prov.contains("primes"))
            for (std::size_t i = 0; i < prov["primes"].size(); ++i)
                primes.push_back(io::big_from(prov["primes"][i], "/provenance/primes/" + std::to_string(i)));
        st.primes = extend_primes(primes, st.M + 1);
        if (prov.contains("mode") && prov["mode"] == "strict") st.mode = "strict";
        if (prov.contains("C")) st.C = io::big_from(prov["C"], "/provenance/C");
        if (prov.contains("Cprime")) st.Cprime = io::big_from(prov["Cprime"], "/provenance/Cprime");

        const ParamSeq seq = derive_sequences(st.entries);
        RecurrenceTables tab(seq, st.primes, st.N, st.M);
        st.tables = io::tables_json(tab);
        st.enumerative = seq.h.at(st.M) <= opt.max_levels;

        BuildOutput out;
        out.tables = {{"analytic", st.tables}};
        if (st.enumerative) {
            Engine eng(seq, st.primes, st.N, st.M);
            out.tables["enumerative"] = io::tables_json(eng);
        }
        out.state = io::state_json(st);
        return out;
    });
}

VerifyOutput cmd_verify(const Json& state_doc, const std::string& suite, const std::string& phi_text) {
    static const std::vector<std::string> suites{"all", "partition", "cocycle", "orbit", "bounds"};
    if (std::find(suites.begin(), suites.end(), suite) == suites.end())
        throw InputError("unknown suite '" + suite + "' (all, partition, cocycle, orbit, bounds)");
    const io::StateDoc st = guarded([&] { return io::state_from(state_doc); });
    const PhiSpec phi = guarded([&] { return PhiSpec::parse(phi_text); });
    const bool want_all = suite == "all";
    const bool engine_suite = want_all || suite != "bounds";
    if (engine_suite && !want_all && !st.enumerative)
        throw InputError("suite '" + suite + "' needs the enumerative backend; the state was built without it");

    const ParamSeq seq = derive_sequences(st.entries);
    const RecurrenceTables tab = guarded([&] { return RecurrenceTables(seq, st.primes, st.N, st.M); });
    std::optional<Engine> eng;
    if (st.enumerative) eng.emplace(seq, st.primes, st.N, st.M);

    VerifyOutput out;
    Json checks = Json::object();
    Json skipped = Json::array();
    bool pass = true;
    auto record = [&](const std::string& name, Json j) {
        pass = pass && j.value("pass", false);
        checks[name] = std::move(j);
    };

    record("stored_tables", {{"pass", io::tables_json(tab) == st.tables}});

    auto run = [&](const std::string& s) { return want_all || suite == s; };
    if (!eng) {
        for (const char* s : {"partition", "cocycle", "orbit"})
            if (run(s)) skipped.push_back(s);
    }

    if (eng && run("partition")) {
        Json parts = Json::array(), es = Json::array(), ks = Json::array();
        bool ok = true;
        for (std::size_t n = 1; n <= st.N; ++n) {
            auto p = eng->partition_check(n);
            ok = ok && p.ok();
            parts.push_back(io::to_json(p));
            for (std::size_t m = n; m <= st.M; ++m) {
                auto e = eng->E_report(n, m);
                ok = ok && e.ok();
                es.push_back(io::to_json(e));
            }
            auto k = eng->build_K(n);
            ok = ok && k.ok();
            ks.push_back(io::to_json(k));
        }
        record("partition", {{"partition", parts}, {"E", es}, {"K", ks}, {"pass", ok}});
    }

    if (eng && run("orbit")) {
        std::function<OrbitReport(std::size_t)> task = [&](std::size_t i) { return eng->verify_orbit_on_K(i + 1); };
        auto reps = parallel_map<OrbitReport>(st.N, task);
        Json rows = Json::array();
        bool ok = true;
        for (const auto& r : reps) {
            ok = ok && r.ok();
            rows.push_back(io::to_json(r));
        }
        record("orbit", {{"per_n", rows}, {"pass", ok}});
    }

    // The truncated c_S bound at F = M needs table rows up to M.
    std::optional<RecurrenceTables> btab;
    std::optional<BoundsReport> bounds;
    try {
        btab.emplace(seq, st.primes, st.M, st.M);
    } catch (const IllPosed& e) {
        skipped.push_back(std::string("bounds rows beyond N: ") + e.what());
    }
    if (phi.subadditive()) {
        BoundsInput in;
        in.seq = &seq;
        in.tab = btab ? &*btab : &tab;
        in.C = st.C;
        in.Cprime = st.Cprime;
        in.scheduler_tail = st.mode == "strict";
        bounds = bounds_tables(in, phi);
    }

    if (eng && run("cocycle")) {
        auto cb = eng->cocycle_bounds();
        record("cocycle_bounds", io::to_json(cb));
        auto rep = cocycle_histogram(*eng, phi, std::min<std::size_t>(st.N, 3));
        bool ct_ok = true;
        for (const auto& w : rep.ct) ct_ok = ct_ok && w.ok();
        Json h = io::to_json(rep);
        h["pass"] = rep.bound_violations == 0 && ct_ok;
        record("cocycle_histogram", std::move(h));
        out.histogram_csv = histogram_csv(rep.hist);
        if (bounds && btab)
            record("empirical_vs_bound", io::to_json(compare(rep, *bounds)));
        else
            skipped.push_back(bounds ? "empirical_vs_bound (needs table rows up to M)"
                                     : "empirical_vs_bound (phi not subadditive)");
    }

    if (run("bounds")) {
        if (eng) {
            bool same = true;
            for (std::size_t n = 1; n <= st.N; ++n) {
                same = same && BigInt(static_cast<long>(eng->qprime(n - 1))) == tab.qprime(n - 1);
                for (std::size_t m = n; m <= st.M; ++m)
                    same = same && BigInt(static_cast<long>(eng->r(n, m))) == tab.r(n, m) &&
                           BigInt(static_cast<long>(eng->t(n, m))) == tab.t(n, m);
            }
            record("backend_equivalence", {{"pass", same}});
        }
        record("qprime_bounds", io::to_json(qprime_bounds_check(tab, seq, st.mode == "strict")));
        record("universality", io::to_json(universality_check(tab)));
        if (bounds) {
            Json b = io::to_json(*bounds);
            b["pass"] = true;
            record("bounds_tables", std::move(b));
            out.bounds_csv = bounds_csv(*bounds);
            if (st.mode == "strict" && seq.size() >= 2) {
                const std::size_t depth = std::min<std::size_t>({seq.size() - 1, st.N, 8});
                record("strict_envelopes", io::to_json(strict_envelopes(*bounds, seq, depth)));
            }
        } else {
            skipped.push_back("bounds_tables (phi not subadditive)");
        }
    }

    out.pass = pass;
    out.report = {{"suite", suite},     {"phi", phi.name()},  {"state_hash", st.hash}, {"N", st.N},
                  {"M", st.M},         {"mode", st.mode},    {"enumerative", st.enumerative},
                  {"checks", checks},  {"skipped", skipped}, {"pass", pass}};
    return out;
}

namespace {

// Output directory handling: empty prints the main document to stdout.
void emit(const std::string& dir, const std::string& name, const std::string& text, bool main_doc) {
    if (dir.empty()) {
        if (main_doc) std::cout << text;
        return;
    }
    std::filesystem::create_directories(dir);
    io::write_file((std::filesystem::path(dir) / name).string(), text);
}

void apply_config(const Json& cfg, GenOptions& g, const CLI::App& sub) {
    auto str = [&](const char* key, const char* flag, std::string& dst) {
        if (cfg.contains(key) && sub.count(flag) == 0) {
            if (!cfg[key].is_string()) throw InputError(std::string("config: '") + key + "' must be a string");
            dst = cfg[key].get<std::string>();
        }
    };
    str("class", "--class", g.cls);
    str("theta_cf", "--theta-cf", g.theta_cf);
    str("theta_decimal", "--theta-decimal", g.theta_decimal);
    str("phi", "--phi", g.phi);
    str("primes", "--primes", g.primes);
    str("mode", "--mode", g.mode);
    str("ornstein_eps", "--ornstein-eps", g.ornstein_eps);
    if (cfg.contains("depth_n") && sub.count("--depth-n") == 0) g.depth_n = cfg["depth_n"].get<std::size_t>();
    if (cfg.contains("seed") && sub.count("--seed") == 0) g.seed = cfg["seed"].get<std::uint64_t>();
    if (cfg.contains("ornstein_n") && sub.count("--ornstein-n") == 0) g.ornstein_n = cfg["ornstein_n"].get<std::int64_t>();
    if (cfg.contains("min_q") && sub.count("--min-q") == 0) g.min_q = cfg["min_q"].get<std::string>();
    if (cfg.contains("q") && sub.count("--q") == 0) g.q = cfg["q"].get<std::string>();
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"rank1oe: rank-one cutting and stacking, orbit equivalence to the universal odometer"};
    app.require_subcommand(1);

    GenOptions g;
    std::string config, gen_out;
    std::int64_t ornstein_n = 0;
    std::string min_q, fixed_q;
    auto* gen = app.add_subcommand("gen", "Generate class parameters as params JSON");
    gen->add_option("--config", config, "JSON class config (flags override its fields)");
    gen->add_option("--class", g.cls, "odometer, chacon, chacon-skip, rotation, eigenvalue, mixing");
    gen->add_option("--theta-cf", g.theta_cf, "Continued fraction a0,a1,...; trailing ... repeats the last term");
    gen->add_option("--theta-decimal", g.theta_decimal, "Decimal theta; precision is its digit count");
    gen->add_option("--phi", g.phi, "power:a/b, log1p or table:t=v,...")->capture_default_str();
    gen->add_option("--primes", g.primes, "Comma-separated primes, repeated cyclically");
    gen->add_option("--depth-n", g.depth_n, "Number of steps")->capture_default_str();
    gen->add_option("--depth-m", g.depth_n, "Alias of --depth-n for gen");
    gen->add_option("--mode", g.mode, "strict or relaxed")->capture_default_str();
    gen->add_option("--seed", g.seed, "Seed for the mixing class")->capture_default_str();
    gen->add_option("--ornstein-eps", g.ornstein_eps, "Ornstein epsilon (rational)")->capture_default_str();
    gen->add_option("--ornstein-n", ornstein_n, "Ornstein N override (default 10^n)");
    gen->add_option("--min-q", min_q, "Relaxed cutting floor");
    gen->add_option("--q", fixed_q, "Constant cutting value (odometer only)");
    gen->add_option("--out", gen_out, "Output directory (params.json); stdout if absent");

    std::string params_path, build_out;
    BuildOptions b;
    auto* build = app.add_subcommand("build", "Build the construction; write state and tables");
    build->add_option("params", params_path, "Params JSON file")->required();
    build->add_option("--primes", b.primes, "Comma-separated primes (default: from provenance)");
    build->add_option("--depth-n", b.depth_n, "Rows N (default min(3, M))");
    build->add_option("--depth-m", b.depth_m, "Final stage M (default: all steps)");
    build->add_option("--max-levels", b.max_levels, "Largest h_M for the enumerative backend")->capture_default_str();
    build->add_option("--out", build_out, "Output directory (state.json, tables.json); stdout if absent");

    std::string state_path, suite = "all", vphi = "power:1/4", verify_out;
    auto* verify = app.add_subcommand("verify", "Run verification suites on a state file");
    verify->add_option("state", state_path, "State JSON file")->required();
    verify->add_option("--suite", suite, "all, partition, cocycle, orbit, bounds")->capture_default_str();
    verify->add_option("--phi", vphi, "phi for the cocycle sums and bounds")->capture_default_str();
    verify->add_option("--out", verify_out, "Output directory (report.json, CSV files); stdout if absent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? Exit::pass : Exit::input_error;
    }

    try {
        if (*gen) {
            if (!config.empty()) apply_config(io::load_file(config), g, *gen);
            if (gen->count("--ornstein-n")) g.ornstein_n = ornstein_n;
            if (gen->count("--min-q")) g.min_q = min_q;
            if (gen->count("--q")) g.q = fixed_q;
            if (g.cls.empty()) throw InputError("--class is required");
            emit(gen_out, "params.json", io::dump(cmd_gen(g)), true);
            return Exit::pass;
        }
        if (*build) {
            BuildOutput o = cmd_build(guarded([&] { return io::load_file(params_path); }), b);
            emit(build_out, "state.json", io::dump(o.state), true);
            emit(build_out, "tables.json", io::dump(o.tables), false);
            return Exit::pass;
        }
        VerifyOutput o = cmd_verify(guarded([&] { return io::load_file(state_path); }), suite, vphi);
        emit(verify_out, "report.json", io::dump(o.report), true);
        if (!o.histogram_csv.empty()) emit(verify_out, "histogram.csv", o.histogram_csv, false);
        if (!o.bounds_csv.empty()) emit(verify_out, "bounds.csv", o.bounds_csv, false);
        std::cerr << (o.pass ? "verification passed\n" : "verification FAILED\n");
        return o.pass ? Exit::pass : Exit::verification_failure;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return Exit::input_error;
    } catch (const io::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return Exit::input_error;
    } catch (const Json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return Exit::input_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return *verify ? Exit::verification_failure : Exit::input_error;
    }
}

}  // namespace r1oe::cli
