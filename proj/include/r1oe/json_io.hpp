#pragma once

#include "r1oe/classes.hpp"
#include "r1oe/oe_engine.hpp"
#include "r1oe/stats.hpp"

#include "json.hpp"

#include <stdexcept>
#include <string>

namespace r1oe::io {

using Json = nlohmann::json;

// Malformed or inconsistent input document. `where` is a JSON pointer.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string where, const std::string& what);
    std::string where;
};

// Writers refuse documents whose big-ints would exceed this many decimal digits.
inline constexpr std::size_t kMaxSerializedDigits = 50000000;

Json to_json(const BigInt& x);
Json to_json(const Rational& x);
// Outward-rounded decimal endpoints.
Json to_json(const Interval& x);

BigInt big_from(const Json& j, const std::string& where);
Rational rational_from(const Json& j, const std::string& where);

Json step_json(const CutSpacParam& p);
CutSpacParam step_from(const Json& j, const std::string& where);

// {"params": [...]} with an optional "provenance" block.
Json params_document(const Entries& entries, const Json& provenance = Json::object());
Entries params_from(const Json& doc);

Json kappa_log_json(const std::vector<KappaEntry>& log);
// Provenance block of a scheduled family: class, mode, constants, primes, kappa log.
Json schedule_provenance(const Schedule& s, const Generator& gen, const PhiSpec& phi);

Json tables_json(const RecurrenceTables& tab);
Json tables_json(const Engine& eng);

struct StateDoc {
    Entries entries;
    std::vector<BigInt> primes;
    std::size_t N = 0, M = 0;
    std::string mode = "relaxed";  // copied from the params provenance
    BigInt C = 1, Cprime = 1;
    bool enumerative = false;
    Json tables;  // analytic tables
    std::string hash;
};

// Canonical state document; "hash" is FNV-1a over the document without it.
Json state_json(const StateDoc& s);
// Checks the hash and every field; throws ParseError.
StateDoc state_from(const Json& doc);

Json to_json(const PartitionReport& r);
Json to_json(const EReport& r);
Json to_json(const KReport& r);
Json to_json(const OrbitReport& r);
Json to_json(const CocycleBoundReport& r);
Json to_json(const QPrimeReport& r);
Json to_json(const Universality& u);
Json to_json(const CocycleReport& r);
Json to_json(const BoundsReport& b);
Json to_json(const EnvelopeReport& e);
Json to_json(const Comparison& c);

// Stable text form: two-space indent, sorted keys, trailing newline.
std::string dump(const Json& j);
std::string fnv1a_hex(const std::string& text);

Json load_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace r1oe::io
