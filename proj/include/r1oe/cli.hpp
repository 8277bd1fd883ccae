#pragma once

#include "r1oe/json_io.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace r1oe::cli {

// Bad flags, unreadable files or ill-posed parameters (exit code 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum Exit : int { pass = 0, verification_failure = 1, input_error = 2 };

struct GenOptions {
    std::string cls;  // odometer, chacon, chacon-skip, rotation, eigenvalue, mixing
    std::string theta_cf, theta_decimal;
    std::string phi = "power:1/4";
    std::string primes;  // comma-separated, repeated cyclically; empty: ruler sequence
    std::string mode = "relaxed";
    std::size_t depth_n = 4;  // number of steps
    std::uint64_t seed = 0;
    std::string ornstein_eps = "1/2";
    std::optional<std::int64_t> ornstein_n;
    std::optional<std::string> min_q;  // relaxed floor
    std::optional<std::string> q;      // constant odometer, bypasses the scheduler
};

struct BuildOptions {
    std::string primes;           // overrides the params provenance
    std::size_t depth_n = 0;      // 0: min(3, steps)
    std::size_t depth_m = 0;      // 0: number of steps
    std::int64_t max_levels = 4000000;  // enumerative backend only below this h_M
};

struct BuildOutput {
    io::Json state;
    io::Json tables;  // {"analytic": ..., "enumerative": ...}
};

struct VerifyOutput {
    io::Json report;
    bool pass = false;
    std::string histogram_csv, bounds_csv;
};

io::Json cmd_gen(const GenOptions& opt);
BuildOutput cmd_build(const io::Json& params_doc, const BuildOptions& opt);
// suite: all, partition, cocycle, orbit or bounds.
VerifyOutput cmd_verify(const io::Json& state_doc, const std::string& suite, const std::string& phi);

// Command-line entry point; returns the exit code.
int cli_main(int argc, char** argv);

}  // namespace r1oe::cli
