#include "doctest.h"

#include "r1oe/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace r1oe;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
    std::vector<char*> argv;
    static std::string prog = "rank1oe";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    return cli::cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("rank1oe_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

io::Json rehash(io::Json doc) {
    doc.erase("hash");
    doc["hash"] = io::fnv1a_hex(io::dump(doc));
    return doc;
}

io::Json odometer_state() {
    cli::GenOptions g;
    g.cls = "odometer";
    g.q = "4";
    g.depth_n = 4;
    return cli::cmd_build(cli::cmd_gen(g), {}).state;
}

}  // namespace

TEST_CASE("gen, build and verify round trip with exit code 0") {
    TempDir d;
    CHECK(run({"gen", "--class", "chacon", "--depth-n", "5", "--out", d / "g"}) == cli::pass);
    CHECK(run({"build", d / "g/params.json", "--out", d / "b"}) == cli::pass);
    CHECK(run({"verify", d / "b/state.json", "--out", d / "v"}) == cli::pass);
    for (const char* f : {"g/params.json", "b/state.json", "b/tables.json", "v/report.json", "v/histogram.csv",
                          "v/bounds.csv"})
        CHECK(fs::exists(d / f));
    io::Json report = io::load_file(d / "v/report.json");
    CHECK(report["pass"] == true);
}

TEST_CASE("building twice gives the same state hash") {
    io::Json a = odometer_state(), b = odometer_state();
    CHECK(a["hash"] == b["hash"]);
    CHECK(io::dump(a) == io::dump(b));
    io::StateDoc s = io::state_from(a);
    CHECK(io::state_json(s) == a);
}

TEST_CASE("big integers are decimal strings") {
    io::Json a = odometer_state();
    for (const auto& p : a["primes"]) CHECK(p.is_string());
    CHECK(io::to_json(BigInt("123456789012345678901234567890")) == "123456789012345678901234567890");
    CHECK(io::big_from(io::Json("-17"), "/x") == -17);
    // Small JSON integers are read for hand-written inputs; writers always emit strings.
    CHECK(io::big_from(io::Json(17), "/x") == 17);
    CHECK_THROWS_AS(io::big_from(io::Json(1.5), "/x"), io::ParseError);
    CHECK_THROWS_AS(io::big_from(io::Json("1e5"), "/x"), io::ParseError);
}

TEST_CASE("corrupted state files are input errors") {
    TempDir d;
    io::Json state = odometer_state();
    SUBCASE("hash mismatch") {
        io::Json bad = state;
        bad["N"] = 1;
        CHECK_THROWS_AS(io::state_from(bad), io::ParseError);
        io::write_file(d / "state.json", io::dump(bad));
        CHECK(run({"verify", d / "state.json"}) == cli::input_error);
    }
    SUBCASE("truncated file") {
        std::string text = io::dump(state);
        io::write_file(d / "state.json", text.substr(0, text.size() / 2));
        CHECK(run({"verify", d / "state.json"}) == cli::input_error);
    }
    SUBCASE("missing file") { CHECK(run({"verify", d / "nothing.json"}) == cli::input_error); }
    SUBCASE("wrong format tag") {
        io::Json bad = state;
        bad["format"] = "other";
        CHECK_THROWS_AS(io::state_from(rehash(bad)), io::ParseError);
    }
}

TEST_CASE("tampered tables fail verification with exit code 1") {
    TempDir d;
    io::Json state = odometer_state();
    state["tables"]["qprime"][0] = "4";
    state = rehash(state);
    cli::VerifyOutput v = cli::cmd_verify(state, "all", "power:1/4");
    CHECK_FALSE(v.pass);
    io::write_file(d / "state.json", io::dump(state));
    CHECK(run({"verify", d / "state.json", "--out", d / "v"}) == cli::verification_failure);
}

TEST_CASE("ill-posed parameters are rejected at build with exit code 2") {
    TempDir d;
    // q = 2 with p_0 = 2 leaves no multiple of p_0 below r_{1,1}.
    io::Json params = io::params_document(Entries(3, CutSpacParam::dense(2, {0, 0, 0})));
    io::write_file(d / "params.json", io::dump(params));
    CHECK(run({"build", d / "params.json", "--primes", "2"}) == cli::input_error);
    try {
        cli::BuildOptions o;
        o.primes = "2";
        cli::cmd_build(params, o);
        FAIL("expected an input error");
    } catch (const cli::InputError& e) {
        CHECK(std::string(e.what()).find("q_n > max(p_n, q'_0, ..., q'_{n-1}) fails at n=0") != std::string::npos);
    }
}

TEST_CASE("bad flags and class inputs are exit code 2") {
    TempDir d;
    CHECK(run({"gen", "--class", "rotation", "--theta-cf", "0,2,2..."}) == cli::input_error);
    CHECK(run({"gen", "--class", "rotation", "--theta-cf", "0,1,1,1,1"}) == cli::input_error);
    CHECK(run({"gen", "--class", "unknown"}) == cli::input_error);
    CHECK(run({"gen", "--class", "odometer", "--mode", "sideways"}) == cli::input_error);
    CHECK(run({"gen", "--class", "odometer", "--phi", "power:1/2"}) == cli::input_error);
    CHECK(run({"gen", "--class", "odometer", "--primes", "2,4"}) == cli::input_error);
    CHECK(run({"frobnicate"}) == cli::input_error);
    CHECK(run({"verify", d / "x.json", "--suite", "nonsense"}) == cli::input_error);
}

TEST_CASE("rotation from a decimal keeps only the certified prefix") {
    cli::GenOptions g;
    g.cls = "rotation";
    g.theta_decimal = "0.2360679775";  // sqrt 5 - 2 = [0; 4, 4, 4, ...]
    g.depth_n = 6;
    io::Json doc = cli::cmd_gen(g);
    Entries e = io::params_from(doc);
    CHECK(e.size() == 6);
    CHECK(e.front().q == 4);
    CHECK(e[1].q == 4);
}

TEST_CASE("mixing generation is deterministic for a seed") {
    TempDir d;
    std::vector<std::string> args = {"gen", "--class", "mixing", "--seed", "9", "--depth-n", "3", "--ornstein-n", "3"};
    auto a = args, b = args;
    a.insert(a.end(), {"--out", d / "a"});
    b.insert(b.end(), {"--out", d / "b"});
    CHECK(run(a) == cli::pass);
    CHECK(run(b) == cli::pass);
    CHECK(slurp(d / "a/params.json") == slurp(d / "b/params.json"));
}
