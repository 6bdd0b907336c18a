#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string out;
};

CmdResult sh(const std::string& cmd) {
    CmdResult r;
    std::string full = cmd + " 2>&1";
    FILE* pipe = popen(full.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe))
        r.out.append(buf.data(), n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

const std::string kCli = PELRAM_CLI_PATH;
const std::string kAssets = PELRAM_ASSETS_DIR;

}  // namespace

TEST_CASE("run-ram exit codes") {
    CHECK(sh(kCli + " run-ram " + kAssets + "/parity.ram --input 3").exit_code == 0);
    CHECK(sh(kCli + " run-ram " + kAssets + "/parity.ram --input 4").exit_code == 1);
    CHECK(sh(kCli + " run-ram " + kAssets + "/loop.ram --budget 100").exit_code == 2);

    std::string bad = "/tmp/pelram_bad.ram";
    std::ofstream(bad) << "op +\nR0 <= R1 + 2\nhalt\n";
    auto r = sh(kCli + " run-ram " + bad);
    CHECK(r.exit_code == 3);
    CHECK(r.out.find("line 2") != std::string::npos);
}

TEST_CASE("json-lines output is schema-stable and reproducible") {
    std::string cmd = kCli + " --seed 11 --format json-lines run-ram " + kAssets +
                      "/coin_half.ram --input 1";
    auto a = sh(cmd);
    auto b = sh(cmd);
    CHECK(a.out == b.out);
    for (const char* key : {"\"cmd\"", "\"seed\"", "\"outcome\"", "\"steps\""})
        CHECK(a.out.find(key) != std::string::npos);

    auto tm = sh(kCli + " --seed 4 --format json-lines dilute --target-w 9");
    for (const char* key : {"\"cmd\"", "\"seed\"", "\"outcome\"", "\"steps\""})
        CHECK(tm.out.find(key) != std::string::npos);
}

TEST_CASE("PELRAM_SEED is the fallback seed") {
    std::string cmd = "PELRAM_SEED=42 " + kCli + " --format json-lines run-ram " +
                      kAssets + "/coin_half.ram --input 1";
    auto a = sh(cmd);
    auto b = sh(cmd);
    CHECK(a.out == b.out);
    CHECK(a.out.find("\"seed\":42") != std::string::npos);
}

TEST_CASE("seed and tape are mutually exclusive") {
    std::string tape = "/tmp/pelram_tape.txt";
    std::ofstream(tape) << "0101";
    auto r = sh(kCli + " --seed 1 --tape " + tape + " run-ram " + kAssets +
                "/coin_half.ram --input 1");
    CHECK(r.exit_code == 3);
}

TEST_CASE("tableau build, verify, corrupt round trip") {
    std::string dump = "/tmp/pelram_tab.dump";
    auto build = sh(kCli + " tableau build --tm " + kAssets +
                    "/writer.tm --input 1 -s 2 -n 64 --out " + dump);
    CHECK(build.exit_code == 0);

    auto verify = sh(kCli + " tableau verify --tm " + kAssets +
                     "/writer.tm --input 1 -s 2 --in " + dump);
    CHECK(verify.exit_code == 0);
    CHECK(verify.out.find("valid, accepted") != std::string::npos);

    auto corrupt = sh(kCli + " tableau corrupt --tm " + kAssets +
                      "/writer.tm --input 1 -s 2 --in " + dump + " --bit 17");
    CHECK(corrupt.exit_code == 1);
    CHECK(corrupt.out.find("invalid") != std::string::npos);

    std::string trunc = "/tmp/pelram_trunc.dump";
    std::ofstream(trunc) << "4 64 2 5:aaaaa";
    auto broken = sh(kCli + " tableau verify --tm " + kAssets +
                     "/writer.tm --input 1 -s 2 --in " + trunc);
    CHECK(broken.exit_code == 3);
}

TEST_CASE("run-tm reports machine outcomes") {
    auto acc = sh(kCli + " run-tm " + kAssets + "/even.tm --input 2 --tape-size 3");
    CHECK(acc.exit_code == 0);
    CHECK(acc.out.find("accepted") != std::string::npos);
    auto exc = sh(kCli + " run-tm " + kAssets + "/rightmover.tm --input 0 --tape-size 2");
    CHECK(exc.out.find("exceeded_tape") != std::string::npos);
}

TEST_CASE("dilute reports sparseness") {
    auto r = sh(kCli + " --seed 7 dilute --target-w 9 --k 65536");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("sparse: true") != std::string::npos);
}

TEST_CASE("pelsim lucky-tape runs end to end") {
    CHECK(sh(kCli + " pelsim --tm " + kAssets + "/even.tm --input 0 --lucky-tape")
              .exit_code == 0);
    CHECK(sh(kCli + " pelsim --tm " + kAssets + "/even.tm --input 3 --lucky-tape")
              .exit_code == 1);
}

TEST_CASE("inputverify on an all-zero tape yields the empty map") {
    std::string tape = "/tmp/pelram_zeros.txt";
    std::ofstream of(tape);
    for (int i = 0; i < 40000; ++i) of << '0';
    of.close();
    auto r = sh(kCli + " --tape " + tape +
                " inputverify --map-width 3 --tab-width 2 --input 2 --ix 1 --wx 90000");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0 elements") != std::string::npos);
}

TEST_CASE("rp2brp emits runnable assembly") {
    std::string out = "/tmp/pelram_brp.ram";
    auto gen = sh(kCli + " rp2brp " + kAssets +
                  "/coin_half.ram --maxstep 2 --m-bound 2 --out " + out);
    CHECK(gen.exit_code == 0);
    auto rerun = sh(kCli + " --seed 5 run-ram " + out + " --input 0");
    CHECK(rerun.exit_code == 1);  // out-of-language stays rejected
    // in-language: accepted in most seeds; just require a clean run
    auto rerun2 = sh(kCli + " --seed 5 run-ram " + out + " --input 1");
    CHECK((rerun2.exit_code == 0 || rerun2.exit_code == 1));
}

TEST_CASE("stats prints a rate table with an interval") {
    auto r = sh(kCli + " --seed 3 stats rp2brp --program " + kAssets +
                "/coin_half.ram --trials 400 --maxstep 2 --m-bound 2");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("accept rate") != std::string::npos);
    CHECK(r.out.find("3-sigma") != std::string::npos);
    CHECK(r.out.find("out-of-language accepts: 0") != std::string::npos);
}
