// End to end tests of the freetail binary: spawn the real executable, then
// assert on exit codes, the artifact files, and the manifest JSON. Paths
// come in through compile definitions so ctest can run from anywhere.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::path(FREETAIL_TEST_TMPDIR) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct Run {
    int code = -1;
    std::string err;
    fs::path dir;

    json manifest() const { return json::parse(slurp(dir / "manifest.json")); }
};

Run cli(const std::string& name, const std::string& args, bool pass_out_dir = true,
        const std::string& env = "") {
    Run r;
    r.dir = scratch(name);
    fs::path errfile = r.dir / "stderr.txt";
    std::string cmd = env + (env.empty() ? "" : " ") + FREETAIL_CLI_PATH + " " + args;
    if (pass_out_dir) cmd += " --out-dir " + r.dir.string();
    cmd += " 2>" + errfile.string();
    int rc = std::system(cmd.c_str());
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.err = slurp(errfile);
    return r;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("transform writes csv and manifest") {
    Run r = cli("transform", "transform --measure semicircle --kind g --ray 1:100:10");
    REQUIRE(r.code == 0);

    std::string csv = slurp(r.dir / "transform.csv");
    CHECK(csv.rfind("y,re,im\n", 0) == 0);
    CHECK(count_lines(csv) == 11);

    json man = r.manifest();
    CHECK(man["command"] == "transform");
    CHECK(man["version"] == "0.1.0");
    CHECK(man["config"]["measure"] == "semicircle");
    // G(100i) = -i/100 + O(1e-6) for a unit variance law
    CHECK(man["headline"]["re"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(man["headline"]["im"].get<double>() == doctest::Approx(-0.01).epsilon(1e-4));
}

TEST_CASE("seeded runs are byte identical") {
    std::string args = "rmt-sim --n 40 --m 40 --trials 2 --rho pareto:1.5:1 --seed 7";
    Run a = cli("det_a", args);
    Run b = cli("det_b", args);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    std::string eig_a = slurp(a.dir / "eig.csv");
    CHECK(!eig_a.empty());
    CHECK(eig_a == slurp(b.dir / "eig.csv"));
    CHECK(a.manifest()["headline"] == b.manifest()["headline"]);

    Run c = cli("det_c", "rmt-sim --n 40 --m 40 --trials 2 --rho pareto:1.5:1 --seed 8");
    REQUIRE(c.code == 0);
    CHECK(eig_a != slurp(c.dir / "eig.csv"));
}

TEST_CASE("rmt-sim pools eigenvalues into the csv") {
    Run r = cli("rmt", "rmt-sim --n 60 --m 60 --trials 2 --rho pareto:1.5:1 --seed 7 "
                       "--out eig.csv --theory pareto:1.5:1");
    REQUIRE(r.code == 0);
    std::string csv = slurp(r.dir / "eig.csv");
    CHECK(csv.rfind("value\n", 0) == 0);
    CHECK(count_lines(csv) == 121);

    json head = r.manifest()["headline"];
    CHECK(head["count"] == 120);
    CHECK(head["min"].get<double>() >= 0.0);
    CHECK(head["ks"].is_number());
    CHECK(r.manifest()["config"]["n"] == 60);
}

TEST_CASE("validation failures exit 2 with error json") {
    Run bad_measure = cli("v1", "transform --measure gauss");
    CHECK(bad_measure.code == 2);
    json err = json::parse(bad_measure.err);
    CHECK(err["error"]["code"] == "bad_spec");

    CHECK(cli("v2", "remainder-check --measure pareto:1.5:1 --p 1 --alpha 1.5 --y 10:100:0").code == 2);
    CHECK(cli("v3", "transform --measure semicircle --no-such-flag").code == 2);
    CHECK(cli("v4", "").code == 2);                       // missing subcommand
    CHECK(cli("v5", "transform").code == 2);              // missing required option
    CHECK(cli("v6", "levy-build --sigma pareto:1.5:1 --nu pareto:1.5:1").code == 2);
    // module gates map to 2 as well: alpha outside [p, p+1]
    Run gate = cli("v7", "remainder-check --measure pareto:1.5:1 --p 0 --alpha 1.5");
    CHECK(gate.code == 2);
    CHECK(json::parse(gate.err)["error"]["code"] == "domain_error");
}

TEST_CASE("numerical failures exit 3 with error json") {
    // the grid misses most of the mass, so the deficit gate trips
    Run r = cli("n1", "invert --measure pareto:1.5:1 --grid 0.5:2:20 --log");
    CHECK(r.code == 3);
    CHECK(json::parse(r.err)["error"]["code"] == "mass_deficit");
}

TEST_CASE("tail-check recipe lands on the tail equivalence") {
    Run r = cli("tailcheck", "tail-check --sigma pareto:1.5:1 --gamma auto");
    REQUIRE(r.code == 0);
    json head = r.manifest()["headline"];

    CHECK(head["terminal_ratio"].get<double>() > 0.9);
    CHECK(head["terminal_ratio"].get<double>() < 1.1);
    CHECK(head["mu_mass"].get<double>() == doctest::Approx(1.0).epsilon(0.01));
    // gamma auto is m_{-1}(sigma) = 0.6 exactly for this sigma
    CHECK(head["gamma"].get<double>() == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(head["mu_index"].get<double>() == doctest::Approx(1.5).epsilon(0.1));

    std::string csv = slurp(r.dir / "tail.csv");
    CHECK(csv.rfind("x,ratio\n", 0) == 0);
    CHECK(count_lines(csv) == 41);
    CHECK(json::parse(slurp(r.dir / "report.json"))["terminal"] == head["terminal_ratio"]);
}

TEST_CASE("invert recipe recovers the stable mass") {
    Run r = cli("stable", "invert --phi stable:0.5:1 --grid 0.05:1000:300 --log --fit-tail");
    REQUIRE(r.code == 0);
    json head = r.manifest()["headline"];
    CHECK(head["mass"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(head["has_tail"] == true);
    CHECK(slurp(r.dir / "density.csv").rfind("x,density\n", 0) == 0);

    Run bad = cli("stable_bad", "invert --phi stable:0.5:1 --measure semicircle");
    CHECK(bad.code == 2);
}

TEST_CASE("bp-check recipe compares the two tails") {
    Run r = cli("bp", "bp-check --nu pareto:1.5:1 --eta-prime 0.5 --samples 20000 --seed 3");
    REQUIRE(r.code == 0);
    json head = r.manifest()["headline"];

    CHECK(head["free_mass"].get<double>() == doctest::Approx(1.0).epsilon(0.01));
    CHECK(head["hill_diff"].get<double>() < 0.3);
    CHECK(head["tail_ratio_at_percentile"].get<double>() > 0.7);
    CHECK(head["tail_ratio_at_percentile"].get<double>() < 1.4);
    CHECK(json::parse(slurp(r.dir / "report.json"))["headline"]["x_star"] == head["x_star"]);
}

TEST_CASE("levy-build completes triplets from either side") {
    Run r = cli("levy", "levy-build --sigma pareto:1.5:1 --gamma auto");
    REQUIRE(r.code == 0);
    json head = r.manifest()["headline"];
    CHECK(head["gamma"].get<double>() == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(head["eta_prime"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    // nu mass = 1 + m_{-2}(sigma) = 1 + 1.5/3.5 for this sigma
    CHECK(head["nu_mass"].get<double>() == doctest::Approx(1.0 + 1.5 / 3.5).epsilon(1e-9));
    CHECK(head["kappa_2"].is_null()); // second moment of nu diverges at alpha 1.5

    // feed the artifact back: validate and complete must reproduce gamma
    Run back = cli("levy_back",
                   "levy-build --triplet " + (r.dir / "triplet.json").string());
    REQUIRE(back.code == 0);
    CHECK(back.manifest()["headline"]["gamma"] == head["gamma"]);
}

TEST_CASE("convolve shifts point masses exactly") {
    Run r = cli("conv", "convolve --a atom:1 --b atom:2 --grid 0:8:100");
    REQUIRE(r.code == 0);
    json head = r.manifest()["headline"];
    CHECK(head["atoms"] == 1);
    CHECK(head["mass"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(head["mean"].get<double>() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("the environment variable supplies the output directory") {
    fs::path dir = scratch("envdir");
    Run r = cli("env_unused", "transform --measure semicircle --ray 1:10:5", false,
                "FREETAIL_OUT_DIR=" + dir.string());
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "transform.csv"));
    CHECK(fs::exists(dir / "manifest.json"));
}
