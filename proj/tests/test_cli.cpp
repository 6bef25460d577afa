#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "fqdist/harness.hpp"
#include "json.hpp"

using namespace fqdist;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("FQDIST_CLI");
    REQUIRE(p != nullptr);
    return p;
}

struct RunResult {
    int exit_code;
    std::string out;
};

fs::path scratch() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() /
                   ("fqdist_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    fs::path outfile = scratch() / "stdout.txt";
    std::string cmd = cli_path() + " " + args + " > " + outfile.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return {code, slurp(outfile)};
}

} // namespace

TEST_CASE("field-info prints the canonical modulus") {
    RunResult r = run_cli("field-info --p 3 --k 2");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "q=9 p=3 k=2 modulus=x^2+1\n");

    RunResult rq = run_cli("field-info --q 49");
    CHECK(rq.exit_code == 0);
    CHECK(rq.out.find("q=49 p=7 k=2") == 0);

    RunResult rj = run_cli("field-info --p 3 --k 2 --json");
    CHECK(rj.exit_code == 0);
    auto j = nlohmann::json::parse(rj.out);
    CHECK(j["q"] == 9);
    CHECK(j["modulus_value"] == 10);
}

TEST_CASE("gen writes the isotropic line and delta reads it back") {
    fs::path dir = scratch();
    fs::path z = dir / "z.fqset";
    RunResult g = run_cli("gen --kind line --q 5 --out " + z.string());
    CHECK(g.exit_code == 0);
    CHECK(slurp(z) == "FQSET 1 5 1 5 2 5\n0 0\n3 1\n1 2\n4 3\n2 4\n");

    RunResult d = run_cli("delta --in " + z.string());
    CHECK(d.exit_code == 0);
    CHECK(d.out == "support_size=1 support=[0]\n");

    RunResult dz = run_cli("delta --in " + z.string() + " --exclude-zero");
    CHECK(dz.exit_code == 0);
    CHECK(dz.out == "support_size=0 support=[]\n");
    fs::remove_all(dir);
}

TEST_CASE("delta with an inline generator") {
    RunResult d = run_cli("delta --gen full --q 7 --d 2");
    CHECK(d.exit_code == 0);
    CHECK(d.out.find("support_size=7") == 0);
}

TEST_CASE("pins lists attained coordinate values") {
    fs::path dir = scratch();
    fs::path e = dir / "e.fqset";
    {
        std::ofstream f(e);
        f << "FQSET 1 5 1 5 2 3\n1 2\n3 2\n1 4\n";
    }
    RunResult r = run_cli("pins --in " + e.string() + " --j 2");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "valid_pins=[2,4]\n");
    fs::remove_all(dir);
}

TEST_CASE("verify runs a single check against a file") {
    fs::path dir = scratch();
    fs::path e = dir / "e.fqset";
    {
        FieldRef f = make_field(5, 1);
        save_pointset(PointSet::random(f, 2, 15, 4), e.string());
    }
    RunResult r = run_cli("verify --check distpinned --in " + e.string() + " --pin 2,3");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("check = distpinned") != std::string::npos);
    CHECK(r.out.rfind("PASS\n") == r.out.size() - 5);

    RunResult rj = run_cli("verify --check distpinned --in " + e.string() + " --pin 2,3 --json");
    CHECK(rj.exit_code == 0);
    auto j = nlohmann::json::parse(rj.out);
    CHECK(j["passed"].get<bool>());
    CHECK(j["check"] == "distpinned");

    // CLI reports identical results to a direct library call
    PointSet E = load_pointset(e.string());
    DiagnosticsReport lib = theorem_check_distpinned(E, {2, 3});
    CHECK(nlohmann::json::parse(lib.to_json_string()) == j);
    fs::remove_all(dir);
}

TEST_CASE("spectrum subcommand emits the documented CSV") {
    fs::path dir = scratch();
    fs::path e = dir / "grid.fqset";
    {
        FieldRef f = make_field(5, 1);
        save_pointset(PointSet::product(f, {{0, 1}, {0, 1}}), e.string());
    }
    RunResult r = run_cli("spectrum --in " + e.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out ==
          "# fqdist spectrum p=5 k=1 d=2 size_F=4 size_E=4 metric=distance engine=direct seed=\n"
          "t,count\n0,4\n1,8\n2,4\n3,0\n4,0\n");

    RunResult rc = run_cli("spectrum --in " + e.string() + " --engine conv");
    CHECK(rc.exit_code == 0);
    CHECK(rc.out.find("0,4\n1,8\n2,4\n") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("fmt-convert round trips through JSON lines") {
    fs::path dir = scratch();
    fs::path a = dir / "a.fqset";
    fs::path b = dir / "b.jsonl";
    fs::path c = dir / "c.fqset";
    {
        FieldRef f = make_field(3, 2);
        save_pointset(PointSet::random(f, 2, 20, 8), a.string());
    }
    CHECK(run_cli("fmt-convert --in " + a.string() + " --out " + b.string()).exit_code == 0);
    CHECK(run_cli("fmt-convert --in " + b.string() + " --out " + c.string()).exit_code == 0);
    CHECK(slurp(a) == slurp(c));
    fs::remove_all(dir);
}

TEST_CASE("sweep subcommand is deterministic across invocations") {
    fs::path dir = scratch();
    fs::path cfg = dir / "sweep.cfg";
    {
        std::ofstream f(cfg);
        f << "fields = 5\ndims = 2\nfamily = random\nsizes = 10\npins = best\n"
             "metric = distance\nengine = direct\nchecks = cs bound\nseeds = 2\n";
    }
    fs::path o1 = dir / "r1.csv", o2 = dir / "r2.csv";
    RunResult r1 = run_cli("sweep --config " + cfg.string() + " --out " + o1.string());
    CHECK(r1.exit_code == 0);
    RunResult r2 = run_cli("sweep --config " + cfg.string() + " --out " + o2.string());
    CHECK(r2.exit_code == 0);
    CHECK(slurp(o1) == slurp(o2));
    CHECK(slurp(o1).find(ResultRow::csv_header()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("search subcommand runs seeded") {
    fs::path dir = scratch();
    fs::path out = dir / "best.fqset";
    RunResult r = run_cli("search --q 13 --d 2 --size 9 --steps 50 --seed 3 --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("delta_size=") == 0);
    PointSet best = load_pointset(out.string());
    CHECK(best.size() == 9);
    RunResult r2 = run_cli("search --q 13 --d 2 --size 9 --steps 50 --seed 3");
    CHECK(r2.out.substr(0, r2.out.find('\n')) == r.out.substr(0, r.out.find('\n')));
    fs::remove_all(dir);
}

TEST_CASE("exit codes separate usage, operational, and assertion failures") {
    CHECK(run_cli("no-such-subcommand").exit_code == 64);
    CHECK(run_cli("gen --kind line --q 5").exit_code == 64); // missing required --out
    CHECK(run_cli("delta --in /nonexistent/file.fqset").exit_code == 1);
    CHECK(run_cli("field-info --p 4").exit_code == 1);
    CHECK(run_cli("--help").exit_code == 0);
}
