// Acceptance battery: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 11 exercises the installed CLI end to end.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "fqdist/suite.hpp"

using namespace fqdist;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_line(const CriterionResult& r) {
    std::printf("%s criterion %2d %-32s %7.2fs  %llu/%llu instances%s%s\n",
                r.pass ? "PASS" : "FAIL", r.index, r.name.c_str(), r.seconds,
                static_cast<unsigned long long>(r.instances - r.failures),
                static_cast<unsigned long long>(r.instances), r.detail.empty() ? "" : "  ",
                r.detail.c_str());
}

CriterionResult run_criterion_11() {
    CriterionResult cr{11, "suite_determinism", true, 2, 0, "", 0.0};
    const char* cli = std::getenv("FQDIST_CLI");
    if (!cli) {
        cr.pass = false;
        cr.detail = "FQDIST_CLI not set";
        return cr;
    }
    fs::path base = fs::temp_directory_path() / ("fqdist_acc_" + std::to_string(::getpid()));
    fs::create_directories(base);
    fs::path d1 = base / "run1", d2 = base / "run2";
    fs::path log1 = base / "log1.txt", log2 = base / "log2.txt";

    auto run_once = [&](const fs::path& dir, const fs::path& log) -> double {
        std::string cmd = std::string(cli) + " verify --suite paper --seed 7 --out " +
                          dir.string() + " > " + log.string() + " 2>&1";
        auto t0 = std::chrono::steady_clock::now();
        int rc = std::system(cmd.c_str());
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0) {
            cr.pass = false;
            ++cr.failures;
            cr.detail += " cli_exit=" + std::to_string(WIFEXITED(rc) ? WEXITSTATUS(rc) : -1);
        }
        return secs;
    };

    double t1 = run_once(d1, log1);
    double t2 = run_once(d2, log2);
    cr.seconds = t1 + t2;

    for (const char* name : {"results.csv", "kappa_emp.csv"}) {
        std::string a = slurp(d1 / name), b = slurp(d2 / name);
        if (a.empty() || a != b) {
            cr.pass = false;
            ++cr.failures;
            cr.detail += std::string(" mismatch:") + name;
        }
    }
    if (t1 >= 300.0 || t2 >= 300.0) {
        cr.pass = false;
        cr.detail += " over 5-minute limit";
    }
    fs::remove_all(base);
    return cr;
}

} // namespace

int main() {
    fs::path out = fs::temp_directory_path() / ("fqdist_acc_lib_" + std::to_string(::getpid()));
    std::vector<CriterionResult> results = run_paper_suite(7, out.string());
    results.push_back(run_criterion_11());
    fs::remove_all(out);

    bool all = true;
    for (const auto& r : results) {
        print_line(r);
        all = all && r.pass;
    }
    std::printf("%s\n", all ? "acceptance PASS" : "acceptance FAIL");
    return all ? 0 : 1;
}
