#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

Outcome run(const std::string& args) {
    const std::string cmd = std::string(CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    Outcome o;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, got);
    const int status = pclose(pipe);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

int run_err(const std::string& args, std::string& err) {
    const fs::path err_path = fs::temp_directory_path() / "csubag_cli_err.txt";
    const std::string cmd = std::string(CLI_PATH) + " " + args + " >/dev/null 2>" + err_path.string();
    const int status = std::system(cmd.c_str());
    err = [&] {
        std::ifstream in(err_path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }();
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

struct Workspace {
    fs::path dir = fs::temp_directory_path() / "csubag_cli_test";
    Workspace() {
        fs::remove_all(dir);
        fs::create_directories(dir);
        std::ofstream(dir / "scenario.ini") << "n = 400\np = 20\ns = 3\nrho = 0.2\nseed = 3\n";
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("simulate, select and the baselines") {
    Workspace ws;
    REQUIRE(run("simulate --scenario " + ws.path("scenario.ini") + " --out " + ws.path("sim")).code == 0);
    CHECK(fs::exists(ws.path("sim/data.csv")));
    CHECK(fs::exists(ws.path("sim/truth.json")));
    CHECK(line_count(ws.path("sim/data.csv")) == 401);

    const std::string data = ws.path("sim/data.csv");
    const std::string common = " --data " + data + " --N 40 --set b=4 --set K=2 --set B=1 --seed 7";
    const auto a = run("select" + common + " --out " + ws.path("a") + " --threads 1");
    const auto b = run("select" + common + " --out " + ws.path("b") + " --threads 3");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out.find("\"selected\"") != std::string::npos);
    CHECK(slurp(ws.path("a/selection.json")) == slurp(ws.path("b/selection.json")));
    CHECK(slurp(ws.path("a/selection.csv")) == slurp(ws.path("b/selection.csv")));
    CHECK(line_count(ws.path("a/selection.csv")) == 21);

    const auto lasso = run("lasso --data " + data + " --lambda auto --truth " + ws.path("sim/truth.json"));
    CHECK(lasso.code == 0);
    CHECK(lasso.out.find("\"metrics\"") != std::string::npos);
    CHECK(run("subag --data " + data + " --N 50 --d 4 --lambda1 0.01").code == 0);
    CHECK(run("weights --data " + data + " --rows 1..10 --mode optimal").code == 0);
    CHECK(run("diag --data " + data + " --support 1-3 --trials 50").code == 0);
}

TEST_CASE("a single predictor") {
    Workspace ws;
    std::ofstream csv(ws.dir / "one.csv");
    csv << "y,x1\n";
    for (int i = 0; i < 60; ++i) csv << (i % 7) * 0.5 + 0.1 * (i % 3) << "," << (i % 7) - 3 << "\n";
    csv.close();
    const auto r = run("select --data " + ws.path("one.csv") + " --out " + ws.path("o") +
                       " --N 20 --set b=2 --set K=1 --set B=1 --seed 1");
    CHECK(r.code == 0);
    CHECK(line_count(ws.path("o/selection.csv")) == 2);
}

TEST_CASE("exit codes and error reports") {
    Workspace ws;
    std::string err;
    CHECK(run_err("", err) == 2);
    CHECK(run_err("select --out x", err) == 2);
    CHECK(err.find("\"error\"") != std::string::npos);
    CHECK(run_err("bench --example 7", err) == 2);
    REQUIRE(run("simulate --scenario " + ws.path("scenario.ini") + " --out " + ws.path("sim")).code == 0);
    const std::string data = ws.path("sim/data.csv");
    CHECK(run_err("select --data " + data + " --out " + ws.path("x") + " --N 500", err) != 0);
    CHECK(err.find("InsufficientSamples") != std::string::npos);
    CHECK(run_err("select --data " + data + " --out " + ws.path("x") + " --set colour=red", err) != 0);
    CHECK(run_err("lasso --data " + data + " --lambda -1", err) == 2);
    CHECK(run_err("weights --data " + data + " --rows 5..2", err) == 2);
    CHECK(run_err("diag --data " + data + " --support 0", err) == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("bench writes the metrics table") {
    Workspace ws;
    // example 2 at one replication: 4 methods, one N
    const auto r = run("bench --example 2 --reps 1 --threads 2 --out " + ws.path("bench"));
    REQUIRE(r.code == 0);
    CHECK(line_count(ws.path("bench/metrics.csv")) == 1 + 4);
    CHECK(fs::exists(ws.path("bench/selection_freq.csv")));
    CHECK(fs::exists(ws.path("bench/summary.csv")));
    CHECK(fs::exists(ws.path("bench/pi.csv")));
}
