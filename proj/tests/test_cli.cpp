#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path data = BREGPROJ_DATA_DIR;

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() / ("bregproj_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + BREGPROJ_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_CASE("solve writes a trace and a summary") {
    Workspace w;
    const fs::path out = w.dir / "solve";
    REQUIRE(run("solve " + quoted(data / "tiny_quadratic.json") + " --dc-trace --csv --out " + quoted(out), w.dir / "log") == 0);
    std::ifstream trace(out / "trace.jsonl");
    std::string line;
    int rows = 0;
    int last_k = -1;
    while (std::getline(trace, line)) {
        const json r = json::parse(line);
        for (const char* key : {"k", "xi", "d_sel", "res", "DC", "t_ms"}) CHECK(r.contains(key));
        CHECK(r["k"].get<int>() > last_k);
        CHECK(r["DC"].is_number());
        last_k = r["k"];
        ++rows;
    }
    const json summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary["status"] == "converged");
    CHECK(summary["iterations"].get<int>() == rows);
    CHECK(summary["final_residual"].get<double>() <= 1e-10);
    const auto x = summary["x_final"].get<std::vector<double>>();
    REQUIRE(x.size() == 2);
    CHECK(std::abs(2 * x[0] + x[1] - 1.0) <= 1e-9);
    CHECK(std::abs(x[0] + 3 * x[1] - 3.0) <= 1e-9);
    CHECK(fs::exists(out / "dc.csv"));
}

TEST_CASE("exit codes") {
    Workspace w;
    CHECK(run("solve " + quoted(data / "tiny_quadratic.json") + " --max-iter 1 --out " + quoted(w.dir / "a"), w.dir / "log") == 2);
    CHECK(json::parse(slurp(w.dir / "a" / "summary.json"))["status"] == "budget_exhausted");
    CHECK(run("solve " + quoted(w.dir / "missing.json"), w.dir / "log") == 1);

    const fs::path bad = w.dir / "bad.json";
    std::ofstream(bad) << "{\n  \"system\": {\n    \"A\": [[1, 2],\n  }\n}\n";
    CHECK(run("solve " + quoted(bad), w.dir / "log") == 1);
    CHECK(slurp(w.dir / "log").find("bad.json:4:") != std::string::npos);
    CHECK(run("solve " + quoted(data / "tiny_quadratic.json") + " --control sideways", w.dir / "log") == 1);
    CHECK(run("frobnicate", w.dir / "log") != 0);
}

TEST_CASE("a feasible start takes no steps") {
    Workspace w;
    const fs::path doc = w.dir / "feasible.json";
    std::ofstream(doc) << R"({"legendre":{"kind":"quadratic","dim":2},"system":{"A":[[1,1]],"b":[1]},"x0":[0.5,0.5]})";
    REQUIRE(run("solve " + quoted(doc) + " --out " + quoted(w.dir / "o"), w.dir / "log") == 0);
    const json s = json::parse(slurp(w.dir / "o" / "summary.json"));
    CHECK(s["iterations"] == 0);
}

TEST_CASE("rates on the identity system") {
    Workspace w;
    REQUIRE(run("rates " + quoted(data / "identity2.json") + " --out " + quoted(w.dir), w.dir / "log") == 0);
    const json r = json::parse(slurp(w.dir / "rates.json"));
    CHECK(r["kaczmarz"]["sigma_random"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r["gamma_random"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r["exactness"] == true);
    CHECK(slurp(w.dir / "log").find("gamma_random") != std::string::npos);
}

TEST_CASE("bench output is byte-identical across runs") {
    Workspace w;
    const std::string args = "bench " + quoted(data / "skewed_entropy.json") + " --trials 200 --steps 10 --seed 5 --out ";
    REQUIRE(run(args + quoted(w.dir / "one"), w.dir / "log") == 0);
    REQUIRE(run(args + quoted(w.dir / "two"), w.dir / "log") == 0);
    const std::string a = slurp(w.dir / "one" / "bench.json");
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(w.dir / "two" / "bench.json"));
    const json b = json::parse(a);
    CHECK(b["trials"] == 200);
    CHECK(b.contains("random"));
    CHECK(b.contains("adaptive"));
}

TEST_CASE("ot and sketched problems") {
    Workspace w;
    REQUIRE(run("ot " + quoted(data / "ot_3x3x3.json") + " --out " + quoted(w.dir / "ot"), w.dir / "log") == 0);
    const json plan = json::parse(slurp(w.dir / "ot" / "plan.json"));
    double mass = 0.0;
    for (const auto& v : plan["plan"]) mass += v.get<double>();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    for (const char* algo : {"sinkhorn", "greenkhorn", "random", "adaptive"}) {
        CHECK(run("ot " + quoted(data / "sinkhorn_2x2.json") + " --algo " + algo + " --out " + quoted(w.dir / algo), w.dir / "log") ==
              0);
    }
    CHECK(run("solve " + quoted(data / "sketched_mm.json") + " --out " + quoted(w.dir / "mm"), w.dir / "log") == 0);
    CHECK(run("solve " + quoted(data / "sketched_mm.json") + " --sketch rows --out " + quoted(w.dir / "mm2"), w.dir / "log") == 0);
}
