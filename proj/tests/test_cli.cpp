#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cli.hpp"

using namespace eib;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;
using json = eib::io::json;

namespace {

const fs::path kConfigs = EIB_CONFIG_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("eib_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

/// Runs the CLI in-process with stdout silenced.
int run_cli(std::vector<std::string> args, std::string* log_out = nullptr) {
    args.insert(args.begin(), "eib");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream log, sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), log);
    std::cout.rdbuf(old);
    if (log_out) *log_out = log.str();
    return code;
}

json read(const fs::path& p) { return io::read_json_file(p.string()); }

std::string write_config(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
}

json checksums(const fs::path& dir) {
    json out = json::object();
    for (const auto& f : read(dir / "manifest.json").at("outputs")) out[f.at("file").get<std::string>()] = f.at("sha256");
    return out;
}

}  // namespace

TEST_CASE("sha256 of a known string", "[cli]") {
    CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("solve writes its outputs and a manifest", "[cli]") {
    const auto out = scratch("solve");
    REQUIRE(run_cli({"solve", "--config", (kConfigs / "solve.json").string(), "--out", out.string()}) == 0);
    for (const char* f : {"state.json", "trace.csv", "trace.json", "summary.json", "manifest.json"})
        CHECK(fs::exists(out / f));
    const json m = read(out / "manifest.json");
    CHECK(m.at("command") == "solve");
    CHECK(m.at("outputs").size() == 4);
    for (const auto& f : m.at("outputs")) {
        std::ifstream in(out / f.at("file").get<std::string>(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK(cli::sha256_hex(ss.str()) == f.at("sha256"));
    }
    std::ifstream trace(out / "trace.csv");
    std::string header;
    std::getline(trace, header);
    CHECK(header == "iter,f_eib,max_delta");
}

TEST_CASE("solve examples", "[cli]") {
    const auto one = scratch("solve_t1");
    REQUIRE(run_cli({"solve", "--config", (kConfigs / "solve.json").string(), "--out", one.string(), "--set",
                     "solver.t_cardinality=1"}) == 0);
    const json s = read(one / "summary.json");
    CHECK(s.at("h_t") == 0.0);
    CHECK(s.at("i_xt") == 0.0);
    CHECK(s.at("i_yt") == 0.0);

    const auto toy = scratch("solve_toy");
    REQUIRE(run_cli({"solve", "--config", (kConfigs / "solve_toy.json").string(), "--out", toy.string()}) == 0);
    CHECK_THAT(read(toy / "summary.json").at("i_yt").get<double>(), WithinAbs(std::numbers::ln2, 1e-6));
}

TEST_CASE("reruns are byte-identical", "[cli]") {
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    for (const auto& dir : {a, b})
        REQUIRE(run_cli({"decompose", "--config", (kConfigs / "decompose.json").string(), "--out", dir.string()}) == 0);
    CHECK(checksums(a) == checksums(b));
    CHECK(read(a / "decomposition.json").at("all_hold") == true);
}

TEST_CASE("exit codes", "[cli]") {
    const auto dir = scratch("codes");
    std::string log;
    CHECK(run_cli({"solve"}) == cli::kMalformed);
    CHECK(run_cli({"nonsense", "--config", "x.json"}) == cli::kMalformed);
    CHECK(run_cli({"solve", "--config", (dir / "missing.json").string()}, &log) == cli::kMalformed);
    CHECK(log.find("MalformedInput") != std::string::npos);

    const auto bad = write_config(dir, "bad.json", "{\"command\": \"solve\", \"joint\": {\"probs\": [[0.5, 0.5], [1]]}}");
    CHECK(run_cli({"solve", "--config", bad, "--out", (dir / "o1").string()}) == cli::kMalformed);
    const auto trunc = write_config(dir, "trunc.json", "{\"command\": ");
    CHECK(run_cli({"solve", "--config", trunc, "--out", (dir / "o2").string()}) == cli::kMalformed);
    CHECK(run_cli({"sweep", "--config", (kConfigs / "solve.json").string(), "--out", (dir / "o3").string()}) ==
          cli::kMalformed);

    const std::vector<std::string> strict{"solve", "--config", (kConfigs / "solve.json").string(), "--out",
                                          (dir / "o4").string(), "--set", "solver.max_iter=1", "--set", "solver.tol=1e-300"};
    CHECK(run_cli(strict) == cli::kOk);
    auto with_flag = strict;
    with_flag.push_back("--strict");
    CHECK(run_cli(with_flag) == cli::kNotConverged);
    CHECK(fs::exists(dir / "o4" / "manifest.json"));

    std::string rows;
    for (int i = 0; i < 3; ++i) {
        rows += std::string(i ? "," : "") + "[";
        for (int t = 0; t < 30; ++t) rows += std::string(t ? "," : "") + (t == 0 ? "1.0" : "0.0");
        rows += "]";
    }
    const auto budget = write_config(dir, "budget.json",
                                     "{\"command\": \"decompose\", \"source_joint\": {\"probs\": [[0.2,0.1],[0.3,0.1],[0.1,0.2]]},"
                                     " \"target_joint\": {\"probs\": [[0.2,0.1],[0.3,0.1],[0.1,0.2]]},"
                                     " \"encoder\": {\"probs\": [" + rows + "]}, \"empirical\": {\"m\": 50, \"seed\": 1}}");
    CHECK(run_cli({"decompose", "--config", budget, "--out", (dir / "o5").string()}) == cli::kBudget);
}

TEST_CASE("config files may be referenced by path", "[cli]") {
    const auto dir = scratch("files");
    write_config(dir, "joint.json", "{\"probs\": [[0.4, 0.1], [0.1, 0.4]]}");
    const auto cfg = write_config(dir, "cfg.json",
                                  "{\"command\": \"solve\", \"joint_file\": \"joint.json\", \"solver\": {\"beta\": 50, "
                                  "\"t_cardinality\": 2, \"alpha\": 1.0}}");
    REQUIRE(run_cli({"solve", "--config", cfg, "--out", (dir / "out").string()}) == 0);
    CHECK_THAT(read(dir / "out" / "summary.json").at("i_yt").get<double>(), WithinAbs(0.192744757021757, 1e-6));
}

TEST_CASE("sweep and gauss outputs", "[cli]") {
    const auto sw = scratch("sweep");
    REQUIRE(run_cli({"sweep", "--config", (kConfigs / "sweep_beta.json").string(), "--out", sw.string(), "--set",
                     "grid={\"lo\": 1.5, \"hi\": 51.5, \"n\": 6}"}) == 0);
    std::ifstream csv(sw / "sweep.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "beta,h_t,h_t_given_x,i_xt,i_yt,f_eib,converged");
    int n = 0;
    while (std::getline(csv, line)) ++n;
    CHECK(n == 6);
    std::ifstream svg(sw / "sweep.svg");
    std::stringstream ss;
    ss << svg.rdbuf();
    const std::string text = ss.str();
    std::size_t polylines = 0;
    for (auto p = text.find("<polyline"); p != std::string::npos; p = text.find("<polyline", p + 1)) ++polylines;
    CHECK(polylines == 2);

    const auto g = scratch("gauss");
    REQUIRE(run_cli({"gauss", "--config", (kConfigs / "gauss.json").string(), "--out", g.string(), "--set",
                     "n_samples=20000"}) == 0);
    const json r = read(g / "gauss_report.json");
    CHECK(r.at("l1").at(0).at("formula") == 0.0);
    CHECK_THAT(r.at("l1").at(1).at("formula").get<double>(), WithinAbs(1.36537898427417, 1e-14));
    CHECK(r.at("l1").at(2).at("formula") == 0.0);
    CHECK(r.at("l1").at(2).at("mc_estimate").get<double>() > 1.0);
    CHECK(fs::exists(g / "pairing.csv"));
}

TEST_CASE("installed binary reports exit codes", "[cli]") {
    const auto dir = scratch("binary");
    const std::string bin = EIB_BINARY;
    const auto rc = [](const std::string& cmd) {
        const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(rc(bin + " --version") == 0);
    CHECK(rc(bin + " solve --config " + (kConfigs / "solve.json").string() + " --out " + dir.string()) == 0);
    CHECK(rc(bin + " solve --config " + (dir / "nope.json").string()) == 2);
}
