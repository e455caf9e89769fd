#include <doctest.h>

#include "lipkernel/cli.hpp"

#include <json.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
    json report() const { return json::parse(out); }
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = lipkernel::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("lipkernel_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("train then attack at delta 0 reproduces the clean accuracy") {
    TempDir dir("train");
    REQUIRE(cli({"--seed", "4", "gen-data", "--n-per-class", "30", "--csv", dir / "d.csv"}).code == 0);
    const Run tr = cli({"--seed", "4", "train", "--data", dir / "d.csv", "--model-out", dir / "m.txt", "--L", "2"});
    REQUIRE(tr.code == 0);
    const json t = tr.report();
    CHECK(t["status"] == "ok");
    CHECK(t["results"]["converged"] == true);
    CHECK(t["results"]["final_constraint"].get<double>() <= 4.0 * (1 + 1e-3));

    const Run at = cli({"attack", "--data", dir / "d.csv", "--model", dir / "m.txt", "--deltas", "0,0.05,0.2"});
    REQUIRE(at.code == 0);
    const json a = at.report();
    const auto rob = a["results"]["robust_accuracy"].get<std::vector<double>>();
    CHECK(rob[0] == t["results"]["clean_accuracy"].get<double>());
    CHECK(a["results"]["clean_accuracy"].get<double>() == rob[0]);
    CHECK(rob[1] <= rob[0]);
    CHECK(rob[2] <= rob[1]);

    const Run lip = cli({"lipschitz", "--model", dir / "m.txt"});
    REQUIRE(lip.code == 0);
    const json est = lip.report()["results"]["per_model"][0]["estimates"];
    REQUIRE(est.size() == 5);
    const double exact = est[0]["lipschitz"], empirical = est[4]["lipschitz"];
    CHECK(empirical <= exact * (1 + 1e-9));
    // training stops once the searched constant is within 5% of the budget
    CHECK(empirical <= 2.0 * 1.05);
}

TEST_CASE("attack rescales data with the model's constants") {
    TempDir dir("scale");
    // raw features far from the unit box
    std::string full = "label,a,b\n", part = "label,a,b\n";
    for (int i = 0; i < 40; ++i) {
        const int y = i % 2 ? 1 : -1;
        const double a = 100 + 50 * ((i * 7) % 40) / 40.0 + (y > 0 ? 30 : 0), b = -5 + (i * 13 % 40) / 8.0;
        const std::string row = std::to_string(y) + "," + std::to_string(a) + "," + std::to_string(b) + "\n";
        full += row;
        if (i >= 10 && i < 20) part += row;
    }
    write(dir / "full.csv", full);
    write(dir / "part.csv", part);
    REQUIRE(cli({"train", "--data", dir / "full.csv", "--model-out", dir / "m.txt", "--L", "3"}).code == 0);
    const json a = cli({"attack", "--data", dir / "full.csv", "--model", dir / "m.txt", "--per-example"}).report();
    const json b = cli({"attack", "--data", dir / "part.csv", "--model", dir / "m.txt", "--per-example"}).report();
    const json ea = a["results"]["per_example"][0]["examples"], eb = b["results"]["per_example"][0]["examples"];
    REQUIRE(eb.size() == 10);
    for (int i = 0; i < 10; ++i)
        CHECK(eb[i]["clean_margin"].get<double>() ==
              doctest::Approx(ea[10 + i]["clean_margin"].get<double>()).epsilon(1e-9));
}

TEST_CASE("inverse kernel pipeline stays inside the unit ball") {
    TempDir dir("inverse");
    REQUIRE(cli({"--seed", "6", "gen-data", "--n-per-class", "25", "--dim", "3", "--csv", dir / "d.csv"}).code == 0);
    const Run tr = cli({"--seed", "6", "train", "--data", dir / "d.csv", "--model-out", dir / "m.txt", "--kernel",
                        "inverse", "--L", "5", "--constraint-mode", "brute-force"});
    REQUIRE(tr.code == 0);
    const double clean = tr.report()["results"]["clean_accuracy"];
    CHECK(clean >= 0.9);
    const json a = cli({"attack", "--data", dir / "d.csv", "--model", dir / "m.txt", "--deltas", "0,0.05"}).report();
    CHECK(a["exit_code"] == 0);
    CHECK(a["results"]["robust_accuracy"][0].get<double>() == clean);
    const json l = cli({"lipschitz", "--model", dir / "m.txt"}).report();
    CHECK(l["exit_code"] == 0);
    const json est = l["results"]["per_model"][0]["estimates"];
    CHECK(est[0].contains("skipped"));
    CHECK(est[4]["lipschitz"].get<double>() <= 5.0 * 1.05);
}

TEST_CASE("certify suites pass") {
    const Run r = cli({"--seed", "2", "certify", "--instances", "40"});
    CHECK(r.code == 0);
    const json j = r.report();
    CHECK(j["results"]["all_passed"] == true);
    CHECK(j["results"]["suites"].size() == 4);
}

TEST_CASE("the echoed configuration reproduces a run") {
    TempDir dir("echo");
    SUBCASE("spectrum") {
        const Run first = cli({"--seed", "9", "spectrum", "--kernel", "gaussian", "--sigma2", "0.3", "--n-mc", "300"});
        REQUIRE(first.code == 0);
        const json a = first.report();
        write(dir / "c.toml", a["config_toml"].get<std::string>());
        const json b = cli({"--config", dir / "c.toml", "spectrum"}).report();
        CHECK(b["results"] == a["results"]);
        CHECK(b["config"] == a["config"]);
        CHECK(b["seed"] == 9);
    }
    SUBCASE("scatter with flags and lists") {
        const Run first = cli({"--seed", "5", "scatter", "--models", "4", "--anchors", "10", "--delta", "0.05",
                               "--norm", "linf", "--steps", "20"});
        REQUIRE(first.code == 0);
        const json a = first.report();
        write(dir / "c.toml", a["config_toml"].get<std::string>());
        const json b = cli({"--config", dir / "c.toml", "scatter"}).report();
        CHECK(b["results"] == a["results"]);
    }
    SUBCASE("report file") {
        const Run r = cli({"--out", dir / "r.json", "spectrum", "--J", "5", "--jmax", "5"});
        CHECK(r.code == 0);
        CHECK(r.out.empty());
        std::ifstream f(dir / "r.json");
        const json j = json::parse(f);
        CHECK(j["command"] == "spectrum");
        CHECK(j["results"]["eigenvalues"].size() == 6);  // indices 0..J
    }
}

TEST_CASE("exit codes") {
    TempDir dir("codes");
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({}).code == 2);
    CHECK(cli({"train"}).code == 2);
    CHECK(cli({"spectrum", "--bogus"}).code == 2);
    CHECK(cli({"spectrum", "--kernel", "laplace"}).code == 2);
    CHECK(cli({"spectrum", "--sigma2", "-1"}).code == 2);
    CHECK(cli({"certify", "--suite", "nope"}).code == 2);
    CHECK(cli({"attack", "--data", dir / "missing.csv", "--model", dir / "missing.txt"}).code == 2);
    CHECK(cli({"gen-data", "--kind", "moons", "--classes", "3", "--csv", dir / "x.csv"}).code == 2);

    write(dir / "bad.csv", "label,a\n1,0.5\n1,abc\n");
    const Run bad = cli({"train", "--data", dir / "bad.csv", "--model-out", dir / "m.txt"});
    CHECK(bad.code == 2);
    CHECK(bad.report()["status"] == "config-error");
    CHECK(bad.err.find(":3:") != std::string::npos);

    // a narrow kernel with a single outer pass cannot reach the budget
    REQUIRE(cli({"--seed", "10", "gen-data", "--n-per-class", "60", "--spread", "0.12", "--csv", dir / "d.csv"})
                .code == 0);
    const Run nc = cli({"--seed", "1", "train", "--data", dir / "d.csv", "--model-out", dir / "m.txt", "--sigma",
                        "0.1", "--outer-iters", "1", "--witness-mode", "random"});
    CHECK(nc.code == 1);
    const json j = nc.report();
    CHECK(j["status"] == "not-converged");
    CHECK(j["results"]["converged"] == false);
    CHECK(fs::exists(dir / "m.txt"));
}
