#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "sis/model.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args, const std::string& stderr_path = "") {
    std::string cmd = std::string(SISVAX_BIN) + " " + args;
    cmd += stderr_path.empty() ? " 2>/dev/null" : " 2>" + stderr_path;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
    int status = pclose(pipe);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

/// Fixture directory with the model/strategy files the cases share.
class CliFixture {
public:
    CliFixture() {
        dir_ = fs::temp_directory_path() / "sisvax_cli_tests";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        sis::write_file(path("scalar.json"),
                        R"({"weights": [1.0], "gamma": [1.0], "cost": [1.0], "kernel": [[3.0]]})");
        sis::write_file(path("scalar6.json"),
                        R"({"weights": [1.0], "gamma": [2.0], "cost": [1.0], "kernel": [[6.0]]})");
        sis::write_file(path("subcritical.json"),
                        R"({"weights": [1.0], "gamma": [1.0], "cost": [1.0], "kernel": [[0.5]]})");
        sis::write_file(path("sbm.json"), R"({
            "weights": [0.5, 0.5], "gamma": [1.0, 1.0], "cost": [1.0, 1.0],
            "kernel": [[4, 1], [1, 2]]})");
        sis::write_file(path("blowup.json"), R"({
            "weights": [0.25, 0.25, 0.25, 0.25],
            "gamma": [1.0, 1.0, 1.0, 1.0],
            "cost": [1.0, 1.0, 1.0, 1.0],
            "kernel": [[4, 4, 1, 1], [4, 4, 1, 1], [1, 1, 2, 2], [1, 1, 2, 2]]})");
        sis::write_file(path("blowup_perturbed.json"), R"({
            "weights": [0.25, 0.25, 0.25, 0.25],
            "gamma": [1.0, 1.0, 1.0, 1.0],
            "cost": [1.0, 1.0, 1.0, 1.0],
            "kernel": [[4.1, 4, 1, 1], [4, 4, 1, 1], [1, 1, 2, 2], [1, 1, 2, 2]]})");
        sis::write_file(path("phi.json"), R"({"phi": [0, 0, 1, 1]})");
        sis::write_file(path("ones1.json"), R"({"eta": [1.0]})");
        sis::write_file(path("half1.json"), R"({"eta": [0.5]})");
        sis::write_file(path("ones2.json"), R"({"eta": [1.0, 1.0]})");
        sis::write_file(path("zeros2.json"), R"({"eta": [0.0, 0.0]})");
        sis::write_file(path("three_atom_pi.json"),
                        R"({"pi": [[0.25, 0.0], [0.25, 0.0], [0.0, 0.5]]})");
        sis::write_file(path("f3.json"), R"({"f": [2.0, 4.0, 6.0]})");
        sis::write_file(path("bad.json"), "this is not json");
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
    fs::path dir_;
};

CliFixture& fixture() {
    static CliFixture fx;
    return fx;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("r0 prints the reproduction number with certificates") {
    auto& fx = fixture();
    auto res = run_cli("r0 " + fx.path("scalar.json"));
    REQUIRE(res.code == 0);
    json j = json::parse(res.out);
    CHECK(std::abs(j["r0"].get<double>() - 3.0) <= 1e-10);
    CHECK(j["right_eigvec"].size() == 1);
    CHECK(j["left_eigvec"].size() == 1);

    auto sbm = run_cli("r0 " + fx.path("sbm.json"));
    REQUIRE(sbm.code == 0);
    json js = json::parse(sbm.out);
    // oracle: quadratic formula gives (3 + sqrt 2)/2
    CHECK(std::abs(js["r0"].get<double>() - 2.2071067811865475) <= 1e-10);
}

TEST_CASE("malformed or missing input exits with code 2") {
    auto& fx = fixture();
    CHECK(run_cli("r0 " + fx.path("bad.json")).code == 2);
    CHECK(run_cli("r0 " + fx.path("no_such_file.json")).code == 2);
    CHECK(run_cli("r0").code == 2);             // missing argument
    CHECK(run_cli("not-a-subcommand").code == 2);
}

TEST_CASE("re reproduces r0 at eta = 1 and 0 at eta = 0") {
    auto& fx = fixture();
    auto at_one = run_cli("re " + fx.path("sbm.json") + " " + fx.path("ones2.json"));
    REQUIRE(at_one.code == 0);
    CHECK(std::abs(json::parse(at_one.out)["re"].get<double>() - 2.2071067811865475) <= 1e-10);

    auto at_zero = run_cli("re " + fx.path("sbm.json") + " " + fx.path("zeros2.json"));
    REQUIRE(at_zero.code == 0);
    CHECK(json::parse(at_zero.out)["re"].get<double>() == 0.0);

    auto at_half = run_cli("re " + fx.path("scalar.json") + " " + fx.path("half1.json"));
    REQUIRE(at_half.code == 0);
    CHECK(std::abs(json::parse(at_half.out)["re"].get<double>() - 1.5) <= 1e-10);
}

TEST_CASE("equilibrium reports g, residual and the infected fraction") {
    auto& fx = fixture();
    auto sub = run_cli("equilibrium " + fx.path("subcritical.json") + " " + fx.path("ones1.json"));
    REQUIRE(sub.code == 0);
    json js = json::parse(sub.out);
    CHECK(js["g"][0].get<double>() == 0.0);
    CHECK(js["infected_fraction"].get<double>() == 0.0);

    auto sup = run_cli("equilibrium " + fx.path("scalar.json") + " " + fx.path("ones1.json"));
    REQUIRE(sup.code == 0);
    json js2 = json::parse(sup.out);
    CHECK(std::abs(js2["g"][0].get<double>() - 2.0 / 3.0) <= 1e-8);
    CHECK(std::abs(js2["infected_fraction"].get<double>() - 2.0 / 3.0) <= 1e-8);
    CHECK(js2["residual"].get<double>() <= 1e-9);
}

TEST_CASE("frontier writes the homogeneous segment CSV") {
    auto& fx = fixture();
    std::string out = fx.path("scalar_frontier.csv");
    auto res = run_cli("frontier " + fx.path("scalar.json") + " -m 10 -o " + out);
    REQUIRE(res.code == 0);
    std::string csv = sis::read_file(out);
    // 11 rows plus header
    std::size_t rows = 0;
    for (char ch : csv)
        if (ch == '\n') ++rows;
    CHECK(rows == 12);
    CHECK(csv.find("cost,loss,eta_0\n") == 0);
    CHECK(csv.find("\n1,0,0\n") != std::string::npos);
}

TEST_CASE("frontier output is byte-identical across worker counts and runs") {
    auto& fx = fixture();
    auto one = run_cli("frontier " + fx.path("sbm.json") + " -m 12 --workers 1");
    auto three = run_cli("frontier " + fx.path("sbm.json") + " -m 12 --workers 3");
    auto again = run_cli("frontier " + fx.path("sbm.json") + " -m 12 --workers 3");
    REQUIRE(one.code == 0);
    CHECK(one.out == three.out);
    CHECK(three.out == again.out);
}

TEST_CASE("frontier CSV is a staircase at m=20") {
    auto& fx = fixture();
    auto res = run_cli("frontier " + fx.path("sbm.json") + " -m 20");
    REQUIRE(res.code == 0);
    // parse the cost,loss leaders of each row and check the staircase order
    std::vector<std::pair<double, double>> rows;
    std::size_t pos = res.out.find('\n') + 1;
    while (pos < res.out.size()) {
        std::size_t end = res.out.find('\n', pos);
        double c = 0, l = 0;
        REQUIRE(std::sscanf(res.out.c_str() + pos, "%lf,%lf", &c, &l) == 2);
        rows.push_back({c, l});
        pos = end + 1;
    }
    REQUIRE(rows.size() > 10);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].first > rows[i - 1].first);
        CHECK(rows[i].second < rows[i - 1].second);
    }
}

TEST_CASE("frontier respects the infected-fraction loss") {
    auto& fx = fixture();
    auto res = run_cli("frontier " + fx.path("scalar.json") + " -m 4 --loss i");
    REQUIRE(res.code == 0);
    // eta = 1 gives loss 2/3 at cost 0
    CHECK(res.out.find("0,0.66666666") != std::string::npos);
}

TEST_CASE("oversized grids exit with the budget code") {
    auto& fx = fixture();
    CHECK(run_cli("frontier " + fx.path("blowup.json") + " -m 1000").code == 4);
}

TEST_CASE("reduce merges the blow-up and writes both files") {
    auto& fx = fixture();
    std::string out_model = fx.path("reduced.json");
    std::string out_coupling = fx.path("quotient.json");
    auto res = run_cli("reduce " + fx.path("blowup.json") + " -o " + out_model + " -c " +
                       out_coupling);
    REQUIRE(res.code == 0);
    CHECK(res.out == "{\"blocks\": [[0, 1], [2, 3]]}\n");
    sis::Model reduced = sis::load_model(out_model);
    REQUIRE(reduced.size() == 2);
    CHECK(reduced.kernel()(0, 0) == 4.0);
    CHECK(sis::read_file(out_coupling) == "{\"phi\": [0, 0, 1, 1]}\n");
    // an unreducible model keeps the identity partition
    auto single = run_cli("reduce " + fx.path("sbm.json"));
    REQUIRE(single.code == 0);
    CHECK(single.out == "{\"blocks\": [[0], [1]]}\n");
}

TEST_CASE("reduce reports near-mergeable blocks on stderr") {
    auto& fx = fixture();
    sis::write_file(fx.path("nearmiss.json"), R"({
        "weights": [0.5, 0.5], "gamma": [1.0, 1.000000005], "cost": [1.0, 1.0],
        "kernel": [[1, 1], [1, 1]]})");
    std::string errfile = fx.path("nearmiss.err");
    auto res = run_cli("reduce " + fx.path("nearmiss.json"), errfile);
    REQUIRE(res.code == 0);
    CHECK(res.out == "{\"blocks\": [[0], [1]]}\n");
    std::string err = sis::read_file(errfile);
    CHECK(err.find("near-mergeable") != std::string::npos);
    CHECK(err.find("gamma") != std::string::npos);
}

TEST_CASE("couple-check passes the blow-up pair and fails the perturbed one") {
    auto& fx = fixture();
    auto good = run_cli("couple-check " + fx.path("blowup.json") + " " + fx.path("sbm.json") +
                        " " + fx.path("phi.json"));
    CHECK(good.code == 0);
    json jg = json::parse(good.out);
    CHECK(jg["all_conjugate"].get<bool>());

    auto bad = run_cli("couple-check " + fx.path("blowup_perturbed.json") + " " +
                       fx.path("sbm.json") + " " + fx.path("phi.json"));
    CHECK(bad.code == 1);
    json jb = json::parse(bad.out);
    CHECK_FALSE(jb["all_conjugate"].get<bool>());
    CHECK_FALSE(jb["kernel"]["conjugate"].get<bool>());
    CHECK(std::abs(jb["kernel"]["max_violation"].get<double>() - 0.1) <= 1e-9);
    CHECK(jb["kernel"]["at"]["left"][0].get<int>() == 0);

    // marginal mismatch: couple the 4-atom model with itself via a 2-point map
    auto mismatch = run_cli("couple-check " + fx.path("blowup.json") + " " +
                            fx.path("blowup.json") + " " + fx.path("phi.json"));
    CHECK(mismatch.code == 2);
}

TEST_CASE("conjugate averages the worked three-atom example") {
    auto& fx = fixture();
    auto res = run_cli("conjugate " + fx.path("three_atom_pi.json") + " " + fx.path("f3.json") +
                       " --side left");
    REQUIRE(res.code == 0);
    json j = json::parse(res.out);
    CHECK(j["conjugate"][0].get<double>() == 3.0);
    CHECK(j["conjugate"][1].get<double>() == 6.0);

    sis::write_file(fx.path("const3.json"), R"({"f": [5.0, 5.0, 5.0]})");
    auto c = run_cli("conjugate " + fx.path("three_atom_pi.json") + " " + fx.path("const3.json") +
                     " --side left");
    json jc = json::parse(c.out);
    CHECK(jc["conjugate"][0].get<double>() == 5.0);
    CHECK(jc["conjugate"][1].get<double>() == 5.0);

    // deterministic coupling: pulling back composes with the map
    sis::write_file(fx.path("det_pi.json"), R"({"pi": [[0.25, 0], [0.25, 0], [0, 0.5]]})");
    sis::write_file(fx.path("f_right.json"), R"({"f": [0.25, 0.75]})");
    auto pull = run_cli("conjugate " + fx.path("det_pi.json") + " " + fx.path("f_right.json") +
                        " --side right");
    json jp = json::parse(pull.out);
    CHECK(jp["conjugate"][0].get<double>() == 0.25);
    CHECK(jp["conjugate"][1].get<double>() == 0.25);
    CHECK(jp["conjugate"][2].get<double>() == 0.75);
}

TEST_CASE("normalize folds gamma and cost into the kernel and measure") {
    auto& fx = fixture();
    auto res = run_cli("normalize " + fx.path("scalar6.json"));
    REQUIRE(res.code == 0);
    sis::Model n = sis::model_from_json(res.out);
    CHECK(n.kernel()(0, 0) == 3.0);
    CHECK(n.gamma()[0] == 1.0);
    CHECK(n.cost_density()[0] == 1.0);
    // unscaled cost density is rejected
    sis::write_file(fx.path("unscaled.json"),
                    R"({"weights": [1.0], "gamma": [1.0], "cost": [2.0], "kernel": [[3.0]]})");
    CHECK(run_cli("normalize " + fx.path("unscaled.json")).code == 2);
    CHECK(run_cli("normalize --prescale " + fx.path("unscaled.json")).code == 0);
}

TEST_CASE("subcommand outputs are deterministic") {
    auto& fx = fixture();
    for (const std::string& args :
         {"r0 " + fx.path("sbm.json"), "equilibrium " + fx.path("sbm.json") + " " + fx.path("ones2.json"),
          "reduce " + fx.path("blowup.json")}) {
        auto a = run_cli(args);
        auto b = run_cli(args);
        CHECK(a.code == b.code);
        CHECK(a.out == b.out);
    }
}

}
