#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "awh/cli.hpp"

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kParams = R"({"A":0.5,"B":-0.3,"C":0.4,"D":0.2,"q":0.5})";
const char* kBadParams = R"({"A":3.0,"B":0.2,"C":0.5,"D":0.1,"q":0.5})";

struct CliResult {
    int rc = 0;
    std::string out;  // captured stdout
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"awh"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    CliResult r;
    r.rc = awh::run(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old);
    r.out = captured.str();
    return r;
}

fs::path tmp_file(const std::string& tag) {
    static int counter = 0;
    return fs::temp_directory_path() /
           ("awh_cli_test_" + tag + "_" + std::to_string(counter++));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("validate: admissible parameters exit 0 with a clean report") {
    const fs::path out = tmp_file("val_ok");
    const CliResult r =
        run_cli({"validate", "--params", kParams, "--out", out.string()});
    CHECK(r.rc == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["schema"] == "aw-harness/1");
    CHECK(rep["admissible"] == true);
    CHECK(rep["violations"].empty());
    REQUIRE(rep["checks"].is_array());
    CHECK(rep["checks"].size() > 10);
    for (const auto& ck : rep["checks"]) CHECK(ck["ok"] == true);
    CHECK(rep.contains("config"));
    CHECK(rep.contains("seed"));
}

TEST_CASE("validate: inadmissible parameters exit 1 naming the product") {
    const fs::path out = tmp_file("val_bad");
    const CliResult r =
        run_cli({"validate", "--params", kBadParams, "--out", out.string()});
    CHECK(r.rc == 1);
    const json rep = json::parse(slurp(out));
    CHECK(rep["admissible"] == false);
    CHECK_FALSE(rep["violations"].empty());
    bool ac_flagged = false;
    for (const auto& ck : rep["checks"])
        if (ck["name"] == "AC" && ck["ok"] == false) ac_flagged = true;
    CHECK(ac_flagged);
}

TEST_CASE("validate: csv report carries the reproducibility header") {
    const fs::path out = tmp_file("val_csv");
    const CliResult r = run_cli({"validate", "--params", kParams, "--format",
                                 "csv", "--out", out.string()});
    CHECK(r.rc == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("# aw-harness/1 version=", 0) == 0);
    CHECK(text.find("name,ok,re,im") != std::string::npos);
    CHECK(text.find("# admissible,1") != std::string::npos);
}

TEST_CASE("validate: malformed input exits 2") {
    CHECK(run_cli({"validate", "--params", "{not json"}).rc == 2);
    CHECK(run_cli({"validate", "--params", R"({"A":0.5,"q":0.5})"}).rc == 2);
    CHECK(run_cli({"validate", "--params", "/nonexistent/params.json"}).rc == 2);
    CHECK(run_cli({"frobnicate"}).rc == 2);
}

TEST_CASE("params: to-greek emits the harness constants") {
    const fs::path out = tmp_file("greek");
    const CliResult r = run_cli(
        {"params", "--to-greek", "--params", kParams, "--out", out.string()});
    CHECK(r.rc == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["direction"] == "to-greek");
    const json& g = rep["greeks"];
    CHECK(std::abs(g["eta"].get<double>() - (-0.2879319147079058)) < 1e-12);
    CHECK(std::abs(g["theta"].get<double>() - (-0.4276276953606822)) < 1e-12);
    CHECK(std::abs(g["sigma"].get<double>() - (-0.07455268389662027)) < 1e-12);
    CHECK(std::abs(g["tau"].get<double>() - 0.03976143141153082) < 1e-12);
    CHECK(std::abs(g["gamma"].get<double>() - 0.5089463220675945) < 1e-12);
}

TEST_CASE("params: from-greek constructs the named family and round-trips") {
    const fs::path out = tmp_file("family");
    const CliResult r = run_cli({"params", "--from-greek", "q_meixner",
                                 "--greeks",
                                 R"({"theta":0.8,"tau":0.3,"gamma":0.2})",
                                 "--out", out.string()});
    CHECK(r.rc == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["family"] == "q_meixner");
    const json& req = rep["greeks_requested"];
    const json& ach = rep["greeks_achieved"];
    for (const char* k : {"theta", "tau", "gamma"})
        CHECK(std::abs(req[k].get<double>() - ach[k].get<double>()) < 1e-10);
    // the family pins A = B = 0
    CHECK(rep["params"]["A"][0].get<double>() == 0.0);
    CHECK(rep["params"]["B"][0].get<double>() == 0.0);
    CHECK(rep["q"].get<double>() == 0.2);

    // a fixed-zero constant supplied nonzero is rejected
    CHECK(run_cli({"params", "--from-greek", "q_meixner", "--greeks",
                   R"({"theta":0.8,"tau":0.3,"gamma":0.2,"eta":0.4})"})
              .rc == 2);
    // exactly one direction must be chosen
    CHECK(run_cli({"params", "--params", kParams}).rc == 2);
    CHECK(run_cli({"params", "--to-greek", "--from-greek", "q_meixner",
                   "--params", kParams, "--greeks", "{}"})
              .rc == 2);
}

TEST_CASE("law: marginal moments match the closed forms") {
    const fs::path out = tmp_file("law_marg");
    const CliResult r = run_cli(
        {"law", "--params", kParams, "--t", "1.08", "--out", out.string()});
    CHECK(r.rc == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["kind"] == "marginal");
    CHECK(std::abs(rep["moments"]["mean"].get<double>() - 0.4265469874151286) <
          1e-9);
    CHECK(std::abs(rep["moments"]["variance"].get<double>() -
                   0.1115808753741255) < 1e-9);
    CHECK(rep["K"].get<double>() > 0.0);
    CHECK(rep["density"].size() > 100);
    CHECK(rep["atoms"].empty());
}

TEST_CASE("law: transition moments match the closed forms") {
    const fs::path out = tmp_file("law_trans");
    const CliResult r =
        run_cli({"law", "--params", kParams, "--t", "1.08", "--s", "0.33",
                 "--x", "0.42", "--out", out.string()});
    CHECK(r.rc == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["kind"] == "transition");
    CHECK(std::abs(rep["moments"]["mean"].get<double>() - 0.3258151920878622) <
          1e-9);
    CHECK(std::abs(rep["moments"]["variance"].get<double>() -
                   0.0882925536060263) < 1e-9);

    // --s and --x only come as a pair
    CHECK(run_cli({"law", "--params", kParams, "--t", "1.08", "--s", "0.33"})
              .rc == 2);
    // time outside I
    CHECK(run_cli({"law", "--params", kParams, "--t", "0.05"}).rc == 2);
}

TEST_CASE("sample: identical seeds give byte-identical csv files") {
    const fs::path f1 = tmp_file("tr1"), f2 = tmp_file("tr2");
    const std::vector<std::string> base{
        "sample", "--params", kParams,  "--grid",   "0.4,0.9,1.4",
        "--seed", "42",       "--n-paths", "3",     "--format", "csv"};
    std::vector<std::string> a1 = base;
    a1.insert(a1.end(), {"--out", f1.string()});
    std::vector<std::string> a2 = base;
    a2.insert(a2.end(), {"--out", f2.string()});
    CHECK(run_cli(a1).rc == 0);
    CHECK(run_cli(a2).rc == 0);
    const std::string t1 = slurp(f1), t2 = slurp(f2);
    CHECK(t1 == t2);
    CHECK(t1.rfind("# aw-harness/1 version=", 0) == 0);
    CHECK(t1.find("path_id,t,y,z,x") != std::string::npos);
    CHECK(t1.find("# cov,") != std::string::npos);

    // a different seed changes the draw
    std::vector<std::string> a3{
        "sample", "--params", kParams,  "--grid",   "0.4,0.9,1.4",
        "--seed", "43",       "--n-paths", "3",     "--format", "csv",
        "--out",  f1.string()};
    CHECK(run_cli(a3).rc == 0);
    CHECK(slurp(f1) != t2);
}

TEST_CASE("sample: json report carries trajectories and covariance") {
    const fs::path out = tmp_file("tr_json");
    const CliResult r =
        run_cli({"sample", "--params", kParams, "--grid", "0.4,0.9,1.4",
                 "--seed", "7", "--n-paths", "2", "--out", out.string()});
    CHECK(r.rc == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["schema"] == "aw-harness/1");
    REQUIRE(rep["trajectories"].size() == 2);
    CHECK(rep["trajectories"][0]["y"].size() == 3);
    REQUIRE_FALSE(rep["covariance"].empty());
    for (const auto& row : rep["covariance"]) {
        CHECK(row.contains("estimate"));
        CHECK(row.contains("se"));
        CHECK(row.contains("target"));
    }

    CHECK(run_cli({"sample", "--params", kParams, "--grid", "0.9,0.4"}).rc == 2);
    CHECK(run_cli({"sample", "--params", kParams, "--grid", "0.4,abc"}).rc == 2);
}

TEST_CASE("verify: a passing suite exits 0 and prints one line per check") {
    const fs::path out = tmp_file("verify");
    const CliResult r = run_cli({"verify", "--suite", "qseries", "--sweep", "2",
                                 "--seed", "11", "--out", out.string()});
    CHECK(r.rc == 0);
    CHECK(r.out.rfind("# aw-harness/1 version=", 0) == 0);
    CHECK(r.out.find("PASS  poch-shift") != std::string::npos);
    CHECK(r.out.find("PASS  poch-inversion") != std::string::npos);
    CHECK(r.out.find("residual=") != std::string::npos);
    CHECK(r.out.find("threshold=") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);

    const json rep = json::parse(slurp(out));
    CHECK(rep["pass"] == true);
    REQUIRE(rep["checks"].is_array());
    for (const auto& ck : rep["checks"]) {
        CHECK(ck["residual"].get<double>() < ck["threshold"].get<double>());
    }

    CHECK(run_cli({"verify", "--suite", "nonsense"}).rc == 2);
}

TEST_CASE("verify: discrete and bridge suites pass at a small sweep") {
    const CliResult rd =
        run_cli({"verify", "--suite", "discrete", "--sweep", "2", "--seed", "3"});
    CHECK(rd.rc == 0);
    CHECK(rd.out.find("PASS  discrete-ck-lemma") != std::string::npos);
    const CliResult rb =
        run_cli({"verify", "--suite", "bridge", "--sweep", "2", "--seed", "3"});
    CHECK(rb.rc == 0);
    CHECK(rb.out.find("PASS  bridge-mass-sum") != std::string::npos);
}
