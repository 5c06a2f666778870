#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "itpack/io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(ITPACK_CLI_PATH) + " " + args + " 2>&1";
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    char buf[4096];
    while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) res.output.append(buf, got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("itpack_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, ExtremalInstanceHasNoTransversal) {
    const auto gen = run_cli("gen cliques-extremal --n 2 -o " + path("g.json"));
    ASSERT_EQ(gen.exit_code, 0) << gen.output;
    const auto oracle = run_cli("oracle exists -i " + path("g.json"));
    EXPECT_EQ(oracle.exit_code, 3);
    EXPECT_NE(oracle.output.find("no transversal"), std::string::npos);
}

TEST_F(CliTest, EdgeFreePackYieldsPartitionAndValidates) {
    ASSERT_EQ(run_cli("gen random --k 3 --n 4 --max-deg 0 --local 0 -o " + path("g.json")).exit_code,
              0);
    const auto packed = run_cli("pack -i " + path("g.json") + " -o " + path("p.json") +
                                " --mode practical --p 0.5 --rounds 4 --iters 6 --seed 1"
                                " --round-retries 6 --trace " + path("t.csv"));
    EXPECT_EQ(packed.exit_code, 0) << packed.output;
    const auto packing = itpack::packing_from_json(itpack::read_file(path("p.json")));
    EXPECT_EQ(packing.transversals.size(), 4u);
    const auto val = run_cli("validate -g " + path("g.json") + " -p " + path("p.json"));
    EXPECT_EQ(val.exit_code, 0) << val.output;
    EXPECT_NE(val.output.find("ok"), std::string::npos);
    const auto trace = itpack::read_file(path("t.csv"));
    EXPECT_NE(trace.find("r,t,active_transversals"), std::string::npos);
}

TEST_F(CliTest, SameSeedSameBytes) {
    ASSERT_EQ(run_cli("gen yuster --k 4 --n 8 --seed 3 -o " + path("g.json")).exit_code, 0);
    const std::string flags = " --p 0.3 --seed 42 --round-retries 4";
    ASSERT_EQ(run_cli("pack -i " + path("g.json") + " -o " + path("a.json") + flags).exit_code, 0);
    ASSERT_EQ(run_cli("pack -i " + path("g.json") + " -o " + path("b.json") + flags).exit_code, 0);
    EXPECT_EQ(itpack::read_file(path("a.json")), itpack::read_file(path("b.json")));
}

TEST_F(CliTest, WorkerCountDoesNotChangeBytes) {
    ASSERT_EQ(run_cli("gen random --k 5 --n 10 --max-deg 4 --local 2 --seed 9 -o " +
                      path("g.json")).exit_code,
              0);
    const std::string base = "pack -i " + path("g.json") + " --p 0.3 --seed 7 --round-retries 4";
    ASSERT_EQ(run_cli(base + " -o " + path("w1.json") + " --workers 1").exit_code, 0);
    ASSERT_EQ(run_cli(base + " -o " + path("w8.json") + " --workers 8").exit_code, 0);
    EXPECT_EQ(itpack::read_file(path("w1.json")), itpack::read_file(path("w8.json")));
}

TEST_F(CliTest, ScheduleCheckReportsClauses) {
    const auto res = run_cli("schedule check --eps 0.005 --n 1000000000 -o " + path("rep.json"));
    EXPECT_EQ(res.exit_code, 0);
    EXPECT_NE(res.output.find("clause (ii): pass"), std::string::npos);
    EXPECT_NE(res.output.find("informational"), std::string::npos);
    const auto rep = itpack::Json::parse(itpack::read_file(path("rep.json")));
    EXPECT_EQ(rep.at("n").get<long long>(), 1000000000);

    const auto fail = run_cli("schedule check --eps 0.1 --n 1000000000");
    EXPECT_EQ(fail.exit_code, 0);
    EXPECT_NE(fail.output.find("clause (ii): FAIL"), std::string::npos);
}

TEST_F(CliTest, InvalidInputExitsTwo) {
    itpack::write_file(path("bad.json"), "{\"k\": 2, \"sizes\": [2,2], \"edges\": [[0,1]]}");
    const auto res = run_cli("pack -i " + path("bad.json") + " -o " + path("p.json"));
    EXPECT_EQ(res.exit_code, 2);
    EXPECT_NE(res.output.find("intra-part"), std::string::npos);

    const auto missing = run_cli("pack -i " + path("nope.json") + " -o " + path("p.json"));
    EXPECT_EQ(missing.exit_code, 2);
}

TEST_F(CliTest, OracleMaxReportsExactCount) {
    ASSERT_EQ(run_cli("gen yuster --k 2 --n 3 --seed 5 -o " + path("g.json")).exit_code, 0);
    const auto res = run_cli("oracle max -i " + path("g.json") + " -o " + path("m.json"));
    EXPECT_EQ(res.exit_code, 0);
    const auto j = itpack::Json::parse(itpack::read_file(path("m.json")));
    EXPECT_EQ(j.at("max_disjoint_transversals").get<int>(), 3);
}

TEST_F(CliTest, InfeasiblePackExitsThreeAndWritesPartial) {
    ASSERT_EQ(run_cli("gen cliques-extremal --n 3 -o " + path("g.json")).exit_code, 0);
    const auto res = run_cli("pack -i " + path("g.json") + " -o " + path("p.json") +
                             " --p 0.4 --seed 2 --round-retries 1");
    EXPECT_EQ(res.exit_code, 3) << res.output;
    const auto packing = itpack::packing_from_json(itpack::read_file(path("p.json")));
    EXPECT_TRUE(packing.transversals.empty());
    EXPECT_TRUE(packing.infeasible);
}

TEST_F(CliTest, ReducePackAndAppsSmoke) {
    ASSERT_EQ(run_cli("gen random --k 4 --n 8 --max-deg 3 --local 1 --seed 4 -o " +
                      path("g.json")).exit_code,
              0);
    const auto red = run_cli("reduce-pack -i " + path("g.json") + " -o " + path("r.json") +
                             " --gamma 0.3 --seed 6 --round-retries 4");
    EXPECT_EQ(red.exit_code, 0) << red.output;
    EXPECT_EQ(run_cli("validate -g " + path("g.json") + " -p " + path("r.json")).exit_code, 0);

    itpack::write_file(path("lists.json"),
                       R"({"n":2, "edges":[[0,1]], "lists":[[1,2],[1,2]]})");
    const auto lc = run_cli("list-color -i " + path("lists.json") + " -o " + path("c.json") +
                            " --p 0.5 --seed 3 --round-retries 6");
    EXPECT_EQ(lc.exit_code, 0) << lc.output;
    const auto cj = itpack::Json::parse(itpack::read_file(path("c.json")));
    EXPECT_EQ(cj.at("colorings").size(), 2u);
}

TEST_F(CliTest, ValidateRejectsTamperedPacking) {
    ASSERT_EQ(run_cli("gen random --k 3 --n 3 --max-deg 0 --local 0 -o " + path("g.json")).exit_code,
              0);
    ASSERT_EQ(run_cli("pack -i " + path("g.json") + " -o " + path("p.json") +
                      " --p 0.5 --seed 1 --round-retries 4").exit_code,
              0);
    auto j = itpack::Json::parse(itpack::read_file(path("p.json")));
    j["transversals"][0][0] = j["transversals"][1][0]; // force a shared vertex
    itpack::write_file(path("p.json"), j.dump(2) + "\n");
    const auto res = run_cli("validate -g " + path("g.json") + " -p " + path("p.json"));
    EXPECT_EQ(res.exit_code, 3);
    EXPECT_NE(res.output.find("disjointness"), std::string::npos);
}
