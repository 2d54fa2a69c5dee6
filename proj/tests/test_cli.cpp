#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string output;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(PROBPNN_CLI) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) r.output += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path synthetic_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("probpnn_cli_" + name);
    fs::remove_all(dir);
    EXPECT_EQ(run("synthetic --out " + dir.string() + " --series 1 --weeks 10").code, 0);
    return dir;
}

}  // namespace

TEST(Cli, UsageErrorsExitWithTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("prepare").code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, EmptySelectionExitsWithTwo) {
    const auto dir = synthetic_dir("empty");
    auto j = nlohmann::json::parse(std::ifstream(dir / "config.json"));
    j["series"] = nlohmann::json::array();
    std::ofstream(dir / "config.json") << j.dump();
    const auto r = run("prepare --config " + (dir / "config.json").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("no series selected"), std::string::npos);
}

TEST(Cli, RuntimeFailuresExitWithOne) {
    const auto dir = synthetic_dir("runtime");
    const auto r = run("evaluate --config " + (dir / "config.json").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("prepare"), std::string::npos);
}

TEST(Cli, PrepareAndEvaluateBaselines) {
    const auto dir = synthetic_dir("baselines");
    const auto cfg = (dir / "config.json").string();
    const auto out = (dir / "elsewhere").string();
    ASSERT_EQ(run("prepare --config " + cfg + " --out " + out).code, 0);
    const auto r = run("evaluate --config " + cfg + " --out " + out + " --methods psf,climatology --seed 9");
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("climatology"), std::string::npos);
    EXPECT_TRUE(fs::exists(fs::path(out) / "report.json"));
    EXPECT_EQ(run("evaluate --config " + cfg + " --out " + out + " --methods psf,arima").code, 2);
}
