#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + CFMIMO_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("cfmimo_cli_" + name);
    fs::remove_all(d);
    return d;
}

const std::string kTiny = "--slots 20 --startup-slots 10";

} // namespace

TEST(Cli, RunIsReproducible) {
    const fs::path a = scratch("a"), b = scratch("b");
    ASSERT_EQ(cli("run --seed 7 " + kTiny + " --out-dir " + a.string()), 0);
    ASSERT_EQ(cli("run --seed 7 " + kTiny + " --out-dir " + b.string()), 0);
    for (const char* f : {"throughput_cdf.csv", "queue_trace.csv", "windows.csv", "lsfc.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Cli, UsageErrorsExitWithTwo) {
    EXPECT_EQ(cli("run --no-such-flag 1"), 2);
    EXPECT_EQ(cli("run --slots -5"), 2);
    EXPECT_EQ(cli("run --scheme nonsense"), 2);
    EXPECT_EQ(cli(""), 2);
    EXPECT_EQ(cli("fig1 --rbs 8"), 2);
    EXPECT_EQ(cli("fig2 --scheme baseline"), 2);
    EXPECT_EQ(cli("fig1 --seeds 1,x"), 2);
}

TEST(Cli, FlagsOverrideTheConfigFile) {
    const fs::path d = scratch("cfg");
    fs::create_directories(d);
    {
        std::ofstream(d / "c.txt") << "# test\nslots = 20\nstartup-slots = 10\nseed = 3\n";
    }
    ASSERT_EQ(cli("run --config " + (d / "c.txt").string() + " --seed 4 --out-dir " + (d / "out").string()), 0);
    const std::string meta = slurp(d / "out" / "run_meta.txt");
    EXPECT_NE(meta.find("seed=4"), std::string::npos) << meta;
    EXPECT_NE(meta.find("slots=20"), std::string::npos) << meta;
    // run_meta.txt is itself a valid configuration
    ASSERT_EQ(cli("run --config " + (d / "out" / "run_meta.txt").string() + " --out-dir " + (d / "again").string()), 0);
    EXPECT_EQ(slurp(d / "out" / "throughput_cdf.csv"), slurp(d / "again" / "throughput_cdf.csv"));
    fs::remove_all(d);
}

TEST(Cli, Fig1WritesPooledCdfs) {
    const fs::path d = scratch("fig1");
    ASSERT_EQ(cli("fig1 --seeds 1,2 " + kTiny + " --out-dir " + d.string()), 0);
    for (const char* tag : {"hfs_baseline", "hfs_fixed", "pfs_baseline", "pfs_fixed"}) {
        const fs::path cdf = d / (std::string(tag) + "_throughput_cdf.csv");
        ASSERT_TRUE(fs::exists(cdf)) << cdf;
        std::ifstream in(cdf);
        std::string line;
        int rows = -1;
        while (std::getline(in, line))
            ++rows;
        EXPECT_EQ(rows, 200); // two seeds of 100 UEs
        EXPECT_TRUE(fs::exists(d / tag / "seed2" / "queue_trace.csv"));
    }
    fs::remove_all(d);
}

TEST(Cli, Fig2WritesBothBandwidths) {
    const fs::path d = scratch("fig2");
    ASSERT_EQ(cli("fig2 --seeds 1 " + kTiny + " --out-dir " + d.string()), 0);
    for (int f : {1, 8}) {
        const std::string tag = "pfs_fixed_F" + std::to_string(f);
        EXPECT_TRUE(fs::exists(d / (tag + "_throughput_cdf.csv"))) << tag;
        EXPECT_TRUE(fs::exists(d / (tag + "_mutual_info_cdf.csv"))) << tag;
    }
    fs::remove_all(d);
}

TEST(Cli, QuickSelftestPasses) {
    EXPECT_EQ(cli("selftest"), 0);
}
