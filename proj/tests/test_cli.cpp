#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "nscore/cli.hpp"
#include "nscore/csv_util.hpp"

namespace fs = std::filesystem;
using nscore::run_cli;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("nscore_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    // runs the CLI with stderr captured
    int run(const std::vector<std::string>& args, std::string* err = nullptr) {
        std::ostringstream buf;
        auto* old = std::cerr.rdbuf(buf.rdbuf());
        const int code = run_cli(args);
        std::cerr.rdbuf(old);
        if (err) *err = buf.str();
        return code;
    }

    fs::path dir_;
};

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
        files[fs::relative(e.path(), root).string()] = nscore::read_file(e.path());
    }
    return files;
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const std::string kSmall =
    "sample_id,group_id,true_class,is_novel,a_0,a_1,a_2\n"
    "s1,g1,0,0,3,1,0.5\n"
    "s2,g1,1,0,0.2,2.5,0.1\n"
    "s3,g2,2,0,0.1,0.3,1.9\n"
    "s4,g2,0,0,0.4,1.1,0.2\n"
    "s5,g1,,1,0.9,1.0,0.8\n"
    "s6,g2,,1,1.2,0.7,1.1\n";

}  // namespace

TEST_F(CliTest, ScoreWritesOneRowPerRecord) {
    const auto in = write("in.csv", kSmall);
    const auto out = (dir_ / "cs2.csv").string();
    ASSERT_EQ(run({"score", "--input", in, "--scorer", "cs2", "--out", out}), 0);
    const auto text = nscore::read_file(out);
    EXPECT_EQ(text.rfind("sample_id,group,raw,oriented,flags\n", 0), 0u);
    EXPECT_EQ(count_lines(text), 7u);
    EXPECT_TRUE(fs::exists(out + ".manifest.json"));
}

TEST_F(CliTest, ZeroRunnerUpIsADataError) {
    const auto in = write("zero.csv",
                          "sample_id,group_id,true_class,is_novel,a_0,a_1,a_2\n"
                          "s1,g1,0,0,3,1,0.5\n"
                          "s2,g1,0,0,3,0,-1\n");
    std::string err;
    EXPECT_EQ(run({"score", "--input", in, "--scorer", "cr", "--out", (dir_ / "o.csv").string()}, &err), 2);
    EXPECT_NE(err.find("line 3"), std::string::npos) << err;
}

TEST_F(CliTest, UnknownScorerIsAUsageError) {
    const auto in = write("in.csv", kSmall);
    std::string err;
    EXPECT_EQ(run({"score", "--input", in, "--scorer", "cs9"}, &err), 1);
    EXPECT_NE(err.find("lc_absolute"), std::string::npos) << err;
    EXPECT_EQ(run({"nonsense"}, &err), 1);
}

TEST_F(CliTest, MalformedCsvIsADataError) {
    const auto in = write("bad.csv", "sample_id,group_id,true_class,is_novel,a_0,a_1\ns1,g1,0,0,1,nan\n");
    std::string err;
    EXPECT_EQ(run({"evaluate", "--input", in, "--out", (dir_ / "e").string()}, &err), 2);
    EXPECT_NE(err.find("line 2"), std::string::npos) << err;
}

TEST_F(CliTest, EvaluateAllScorersBothDefinitions) {
    const auto in = write("in.csv", kSmall);
    const auto out = dir_ / "eval";
    ASSERT_EQ(run({"evaluate", "--input", in, "--scorers", "all", "--positive", "both", "--out",
                   out.string()}),
              0);
    const auto table = nscore::read_file(out / "table.csv");
    EXPECT_EQ(count_lines(table), 11u);
    EXPECT_EQ(table.rfind("scorer,AUC,ROC\n", 0), 0u);
    EXPECT_EQ(count_lines(nscore::read_file(out / "summary_novel_only.csv")), 11u);
    EXPECT_TRUE(fs::exists(out / "curves" / "cs1_novel_only.csv"));
    EXPECT_TRUE(fs::exists(out / "curves" / "lc_exp_wrong_or_novel.csv"));
}

TEST_F(CliTest, ReportAndReplayAreDeterministic) {
    const auto a = dir_ / "a";
    const auto b = dir_ / "b";
    ASSERT_EQ(run({"report", "--out", a.string(), "--dim", "3", "--samples", "80", "--epochs", "60",
                   "--simulations", "200", "--scorers", "cs1,cr,lc_exp"}),
              0);
    ASSERT_EQ(run({"replay", (a / "manifest.json").string(), "--out", b.string()}), 0);
    const auto sa = snapshot(a);
    const auto sb = snapshot(b);
    EXPECT_GT(sa.size(), 10u);
    EXPECT_EQ(sa, sb);
}
