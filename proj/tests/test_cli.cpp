#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = SPDEITO_CLI;
const std::string kSource = SPDEITO_SOURCE_DIR;
const std::string kConfig = kSource + "/configs/default.json";

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("spdeito_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const nlohmann::json& j) const {
        const auto p = dir_ / "config.json";
        std::ofstream(p) << j.dump(2);
        return p;
    }
    nlohmann::json default_config() const {
        std::ifstream in(kConfig);
        return nlohmann::json::parse(in);
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, ListSuites) { EXPECT_EQ(run("--list-suites"), 0); }

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("--suite hida-norm"), 2);
    EXPECT_EQ(run("--config " + kConfig + " --suite nope"), 2);
    EXPECT_EQ(run("--config " + kConfig + " --suite hida-norm --format xml"), 2);
    EXPECT_EQ(run("--config /nonexistent.json --suite hida-norm"), 2);
}

TEST_F(Cli, EmptyTimesIsSchemaErrorWithoutOutput) {
    auto j = default_config();
    j["times"] = nlohmann::json::array();
    const auto cfg = write_config(j);
    EXPECT_EQ(run("--config " + cfg.string() + " --suite hida-norm --out " + (dir_ / "out").string()), 2);
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, ResolutionErrorExitCode) {
    auto j = default_config();
    j["hida"]["resolution"] = 2;
    const auto cfg = write_config(j);
    EXPECT_EQ(run("--config " + cfg.string() + " --suite hida-norm --out " + dir_.string()), 3);
}

TEST_F(Cli, RerunIsByteIdentical) {
    for (const std::string suite : {"kernel-selftest", "hida-norm"}) {
        ASSERT_EQ(run("--config " + kConfig + " --suite " + suite + " --out " + (dir_ / "a").string()), 0);
        ASSERT_EQ(run("--config " + kConfig + " --suite " + suite + " --workers 3 --out " + (dir_ / "b").string()), 0);
        const auto a = slurp(dir_ / "a" / (suite + ".csv"));
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, slurp(dir_ / "b" / (suite + ".csv"))) << suite;
    }
}

TEST_F(Cli, JsonFormat) {
    ASSERT_EQ(run("--config " + kConfig + " --suite hida-norm --format json --out " + dir_.string()), 0);
    const auto j = nlohmann::json::parse(slurp(dir_ / "hida-norm.json"));
    EXPECT_EQ(j["suite"], "hida-norm");
    EXPECT_FALSE(j["rows"].empty());
}

TEST_F(Cli, OutputDirectoryPrecedence) {
    const auto env_dir = dir_ / "env";
    const auto flag_dir = dir_ / "flag";
    ASSERT_EQ(run("--config " + kConfig + " --suite hida-norm", "SPDEITO_OUT_DIR=" + env_dir.string()), 0);
    EXPECT_TRUE(fs::exists(env_dir / "hida-norm.csv"));
    ASSERT_EQ(run("--config " + kConfig + " --suite hida-norm --out " + flag_dir.string(),
                  "SPDEITO_OUT_DIR=" + env_dir.string() + "_unused"),
              0);
    EXPECT_TRUE(fs::exists(flag_dir / "hida-norm.csv"));
    EXPECT_FALSE(fs::exists(dir_ / "env_unused"));
}

TEST_F(Cli, GoldenFiles) {
    const std::string golden = kSource + "/tests/golden";
    EXPECT_EQ(run("--config " + kConfig + " --suite kernel-selftest --suite hida-norm --out " + dir_.string() +
                  " --golden " + golden),
              0);
    EXPECT_EQ(run("--config " + kConfig + " --suite hida-norm --out " + dir_.string() + " --golden " + dir_.string() +
                  "/missing"),
              4);

    // A perturbed golden value is a value diff; a renamed metric is a shape error.
    const auto edited = dir_ / "edited";
    fs::create_directories(edited);
    std::string text = slurp(golden + "/hida-norm.csv");
    const auto pos = text.find(",norm,");
    ASSERT_NE(pos, std::string::npos);
    const auto start = pos + 6;
    text.replace(start, text.find(',', start) - start, "0.5");
    std::ofstream(edited / "hida-norm.csv") << text;
    EXPECT_EQ(run("--config " + kConfig + " --suite hida-norm --out " + dir_.string() + " --golden " + edited.string()), 6);

    std::string shape = slurp(golden + "/hida-norm.csv");
    shape.replace(shape.find(",norm,"), 6, ",mass,");
    std::ofstream(edited / "hida-norm.csv") << shape;
    EXPECT_EQ(run("--config " + kConfig + " --suite hida-norm --out " + dir_.string() + " --golden " + edited.string()), 5);
}
