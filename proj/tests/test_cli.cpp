#include "mimobc/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace mimobc;

namespace {

const std::string kChannels = MIMOBC_CHANNEL_DIR;

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::string scalar_file() { return kChannels + "/scalar.json"; }

double value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + "=", 0) == 0) return std::stod(line.substr(key.size() + 1));
    throw std::runtime_error("missing key " + key);
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("mimobc_test_" + name);
}

}  // namespace

TEST(Cli, RatesAtZeroCovariance) {
    const auto r = run({"rates", "--channel", scalar_file(), "--mu1", "0", "--mu2", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(value(r.out, "r01"), 0.5, 1e-12);
    EXPECT_NEAR(value(r.out, "r0"), 0.5 * std::log2(1.5), 1e-12);
    EXPECT_EQ(value(r.out, "r1"), 0.0);
    EXPECT_EQ(value(r.out, "r2"), 0.0);
}

TEST(Cli, RatesWithCovarianceFiles) {
    const auto k1 = temp_path("k1.json"), k2 = temp_path("k2.json");
    write_file(k1.string(), "[[0.5]]");
    write_file(k2.string(), "[[0.25]]");
    const auto r = run({"rates", "--channel", scalar_file(), "--k1", k1.string(), "--k2", k2.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(value(r.out, "r1_raw"), 0.5 * std::log2(63.0 / 55.0), 1e-11);
    const auto ns = run({"rates", "--channel", scalar_file(), "--k1", k1.string(), "--k2", k2.string(),
                         "--scheme", "nsdpc"});
    EXPECT_NEAR(value(ns.out, "r2"), 0.5 * std::log2(9.0 / 8.0), 1e-11);
    write_file(k1.string(), "[[0.9]]");
    EXPECT_EQ(run({"rates", "--channel", scalar_file(), "--k1", k1.string(), "--k2", k2.string()}).code, 2);
}

TEST(Cli, UnknownSubcommand) {
    const auto r = run({"frobnicate"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({"optimize", "--channel", scalar_file(), "--order", "13"}).code, 2);
    EXPECT_EQ(run({"optimize", "--mu1", "1"}).code, 2);
    EXPECT_EQ(run({"optimize", "--channel", "/nonexistent.json"}).code, 2);
    EXPECT_EQ(run({"optimize", "--channel", scalar_file(), "--mu1", "-1"}).code, 2);
    EXPECT_EQ(run({"verify-kkt", "--channel", scalar_file()}).code, 2);  // mu1 + mu2 = 0
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, NonAlignedNsIsUsageError) {
    const auto r = run({"optimize", "--channel", kChannels + "/general2x2.json", "--scheme", "nsdpc"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("aligned"), std::string::npos);
}

TEST(Cli, OptimizeMatchesOracle) {
    const auto a = run({"optimize", "--channel", scalar_file(), "--mu1", "1.5", "--mu2", "1"});
    const auto b = run({"oracle-scalar", "--channel", scalar_file(), "--mu1", "1.5", "--mu2", "1"});
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(b.code, 0);
    EXPECT_NEAR(value(a.out, "objective"), value(b.out, "objective"), 1e-3);
}

TEST(Cli, VerifyInvarianceScalar) {
    const auto r = run({"verify-invariance", "--channel", scalar_file(), "--grid", "5", "--seed", "7"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_LE(value(r.out, "max_gap"), 1e-4);
}

TEST(Cli, VerifySubcommandsPass) {
    const std::string ch = kChannels + "/aligned2x2.json";
    EXPECT_EQ(run({"verify-kkt", "--channel", ch, "--mu1", "1", "--mu2", "0.5", "--order", "21"}).code, 0);
    EXPECT_EQ(run({"verify-enhancement", "--channel", ch, "--mu1", "0.5", "--mu2", "2", "--candidates", "200"}).code, 0);
    EXPECT_EQ(run({"verify-ns", "--channel", ch, "--mu1", "1", "--mu2", "1"}).code, 0);
}

TEST(Cli, TraceIsDeterministic) {
    const std::vector<std::string> args{"trace", "--channel", kChannels + "/aligned2x2.json", "--grid", "3",
                                        "--seed", "3", "--order", "both"};
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const auto rows = parse_samples_csv(a.out);
    EXPECT_EQ(rows.size(), 18u);
}

TEST(Cli, TraceExportAndPlot) {
    const auto csv = temp_path("trace.csv"), json = temp_path("trace.json"), plot = temp_path("plot.py");
    auto r = run({"trace", "--channel", scalar_file(), "--grid", "3", "--out", csv.string(), "--emit-plot",
                  plot.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(parse_samples_csv(read_file(csv.string())).size(), 9u);
    EXPECT_NE(read_file(plot.string()).find(csv.string()), std::string::npos);
    r = run({"trace", "--channel", scalar_file(), "--grid", "3", "--out", json.string(), "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto a = parse_samples_json(read_file(json.string()));
    const auto b = parse_samples_csv(read_file(csv.string()));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].objective, b[i].objective);
}
