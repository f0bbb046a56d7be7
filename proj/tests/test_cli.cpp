#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hfteq/cli.hpp"

using namespace hfteq;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "hfteq");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / ("hfteq_test_" + name);
    std::ofstream(path) << body;
    return path.string();
}

}  // namespace

TEST(Grids, Geometric) {
    const auto g = cli::parse_geometric_grid("1e-2:1e-6:5");
    ASSERT_EQ(g.size(), 5u);
    EXPECT_EQ(g.front(), 1e-2);
    EXPECT_EQ(g.back(), 1e-6);
    EXPECT_NEAR(g[2], 1e-4, 1e-18);
    EXPECT_THROW(cli::parse_geometric_grid("0:1:3"), ConfigError);
    EXPECT_THROW(cli::parse_geometric_grid("1:2"), ConfigError);
    EXPECT_THROW(cli::parse_geometric_grid("1:2:x"), ConfigError);
    EXPECT_THROW(cli::parse_geometric_grid("1:2:2.5"), ConfigError);
}

TEST(Grids, Linear) {
    const auto g = cli::parse_linear_grid("0:1:5");
    ASSERT_EQ(g.size(), 5u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 1.0);
    EXPECT_DOUBLE_EQ(g[1], 0.25);
}

TEST(Grids, IntRange) {
    EXPECT_EQ(cli::parse_int_range("1..4"), (std::vector<std::size_t>{1, 2, 3, 4}));
    EXPECT_EQ(cli::parse_int_range("3..3"), (std::vector<std::size_t>{3}));
    EXPECT_THROW(cli::parse_int_range("4..1"), ConfigError);
    EXPECT_THROW(cli::parse_int_range("0..2"), ConfigError);
    EXPECT_THROW(cli::parse_int_range("1-3"), ConfigError);
}

TEST(Cli, SolveJsonRoundTrip) {
    const auto r = run_cli({"solve", "--dt", "0.004"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_NEAR(doc["equilibrium"]["betas"][0].get<double>(), 0.95630247438115536278, 1e-13);
    const MarketParams m = cli::params_from_document(doc);
    EXPECT_EQ(m.dt, 0.004);
    ASSERT_EQ(m.traders.size(), 1u);
    EXPECT_EQ(m.traders[0].rho, 0.05);

    // Feeding the output back as a config reproduces it.
    const auto path = temp_file("roundtrip.json", r.out);
    const auto again = run_cli({"solve", "--config", path});
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(json::parse(again.out)["equilibrium"], doc["equilibrium"]);
}

TEST(Cli, InlineOverridesConfig) {
    const auto path = temp_file("base.json",
                                R"({"sigma_S":1,"sigma_K":1,"dt":0.01,"traders":[{"gamma":1,"rho":0.05}]})");
    const auto r = run_cli({"solve", "--config", path, "--dt", "0.004"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out)["equilibrium"]["betas"][0].get<double>(), 0.95630247438115536278,
                1e-13);
}

TEST(Cli, SolveCsvHasValueColumns) {
    const auto r = run_cli({"--format", "csv", "solve", "--num-traders", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header, "trader,beta,phi,mu,beta_sigma,lambda,tax,A,B,C,D,E,zeta,F,G,eta");
}

TEST(Cli, BadInputsExitTwo) {
    EXPECT_EQ(run_cli({"solve", "--dt", "-1"}).code, cli::BadConfig);
    EXPECT_EQ(run_cli({"solve", "--sigma-S", "0"}).code, cli::BadConfig);
    EXPECT_EQ(run_cli({"solve", "--gamma", "1,2", "--num-traders", "3"}).code, cli::BadConfig);
    EXPECT_EQ(run_cli({"solve", "--config", "/nonexistent/x.json"}).code, cli::BadConfig);
    EXPECT_EQ(run_cli({"solve", "--config", temp_file("bad.json", "{not json")}).code, cli::BadConfig);
    EXPECT_EQ(run_cli({"solve", "--config", temp_file("extra.json",
                                                      R"({"sigma_S":1,"sigma_K":1,"dt":0.01,"wat":1,
                                                          "traders":[{"gamma":1,"rho":0.05}]})")})
                  .code,
              cli::BadConfig);
    EXPECT_EQ(run_cli({"sweep"}).code, cli::BadConfig);
    EXPECT_EQ(run_cli({"sweep", "--dt-grid", "1:2"}).code, cli::BadConfig);
    EXPECT_EQ(run_cli({"verify", "--dt", "0"}).code, cli::BadConfig);
    EXPECT_EQ(run_cli({"--format", "xml", "solve"}).code, cli::BadConfig);
    const auto r = run_cli({"solve", "--sigma-K", "-1", "--gamma", "0"});
    EXPECT_NE(r.err.find("sigma_K"), std::string::npos);
    EXPECT_NE(r.err.find("gamma"), std::string::npos);
}

TEST(Cli, ExpandPrintsZeroCoefficient) {
    const auto r = run_cli({"--format", "json", "expand", "--num-traders", "3", "--sigma-S", "2",
                            "--sigma-K", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json rows = json::parse(r.out);
    bool seen = false;
    for (const auto& row : rows) {
        if (row["quantity"] == "D" && row["trader"] == 0) {
            EXPECT_EQ(row["half_order_coeff"].get<double>(), 0.0);
            seen = true;
        }
    }
    EXPECT_TRUE(seen);
}

TEST(Cli, SweepDtColumns) {
    const auto r = run_cli({"--format", "csv", "sweep", "--dt-grid", "1e-2:1e-4:3"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header.rfind("dt,beta_exact,beta_limit,beta_expansion,lambda_exact", 0), 0u);
    std::size_t rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    EXPECT_EQ(rows, 3u);
}

TEST(Cli, SweepK) {
    const auto r = run_cli({"sweep", "--k", "1..3", "--dt", "1e-4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json rows = json::parse(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[2]["k"], 3);
    EXPECT_LT(rows[2]["lambda_exact"].get<double>(), rows[0]["lambda_exact"].get<double>());
}

TEST(Cli, TaxSweep) {
    const auto r = run_cli({"tax-sweep", "--c-grid", "0:0.1:3", "--num-traders", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json rows = json::parse(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0]["c"].get<double>(), 0.0);
}

TEST(Cli, SimulateWritesPaths) {
    const auto path = (std::filesystem::temp_directory_path() / "hfteq_test_paths.bin").string();
    const auto r = run_cli({"simulate", "--paths", "3", "--horizon", "10", "--paths-out", path});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::filesystem::file_size(path), 8u + 16u + 30u * 8u * 8u);
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc["config"]["horizon"], 10);
}

TEST(Cli, VerifyPasses) {
    const auto r = run_cli({"verify", "--dt", "4e-4", "--rho", "25", "--num-traders", "2",
                            "--initial-inventory", "0.5,-0.2", "--paths", "200"});
    EXPECT_EQ(r.code, 0) << r.err << r.out;
    const json rep = json::parse(r.out);
    EXPECT_TRUE(rep.contains("checks"));
}
