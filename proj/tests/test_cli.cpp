#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "rankest/io.hpp"
#include "rankest/minimax_threshold.hpp"
#include "rankest/rank_select.hpp"

namespace fs = std::filesystem;
using namespace rankest;

namespace {

struct Run {
    int status;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(RANKEST_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t k = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), k);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("rankest_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

void write_snapshot_file(const fs::path& path, double spike_snr_db, std::uint64_t seed) {
    Scenario sc;
    sc.horizon = 45;
    if (spike_snr_db > -100) sc.events = {{0, 45, spike_snr_db, {{0, 1.3}}}};
    std::mt19937_64 rng(seed);
    io::SnapshotTable tab{Field::complex, 9, {}, {}};
    for (long k = 0; k < 45; ++k) {
        tab.times.push_back(static_cast<double>(k));
        tab.rows.push_back(generate_snapshot(sc, k, rng).values);
    }
    std::ofstream f(path);
    io::write_snapshots(f, tab);
}

}  // namespace

TEST(Cli, TwTableRowsAndDeterminism) {
    const auto a = scratch("tw_a.csv"), b = scratch("tw_b.csv");
    ASSERT_EQ(run("tw --from -5 --to 3 --step 0.01 --out " + a.string()).status, 0);
    ASSERT_EQ(run("tw --from -5 --to 3 --step 0.01 --out " + b.string()).status, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    std::ifstream f(a);
    const auto [header, rows] = io::read_table(f);
    EXPECT_EQ(header, (std::vector<std::string>{"s", "F1", "f1", "F2", "f2"}));
    ASSERT_EQ(rows.size(), 801u);
    for (const auto& r : rows) {
        EXPECT_GE(r[2], 0.0);
        EXPECT_GE(r[4], 0.0);
    }
    EXPECT_NEAR(rows[500][0], 0.0, 1e-12);
}

TEST(Cli, ThresholdMatchesLibrary) {
    const auto r = run("threshold --n 9 --N 45 --beta 2 --sigma2 1 --ci 1 --ce 1 --lemma1");
    ASSERT_EQ(r.status, 0) << r.out;
    const auto kv = key_values(r.out);
    const NoiseModel m(9, 45, 1.0);
    const double l0 = default_lambda0(m);
    const auto sol = solve_minimax_threshold({m, l0, 1.0, 1.0});
    EXPECT_EQ(kv.at("T"), io::format_number(sol.threshold));
    EXPECT_EQ(kv.at("t"), io::format_number(sol.standardized));
    EXPECT_EQ(kv.at("risk"), io::format_number(sol.max_risk));
    const auto l1 = lemma1_threshold(l0 - std::sqrt(0.2), m, 1.0, 1.0);
    EXPECT_EQ(kv.at("lemma1_t"), io::format_number(l1.standardized));
    EXPECT_EQ(kv.at("lemma1_case"), std::to_string(static_cast<int>(l1.which)));
}

TEST(Cli, ThresholdRejectsZeroInclusionCost) {
    const auto r = run("threshold --ci 0");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.out.find("--ci"), std::string::npos);
    EXPECT_NE(run("threshold --lambda0 0.1").status, 0);
}

TEST(Cli, RankOnNoiseAndSpike) {
    const auto noise = scratch("noise.csv"), spike = scratch("spike.csv");
    write_snapshot_file(noise, -1000, 51);
    write_snapshot_file(spike, 10.0, 52);
    const auto rn = run("rank --input " + noise.string());
    ASSERT_EQ(rn.status, 0) << rn.out;
    EXPECT_EQ(key_values(rn.out).at("rank"), "0");
    const auto rs = run("rank --input " + spike.string() + " --false-alarm 0.005 --out " + scratch("rank.csv").string());
    ASSERT_EQ(rs.status, 0) << rs.out;
    EXPECT_EQ(key_values(rs.out).at("rank"), "1");
    EXPECT_EQ(key_values(rs.out).at("rank_kn"), "1");
    std::ifstream f(scratch("rank.csv"));
    EXPECT_EQ(io::read_table(f).second.size(), 9u);
}

TEST(Cli, RankReportsTruncatedRow) {
    const auto path = scratch("truncated.csv");
    std::ofstream(path) << "t,x_0,x_1\n0,1,2\n1,0.5\n";
    const auto r = run("rank --input " + path.string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.out.find("row 2"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("line 3"), std::string::npos) << r.out;
}

TEST(Cli, SimulateIsReproducible) {
    const std::string sc = std::string(RANKEST_SOURCE_DIR) + "/scenarios/varying_rank.ini";
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    ASSERT_EQ(run("simulate --scenario " + sc + " --out " + a.string()).status, 0);
    ASSERT_EQ(run("simulate --scenario " + sc + " --out " + b.string()).status, 0);
    EXPECT_EQ(slurp(a / "trace.csv"), slurp(b / "trace.csv"));
    EXPECT_TRUE(fs::exists(a / "rank.svg"));
    std::ifstream f(a / "trace.csv");
    const auto [header, rows] = io::read_table(f);
    EXPECT_EQ(header.size(), 8u);
    EXPECT_EQ(rows.size(), 1000u);
}

TEST(Cli, SweepSingleReplicateHasZeroSd) {
    const std::string sc = std::string(RANKEST_SOURCE_DIR) + "/scenarios/constant_rank.ini";
    const auto dir = scratch("sweep");
    const auto r = run("sweep --scenario " + sc + " --rates 1 --replicates 1 --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.out;
    std::ifstream f(dir / "sweep.csv");
    const auto [header, rows] = io::read_table(f);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0][2], 0.0);
    EXPECT_EQ(rows[0][4], 0.0);
}

TEST(Cli, MissingScenarioSection) {
    const auto path = scratch("bad.ini");
    std::ofstream(path) << "[signal]\nt_on = 0\nt_off = 1\nsnr_db = 0\nomega_path = 0:1\n";
    const auto r = run("simulate --scenario " + path.string() + " --out " + scratch("bad_out").string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.out.find("[scenario]"), std::string::npos) << r.out;
}
