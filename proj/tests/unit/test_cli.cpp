#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "../common/synthetic.hpp"
#include "stockcnn/experiment/commands.hpp"
#include "stockcnn/io.hpp"
#include "support.hpp"

#ifdef STOCKCNN_CLI

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string(STOCKCNN_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string base_config(const testing_support::TempDir& dir, const std::vector<std::string>& tickers)
{
    std::string t;
    for (const auto& x : tickers) t += (t.empty() ? "" : ",") + x;
    return "data_dir = " + (dir / "data").string() + "\nout_dir = " + (dir / "out").string() +
           "\ntickers = " + t + "\nwidth = 32\nheight = 32\nhorizons = 20\nvariants = volume\nepochs = 1\n";
}

} // namespace

TEST(Cli, UsageErrorsExitOne)
{
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run("train"), 1);
    EXPECT_EQ(run("train --config /nonexistent.cfg"), 1);

    testing_support::TempDir dir("cli_usage");
    stockcnn::io::write_file_atomic(dir / "bad.cfg", "horizons = 7\n");
    EXPECT_EQ(run("build --config " + (dir / "bad.cfg").string()), 1);
    stockcnn::io::write_file_atomic(dir / "ok.cfg", base_config(dir, {"A"}));
    EXPECT_EQ(run("build --config " + (dir / "ok.cfg").string() + " --variant sparkline"), 1);
    EXPECT_EQ(run("build --config " + (dir / "ok.cfg").string() + " --horizon 7"), 1);
    // train needs a single grid cell
    stockcnn::io::write_file_atomic(dir / "grid.cfg", base_config(dir, {"A"}) + "horizons = 1,20\n");
    EXPECT_EQ(run("train --config " + (dir / "grid.cfg").string()), 1);
}

TEST(Cli, PipelineAndExitCodes)
{
    testing_support::TempDir dir("cli_pipeline");
    const auto corpus = testing_support::write_drift_corpus(dir / "data", 4, 150, 9);
    const std::string cfg = (dir / "exp.cfg").string();
    stockcnn::io::write_file_atomic(cfg, base_config(dir, corpus.tickers));

    EXPECT_EQ(run("build --config " + cfg), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "dataset" / "volume_h20.tsv"));
    EXPECT_EQ(run("train --config " + cfg), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "models" / "volume_h20_time.ckpt"));
    EXPECT_EQ(run("evaluate --config " + cfg), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "eval_volume_h20_time.tsv"));
    // --out redirects outputs; evaluating there without a checkpoint is a data error.
    EXPECT_EQ(run("evaluate --config " + cfg + " --out " + (dir / "elsewhere").string()), 2);
    // Missing data directory for fetch without endpoint is a config error.
    EXPECT_EQ(run("fetch --config " + cfg), 1);

    stockcnn::io::write_file_atomic(dir / "diverge.cfg", base_config(dir, corpus.tickers) +
                                                             "optimizer = sgd\nlearning_rate = 1e30\nepochs = 3\n");
    EXPECT_EQ(run("train --config " + (dir / "diverge.cfg").string()), 3);

    EXPECT_EQ(run("matrix --config " + cfg + " --split random --seed 5"), 0);
    const auto table = dir / "out" / "results.tsv";
    ASSERT_TRUE(std::filesystem::exists(table));
    EXPECT_NE(stockcnn::io::read_file(table).find("random\tvolume\t20"), std::string::npos);
    EXPECT_NE(stockcnn::io::read_file(dir / "out" / "report.txt").find("seed: 5"), std::string::npos);
    EXPECT_EQ(run("figures " + table.string() + " --out " + (dir / "figs").string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "figs" / "split_comparison.svg"));
}

#endif
