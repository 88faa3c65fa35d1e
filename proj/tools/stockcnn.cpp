#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "stockcnn/error.hpp"
#include "stockcnn/experiment/commands.hpp"
#include "stockcnn/io.hpp"

namespace ex = stockcnn::experiment;
using stockcnn::Error;
using stockcnn::ErrorKind;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kDiverged = 3 };

struct Overrides {
    std::string config;
    std::optional<int> horizon;
    std::optional<std::string> variant;
    std::optional<std::string> split;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool force = false;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--horizon", o.horizon, "Only this horizon (days)");
    cmd->add_option("--variant", o.variant, "Only this chart variant");
    cmd->add_option("--split", o.split, "Only this split strategy (random, automatic, time)");
    cmd->add_option("--seed", o.seed, "Split and training seed");
    cmd->add_option("--out", o.out, "Output directory");
}

ex::ExperimentConfig resolve(const Overrides& o)
{
    ex::ExperimentConfig config = ex::load_config(o.config);
    if (o.horizon) config.horizons = {*o.horizon};
    if (o.variant) {
        const auto v = stockcnn::imaging::parse_variant(*o.variant);
        if (!v) throw Error(ErrorKind::Config, "unknown variant '" + *o.variant + "'");
        config.variants = {*v};
    }
    if (o.split) {
        const auto s = stockcnn::dataset::parse_split(*o.split);
        if (!s) throw Error(ErrorKind::Config, "unknown split '" + *o.split + "'");
        config.splits = {*s};
    }
    if (o.seed) {
        config.seed = *o.seed;
        config.train.seed = *o.seed;
    }
    if (o.out) config.out_dir = *o.out;
    if (o.force) config.force = true;
    ex::check_config(config);
    return config;
}

ex::CellKey single_cell(const ex::ExperimentConfig& config)
{
    if (config.horizons.size() != 1 || config.variants.size() != 1 || config.splits.size() != 1) {
        throw Error(ErrorKind::Config, "train/evaluate need exactly one horizon, variant and split "
                                       "(use --horizon, --variant, --split)");
    }
    return {config.variants.front(), config.horizons.front(), config.splits.front()};
}

int exit_code(const Error& e)
{
    switch (e.kind()) {
    case ErrorKind::Config: return kUsage;
    case ErrorKind::NonFiniteLoss: return kDiverged;
    default: return kData;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Candlestick-chart CNN trend classifier"};
    app.set_version_flag("--version", ex::code_version());
    app.require_subcommand(1);

    Overrides o;
    std::string checkpoint;
    std::string table;
    auto* fetch = app.add_subcommand("fetch", "Download one CSV per ticker");
    auto* build = app.add_subcommand("build", "Render chart datasets");
    auto* train = app.add_subcommand("train", "Train one grid cell");
    auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on the test partition");
    auto* matrix = app.add_subcommand("matrix", "Run the full variant x horizon x split grid");
    auto* figures = app.add_subcommand("figures", "Redraw figures from a results table");
    for (auto* cmd : {fetch, build, train, evaluate, matrix}) add_common(cmd, o);
    fetch->add_flag("--force", o.force, "Re-download existing files");
    evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file (default: the cell's trained model)");
    figures->add_option("table", table, "results.tsv")->required()->check(CLI::ExistingFile);
    figures->add_option("--out", o.out, "Output directory (default: the table's directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (figures->parsed()) {
            const std::string text = stockcnn::io::read_file(table);
            if (!ex::metrics_consistent(text)) {
                throw Error(ErrorKind::MalformedRow, "metrics do not match confusion counts in " + table);
            }
            const auto dir = o.out ? std::filesystem::path(*o.out) : std::filesystem::path(table).parent_path();
            const auto [a, b] = ex::write_figures(ex::parse_results_tsv(text), dir);
            std::cout << a.string() << '\n' << b.string() << '\n';
            return kOk;
        }

        const ex::ExperimentConfig config = resolve(o);
        if (fetch->parsed()) {
            const auto outcome = ex::cmd_fetch(config, std::cerr);
            std::cout << outcome.downloaded.size() << " downloaded, " << outcome.skipped.size() << " skipped, "
                      << outcome.failed.size() << " failed\n";
            for (const auto& [ticker, why] : outcome.failed) std::cout << "failed\t" << ticker << '\t' << why << '\n';
            return outcome.failed.empty() ? kOk : kData;
        }
        if (build->parsed()) {
            const auto outcome = ex::cmd_build(config, std::cerr);
            for (const auto& m : outcome.manifests) std::cout << m.string() << '\n';
            for (const auto& [ticker, why] : outcome.skipped) std::cout << "skipped\t" << ticker << '\t' << why << '\n';
            return kOk;
        }
        if (train->parsed()) {
            const auto cell = single_cell(config);
            const auto outcome = ex::cmd_train(config, cell, std::cerr);
            std::cout << ex::checkpoint_path(config, cell).string() << '\n'
                      << ex::history_path(config, cell).string() << '\n';
            for (const auto& w : outcome.warnings) std::cout << "warning\t" << w << '\n';
            return kOk;
        }
        if (evaluate->parsed()) {
            const auto cell = single_cell(config);
            const auto path = checkpoint.empty() ? ex::checkpoint_path(config, cell) : std::filesystem::path(checkpoint);
            std::cout << ex::results_to_tsv({ex::cmd_evaluate(config, cell, path, std::cerr)});
            return kOk;
        }
        if (matrix->parsed()) {
            const auto outcome = ex::cmd_matrix(config, std::cerr);
            std::cout << outcome.results.string() << '\n'
                      << outcome.report.string() << '\n'
                      << outcome.horizon_figure.string() << '\n'
                      << outcome.split_figure.string() << '\n';
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
