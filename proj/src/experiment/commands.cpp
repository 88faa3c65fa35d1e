#include "stockcnn/experiment/commands.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>

#include "stockcnn/error.hpp"
#include "stockcnn/experiment/figures.hpp"
#include "stockcnn/io.hpp"
#include "stockcnn/market_data.hpp"
#include "stockcnn/nn/checkpoint.hpp"

#ifndef STOCKCNN_VERSION
#define STOCKCNN_VERSION "dev"
#endif

namespace stockcnn::experiment {

namespace fs = std::filesystem;

const char* code_version() noexcept { return STOCKCNN_VERSION; }

namespace {

std::string shortest(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// Keeps a failure message on one TSV field.
std::string one_line(std::string s)
{
    std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    return s;
}

std::string cell_name(const CellKey& cell)
{
    return dataset_stem(cell.variant, cell.horizon) + "_" + std::string(dataset::to_string(cell.split));
}

nn::ModelSpec model_spec(const ExperimentConfig& config)
{
    return nn::ModelSpec::trend_cnn(static_cast<std::size_t>(config.height),
                                    static_cast<std::size_t>(config.width));
}

} // namespace

std::string dataset_stem(imaging::Variant variant, int horizon)
{
    return std::string(imaging::to_string(variant)) + "_h" + std::to_string(horizon);
}

fs::path manifest_path(const ExperimentConfig& config, imaging::Variant variant, int horizon)
{
    return config.out_dir / "dataset" / (dataset_stem(variant, horizon) + ".tsv");
}

fs::path checkpoint_path(const ExperimentConfig& config, const CellKey& cell)
{
    return config.out_dir / "models" / (cell_name(cell) + ".ckpt");
}

fs::path history_path(const ExperimentConfig& config, const CellKey& cell)
{
    return config.out_dir / "models" / (cell_name(cell) + ".history.tsv");
}

FetchOutcome cmd_fetch(const ExperimentConfig& config, std::ostream& log)
{
    if (config.endpoint.empty()) throw Error(ErrorKind::Config, "fetch needs an endpoint");
    FetchOutcome outcome;
    fs::create_directories(config.data_dir);
    for (const std::string& ticker : config.tickers) {
        const fs::path target = config.data_dir / (ticker + ".csv");
        if (!config.force && fs::exists(target)) {
            outcome.skipped.push_back(ticker);
            log << "fetch " << ticker << ": present, skipped\n";
            continue;
        }
        try {
            const auto series =
                market_data::fetch_remote(ticker, config.train_start, config.test_end, config.endpoint);
            io::write_file_atomic(target, market_data::serialize_csv(series));
            outcome.downloaded.push_back(ticker);
            log << "fetch " << ticker << ": " << series.size() << " bars\n";
        } catch (const Error& e) {
            outcome.failed.emplace_back(ticker, e.what());
            log << "fetch " << ticker << ": FAILED " << e.what() << '\n';
        }
    }
    return outcome;
}

std::vector<dataset::Sample> collect_samples(const ExperimentConfig& config, imaging::Variant variant,
                                             int horizon, std::ostream& log,
                                             std::vector<TickerError>* skipped)
{
    const auto style = imaging::ChartStyle::for_variant(variant, config.width, config.height);
    std::vector<dataset::Sample> all;
    for (const std::string& ticker : config.tickers) {
        try {
            auto series = market_data::load_csv(config.data_dir / (ticker + ".csv"), ticker);
            std::erase_if(series.bars, [&](const market_data::Bar& b) {
                return b.date < config.train_start || b.date > config.test_end;
            });
            const auto violations = market_data::validate(series);
            if (!violations.empty()) {
                log << "build " << ticker << ": " << violations.size() << " bar-invariant violations (first at bar "
                    << violations.front().bar_index << ", " << violations.front().rule << ")\n";
            }
            auto samples = dataset::build_samples(series, horizon, style);
            log << "build " << ticker << " " << imaging::to_string(variant) << " h=" << horizon << ": "
                << samples.size() << " samples\n";
            std::move(samples.begin(), samples.end(), std::back_inserter(all));
        } catch (const Error& e) {
            log << "build " << ticker << ": skipped, " << e.what() << '\n';
            if (skipped) skipped->emplace_back(ticker, e.what());
        }
    }
    return all;
}

BuildOutcome cmd_build(const ExperimentConfig& config, std::ostream& log)
{
    check_config(config);
    BuildOutcome outcome;
    for (imaging::Variant variant : config.variants) {
        for (int horizon : config.horizons) {
            std::vector<TickerError> skipped;
            const auto samples = collect_samples(config, variant, horizon, log, &skipped);
            const fs::path manifest = manifest_path(config, variant, horizon);
            dataset::write_dataset(manifest.parent_path(), dataset_stem(variant, horizon), variant, samples);
            outcome.manifests.push_back(manifest);
            outcome.samples += samples.size();
            for (auto& s : skipped) {
                if (std::none_of(outcome.skipped.begin(), outcome.skipped.end(),
                                 [&](const TickerError& t) { return t.first == s.first; })) {
                    outcome.skipped.push_back(std::move(s));
                }
            }
        }
    }
    return outcome;
}

dataset::SplitResult make_split(const ExperimentConfig& config, dataset::SplitStrategy strategy,
                                std::span<const dataset::Sample> samples)
{
    switch (strategy) {
    case dataset::SplitStrategy::Random:
        return dataset::split_random(samples.size(), config.test_ratio, config.seed);
    case dataset::SplitStrategy::Automatic: return dataset::split_automatic(samples.size(), config.train_ratio);
    case dataset::SplitStrategy::Time: return dataset::split_time(samples, config.time_cutoff());
    }
    throw std::logic_error("unknown split strategy");
}

std::string history_to_tsv(const std::vector<nn::EpochStats>& history)
{
    std::ostringstream out;
    out << "epoch\tloss\taccuracy\n";
    for (const auto& h : history) out << h.epoch << '\t' << shortest(h.loss) << '\t' << shortest(h.accuracy) << '\n';
    return out.str();
}

TrainOutcome train_cell(const ExperimentConfig& config, const CellKey& cell,
                        const std::vector<dataset::Sample>& samples, std::ostream& log)
{
    if (samples.empty()) throw Error(ErrorKind::EmptyDataset, cell_name(cell) + ": no samples");
    const auto split = make_split(config, cell.split, samples);
    TrainOutcome outcome;
    outcome.n_train = split.train.size();
    outcome.n_test = split.test.size();
    for (const auto& w : split.warnings) {
        outcome.warnings.push_back(cell_name(cell) + ": " + w);
        log << "warning: " << cell_name(cell) << ": " << w << '\n';
    }
    if (split.train.empty()) throw Error(ErrorKind::EmptyDataset, cell_name(cell) + ": empty train partition");

    const SampleView view(samples, split.train);
    log << "train " << cell_name(cell) << ": " << split.train.size() << " train / " << split.test.size()
        << " test samples\n";
    outcome.result = nn::train(model_spec(config), view, config.train, [&](const nn::EpochStats& s) {
        log << "  epoch " << s.epoch << " loss " << shortest(s.loss) << " accuracy " << shortest(s.accuracy)
            << '\n';
    });
    return outcome;
}

ResultRow evaluate_cell(const ExperimentConfig& config, const CellKey& cell,
                        const std::vector<dataset::Sample>& samples, const nn::Params<float>& params)
{
    if (samples.empty()) throw Error(ErrorKind::EmptyTestSet, cell_name(cell) + ": no samples");
    const auto split = make_split(config, cell.split, samples);
    if (split.test.empty()) throw Error(ErrorKind::EmptyTestSet, cell_name(cell) + ": empty test partition");

    const nn::Network<float> net(model_spec(config), params);
    std::vector<int> predictions;
    std::vector<int> labels;
    for (std::size_t i : split.test) {
        predictions.push_back(net.predict(samples[i].tensor<float>()).label);
        labels.push_back(samples[i].label);
    }
    ResultRow row;
    row.strategy = cell.split;
    row.variant = cell.variant;
    row.horizon = cell.horizon;
    row.confusion = metrics::confusion(predictions, labels);
    row.n_train = split.train.size();
    row.n_test = split.test.size();
    return row;
}

TrainOutcome cmd_train(const ExperimentConfig& config, const CellKey& cell, std::ostream& log)
{
    check_config(config);
    const auto samples = dataset::read_dataset(manifest_path(config, cell.variant, cell.horizon));
    TrainOutcome outcome = train_cell(config, cell, samples, log);
    nn::save_checkpoint(checkpoint_path(config, cell), model_spec(config), outcome.result.params);
    io::write_file_atomic(history_path(config, cell), history_to_tsv(outcome.result.history));
    return outcome;
}

ResultRow cmd_evaluate(const ExperimentConfig& config, const CellKey& cell, const fs::path& checkpoint,
                       std::ostream& log)
{
    check_config(config);
    const auto params = nn::load_checkpoint(checkpoint, model_spec(config));
    const auto samples = dataset::read_dataset(manifest_path(config, cell.variant, cell.horizon));
    ResultRow row = evaluate_cell(config, cell, samples, params);
    io::write_file_atomic(config.out_dir / ("eval_" + cell_name(cell) + ".tsv"), results_to_tsv({row}));
    log << "evaluate " << cell_name(cell) << ": accuracy " << shortest(row.accuracy()) << " mcc "
        << shortest(row.mcc()) << " on " << row.n_test << " samples\n";
    return row;
}

std::pair<fs::path, fs::path> write_figures(const std::vector<ResultRow>& rows, const fs::path& dir)
{
    const fs::path horizon = dir / "accuracy_vs_horizon.svg";
    const fs::path split = dir / "split_comparison.svg";
    io::write_file_atomic(horizon, accuracy_vs_horizon_svg(rows));
    io::write_file_atomic(split, split_comparison_svg(rows));
    return {horizon, split};
}

MatrixOutcome cmd_matrix(const ExperimentConfig& config, std::ostream& log)
{
    check_config(config);
    MatrixOutcome outcome;
    for (imaging::Variant variant : config.variants) {
        for (int horizon : config.horizons) {
            std::vector<dataset::Sample> samples;
            std::string group_error;
            try {
                samples = collect_samples(config, variant, horizon, log);
                if (samples.empty()) group_error = "failed: SeriesTooShort: no ticker yields samples";
            } catch (const std::exception& e) {
                group_error = "failed: " + std::string(e.what());
            }
            for (dataset::SplitStrategy split : config.splits) {
                const CellKey cell{variant, horizon, split};
                ResultRow row;
                row.strategy = split;
                row.variant = variant;
                row.horizon = horizon;
                if (!group_error.empty()) {
                    row.status = one_line(group_error);
                } else {
                    try {
                        const TrainOutcome trained = train_cell(config, cell, samples, log);
                        io::write_file_atomic(history_path(config, cell), history_to_tsv(trained.result.history));
                        row = evaluate_cell(config, cell, samples, trained.result.params);
                    } catch (const std::exception& e) {
                        row.status = one_line("failed: " + std::string(e.what()));
                    }
                }
                if (!row.ok()) log << "cell " << cell_name(cell) << ": " << row.status << '\n';
                outcome.rows.push_back(std::move(row));
            }
        }
    }

    outcome.results = config.out_dir / "results.tsv";
    outcome.report = config.out_dir / "report.txt";
    io::write_file_atomic(outcome.results, results_to_tsv(outcome.rows));
    io::write_file_atomic(outcome.report,
                          report_text(outcome.rows, Provenance{config_hash(config), config.seed, code_version()}));
    std::tie(outcome.horizon_figure, outcome.split_figure) = write_figures(outcome.rows, config.out_dir);
    return outcome;
}

} // namespace stockcnn::experiment
