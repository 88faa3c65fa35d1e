#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stockcnn/dataset.hpp"
#include "stockcnn/experiment/config.hpp"
#include "stockcnn/experiment/report.hpp"
#include "stockcnn/nn/train.hpp"

namespace stockcnn::experiment {

const char* code_version() noexcept;

/// One point of the variant x horizon x split grid.
struct CellKey {
    imaging::Variant variant = imaging::Variant::MacdMa;
    int horizon = 20;
    dataset::SplitStrategy split = dataset::SplitStrategy::Time;
};

/// "<variant>_h<horizon>", shared by manifests, checkpoints and histories.
std::string dataset_stem(imaging::Variant variant, int horizon);
std::filesystem::path manifest_path(const ExperimentConfig& config, imaging::Variant variant, int horizon);
std::filesystem::path checkpoint_path(const ExperimentConfig& config, const CellKey& cell);
std::filesystem::path history_path(const ExperimentConfig& config, const CellKey& cell);

using TickerError = std::pair<std::string, std::string>;

struct FetchOutcome {
    std::vector<std::string> downloaded;
    std::vector<std::string> skipped; // already on disk
    std::vector<TickerError> failed;
};

/// Downloads `<data_dir>/<ticker>.csv` for each ticker missing one (all of
/// them with force). A failing ticker is recorded and the batch continues.
FetchOutcome cmd_fetch(const ExperimentConfig& config, std::ostream& log);

/// Samples of every ticker for one variant/horizon, tickers concatenated in
/// config order. Tickers that cannot be used land in `skipped`.
std::vector<dataset::Sample> collect_samples(const ExperimentConfig& config, imaging::Variant variant,
                                             int horizon, std::ostream& log,
                                             std::vector<TickerError>* skipped = nullptr);

struct BuildOutcome {
    std::vector<std::filesystem::path> manifests;
    std::vector<TickerError> skipped;
    std::size_t samples = 0;
};

/// Writes a manifest + image store per (variant, horizon).
BuildOutcome cmd_build(const ExperimentConfig& config, std::ostream& log);

dataset::SplitResult make_split(const ExperimentConfig& config, dataset::SplitStrategy strategy,
                                std::span<const dataset::Sample> samples);

/// nn input source over a subset of samples.
class SampleView final : public nn::SampleSource<float> {
public:
    SampleView(const std::vector<dataset::Sample>& samples, std::vector<std::size_t> indices)
        : samples_(samples)
        , indices_(std::move(indices))
    {
    }
    std::size_t size() const override { return indices_.size(); }
    int label(std::size_t i) const override { return samples_[indices_[i]].label; }
    nn::Tensor<float> input(std::size_t i) const override { return samples_[indices_[i]].tensor<float>(); }

private:
    const std::vector<dataset::Sample>& samples_;
    std::vector<std::size_t> indices_;
};

std::string history_to_tsv(const std::vector<nn::EpochStats>& history);

struct TrainOutcome {
    nn::TrainResult<float> result;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<std::string> warnings;
};

/// Trains one cell on in-memory samples. Throws Error{EmptyDataset | NonFiniteLoss}.
TrainOutcome train_cell(const ExperimentConfig& config, const CellKey& cell,
                        const std::vector<dataset::Sample>& samples, std::ostream& log);

/// Predicts the test partition in eval mode. Throws Error{EmptyTestSet}.
ResultRow evaluate_cell(const ExperimentConfig& config, const CellKey& cell,
                        const std::vector<dataset::Sample>& samples, const nn::Params<float>& params);

/// Reads the cell's manifest, trains, writes checkpoint + history.
TrainOutcome cmd_train(const ExperimentConfig& config, const CellKey& cell, std::ostream& log);

/// Reads the manifest and checkpoint, scores the test partition, writes
/// `<out_dir>/eval_<stem>_<split>.tsv`. Throws Error{SpecMismatch | EmptyTestSet}.
ResultRow cmd_evaluate(const ExperimentConfig& config, const CellKey& cell,
                       const std::filesystem::path& checkpoint, std::ostream& log);

struct MatrixOutcome {
    std::vector<ResultRow> rows;
    std::filesystem::path results;
    std::filesystem::path report;
    std::filesystem::path horizon_figure;
    std::filesystem::path split_figure;
};

/// Runs build/train/evaluate for every grid cell; failures are recorded per
/// cell. Writes results.tsv, report.txt and two SVG figures to out_dir.
MatrixOutcome cmd_matrix(const ExperimentConfig& config, std::ostream& log);

/// Regenerates the two figures from a stored results table.
std::pair<std::filesystem::path, std::filesystem::path> write_figures(const std::vector<ResultRow>& rows,
                                                                      const std::filesystem::path& dir);

} // namespace stockcnn::experiment
