#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stockcnn/dataset.hpp"
#include "stockcnn/date.hpp"
#include "stockcnn/imaging.hpp"
#include "stockcnn/nn/train.hpp"

namespace stockcnn::experiment {

/// Everything a pipeline run depends on. Defaults reproduce the 2014-2019
/// training/testing calendar with a 2019-01-01 time cutoff.
struct ExperimentConfig {
    std::filesystem::path data_dir = "data";
    std::string endpoint;
    std::vector<std::string> tickers;

    Date train_start = make_date(2014, 12, 31);
    Date train_end = make_date(2018, 12, 31);
    Date test_start = make_date(2019, 1, 1);
    Date test_end = make_date(2019, 12, 31);

    std::vector<int> horizons = {1, 20, 30, 60, 90};
    std::vector<imaging::Variant> variants = {imaging::kAllVariants.begin(), imaging::kAllVariants.end()};
    std::vector<dataset::SplitStrategy> splits = {dataset::SplitStrategy::Time};
    double test_ratio = 0.2;  // random split
    double train_ratio = 0.8; // automatic split
    std::optional<Date> cutoff; // time split; test_start when unset
    std::uint64_t seed = 42;

    nn::TrainConfig train;
    int width = 96;
    int height = 96;

    std::filesystem::path out_dir = "out";
    bool force = false;

    Date time_cutoff() const { return cutoff.value_or(test_start); }
};

/// `key = value` lines, `#` comments, comma-separated lists.
/// Throws Error{Config} naming the offending line.
ExperimentConfig parse_config(std::string_view text);

/// Reads a config file; relative paths inside it resolve against its directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws Error{Config} if dates, horizons, ratios or sizes are invalid.
void check_config(const ExperimentConfig& config);

/// Canonical `key = value` rendering; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

} // namespace stockcnn::experiment
