#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stockcnn/date.hpp"
#include "stockcnn/imaging.hpp"
#include "stockcnn/market_data.hpp"

namespace stockcnn::dataset {

/// Bars reserved before every rendered window so SMA-30 and the MACD signal
/// are defined at all 60 positions, whatever the variant.
inline constexpr std::size_t kWarmupBars = 60;
inline constexpr std::size_t kWindowBars = imaging::kWindowBars;
inline constexpr std::array<int, 5> kHorizons = {1, 20, 30, 60, 90};

/// A labelled chart window. The image is kept as 8-bit RGB; tensor()
/// produces the network input (3, H, W) in [0, 1].
struct Sample {
    imaging::Image image;
    int label = 0;
    std::string ticker;
    std::size_t end_index = 0;
    Date end_date;
    int horizon = 0;

    template <typename T>
    nn::Tensor<T> tensor() const
    {
        return imaging::image_to_tensor<T>(image);
    }
};

/// 1 if close[i+d] > close[i], else 0 (a tie counts as "no rise").
/// Throws Error{IndexOutOfRange} unless i + d < series length.
int label(const market_data::Series& series, std::size_t i, std::size_t d);

/// length - warmup - window - horizon + 1, or 0 when the series is too short.
std::size_t sample_count(std::size_t series_length, std::size_t horizon) noexcept;

/// One sample per end index i with warmup + window - 1 <= i and i + d < length.
/// Throws Error{SeriesTooShort}.
std::vector<Sample> build_samples(const market_data::Series& series, int horizon,
                                  const imaging::ChartStyle& style);

enum class SplitStrategy { Random, Automatic, Time };

std::string_view to_string(SplitStrategy s) noexcept;
std::optional<SplitStrategy> parse_split(std::string_view name) noexcept;

/// Disjoint index sets over the input samples, each sorted ascending.
struct SplitResult {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    SplitStrategy strategy = SplitStrategy::Time;
    std::variant<double, Date> parameter = 0.0;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> warnings;
};

/// |test| = round(test_ratio * n), chosen uniformly at random for the seed.
SplitResult split_random(std::size_t n, double test_ratio, std::uint64_t seed);

/// First floor(train_ratio * n) in input order train, the rest test.
SplitResult split_automatic(std::size_t n, double train_ratio);

/// end_date < cutoff -> train; otherwise test.
SplitResult split_time(std::span<const Date> end_dates, const Date& cutoff);
SplitResult split_time(std::span<const Sample> samples, const Date& cutoff);

/// True when train and test are disjoint, in range, and cover [0, n).
bool is_partition(const SplitResult& split, std::size_t n);

// ---------------------------------------------------------------------------
// Manifest + image store

/// One line of a dataset manifest.
struct ManifestRecord {
    std::string ticker;
    Date end_date;
    std::size_t end_index = 0;
    int horizon = 0;
    int label = 0;
    std::uint64_t offset = 0; // byte offset of the image in the store

    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct Manifest {
    imaging::Variant variant = imaging::Variant::NoVolume;
    int width = 0;
    int height = 0;
    std::string store; // image store file name, relative to the manifest
    std::vector<ManifestRecord> records;
};

std::string manifest_to_string(const Manifest& manifest);
Manifest parse_manifest(std::string_view text);

/// Writes `<stem>.tsv` and `<stem>.bin` under `dir` via temp-file + rename.
void write_dataset(const std::filesystem::path& dir, const std::string& stem,
                   imaging::Variant variant, std::span<const Sample> samples);

/// Loads a manifest and its images back into samples.
std::vector<Sample> read_dataset(const std::filesystem::path& manifest_path);

} // namespace stockcnn::dataset
