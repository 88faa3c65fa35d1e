#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "stockcnn/date.hpp"
#include "stockcnn/market_data.hpp"
#include "stockcnn/rng.hpp"

namespace testing_support {

using stockcnn::Date;
using stockcnn::market_data::Bar;
using stockcnn::market_data::Series;

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() /
                ("stockcnn_test_" + name + "_" + std::to_string(::getpid())))
    {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

/// Weekday calendar starting at `first` (skips Saturdays and Sundays).
inline std::vector<Date> trading_days(Date first, std::size_t n)
{
    std::vector<Date> out;
    Date d = first;
    while (out.size() < n) {
        const std::chrono::weekday wd{std::chrono::sys_days{d}};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
        d = stockcnn::add_days(d, 1);
    }
    return out;
}

/// Geometric random walk with valid OHLC and volume. `drift` is the mean
/// daily log return.
inline Series random_walk(std::size_t n, std::uint64_t seed, double drift = 0.0, double vol = 0.02,
                          Date first = stockcnn::make_date(2015, 1, 2), std::string ticker = "SYN")
{
    stockcnn::Rng rng(seed);
    Series s;
    s.ticker = std::move(ticker);
    double close = 100.0;
    for (const Date& d : trading_days(first, n)) {
        const double open = close * std::exp(vol * 0.3 * rng.normal());
        close = close * std::exp(drift + vol * rng.normal());
        const double hi = std::max(open, close) * (1.0 + vol * 0.5 * rng.uniform());
        const double lo = std::min(open, close) * (1.0 - vol * 0.5 * rng.uniform());
        s.bars.push_back(Bar{d, open, hi, lo, close, close, 1000 + rng.below(100000)});
    }
    return s;
}

} // namespace testing_support
