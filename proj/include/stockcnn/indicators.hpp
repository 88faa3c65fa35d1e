#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace stockcnn::indicators {

/// Aligned index-for-index with the source closes; nullopt during warmup.
using IndicatorSeries = std::vector<std::optional<double>>;

inline constexpr std::size_t kMacdFast = 12;
inline constexpr std::size_t kMacdSlow = 26;
inline constexpr std::size_t kMacdSignal = 9;

/// value[i] = mean(closes[i-n+1 ..= i]) for i >= n-1.
/// Throws Error{PeriodTooLong} if n > closes.size(); std::invalid_argument if n == 0.
IndicatorSeries sma(std::span<const double> closes, std::size_t n);

/// Seeded with the n-period SMA at i = n-1, then alpha = 2/(n+1).
IndicatorSeries ema(std::span<const double> closes, std::size_t n);

struct Macd {
    IndicatorSeries macd_line;
    IndicatorSeries signal_line;
    IndicatorSeries histogram;
};

/// MACD(12, 26, 9). Needs at least 26 closes; the signal line stays
/// undefined until 34 are available.
Macd macd(std::span<const double> closes);

/// Overlay inputs for the richest chart variants over a full series.
struct Bundle {
    IndicatorSeries sma5;
    IndicatorSeries sma10;
    IndicatorSeries sma30;
    Macd macd;
};

Bundle compute_bundle(std::span<const double> closes);

} // namespace stockcnn::indicators
