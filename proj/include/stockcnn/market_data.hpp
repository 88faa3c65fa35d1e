#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stockcnn/date.hpp"

namespace stockcnn::market_data {

inline constexpr std::string_view kCsvHeader = "Date,Open,High,Low,Close,Adj Close,Volume";

/// One trading day of OHLCV data.
struct Bar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    std::optional<double> adj_close;
    std::uint64_t volume = 0;

    friend bool operator==(const Bar&, const Bar&) = default;
};

/// Per-ticker bars with strictly increasing dates. Gaps between dates are
/// expected (weekends, holidays, halts).
struct Series {
    std::string ticker;
    std::vector<Bar> bars;

    std::size_t size() const noexcept { return bars.size(); }
    std::vector<double> closes() const;

    friend bool operator==(const Series&, const Series&) = default;
};

struct Violation {
    std::size_t bar_index = 0;
    std::string rule;

    friend bool operator==(const Violation&, const Violation&) = default;
};

namespace rules {
inline constexpr std::string_view kHighAboveBody = "high≥max(open,close)";
inline constexpr std::string_view kLowBelowBody = "low≤min(open,close)";
inline constexpr std::string_view kHighAboveLow = "high≥low";
inline constexpr std::string_view kPositivePrices = "prices>0";
} // namespace rules

/// Parses the Yahoo historical-download CSV layout. Only structure and date
/// order are enforced here; price invariants are left to validate().
/// Throws Error{MalformedRow | NonMonotonicDates | EmptyInput}, detail = 1-based line.
Series parse_csv(std::string_view text, std::string ticker = {});

std::string serialize_csv(const Series& series);

/// Every Bar-invariant violation, in bar order. Never throws.
std::vector<Violation> validate(const Series& series);

Series load_csv(const std::filesystem::path& path, std::string ticker);

/// GET `<endpoint>?symbol=<ticker>&start=<date>&end=<date>` and parse the body.
/// Bars outside [start, end] are dropped.
/// Throws Error{NetworkError | HttpStatus(code)} before any parse error.
Series fetch_remote(const std::string& ticker, const Date& start, const Date& end,
                    const std::string& endpoint);

} // namespace stockcnn::market_data
