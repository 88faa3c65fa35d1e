#include "stockcnn/indicators.hpp"

#include <stdexcept>
#include <string>

#include "stockcnn/error.hpp"

namespace stockcnn::indicators {

namespace {

void check_period(std::span<const double> closes, std::size_t n)
{
    if (n == 0) throw std::invalid_argument("indicator period must be >= 1");
    if (n > closes.size()) {
        throw Error(ErrorKind::PeriodTooLong, "period " + std::to_string(n) + " exceeds " +
                                                  std::to_string(closes.size()) + " values");
    }
}

} // namespace

IndicatorSeries sma(std::span<const double> closes, std::size_t n)
{
    check_period(closes, n);
    IndicatorSeries out(closes.size());
    // Each window is summed directly rather than with a running sum so that
    // values do not depend on the history of the series.
    for (std::size_t i = n - 1; i < closes.size(); ++i) {
        double sum = 0.0;
        for (std::size_t k = i + 1 - n; k <= i; ++k) sum += closes[k];
        out[i] = sum / static_cast<double>(n);
    }
    return out;
}

IndicatorSeries ema(std::span<const double> closes, std::size_t n)
{
    check_period(closes, n);
    IndicatorSeries out(closes.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += closes[k];
    double value = sum / static_cast<double>(n);
    out[n - 1] = value;
    const double alpha = 2.0 / (static_cast<double>(n) + 1.0);
    for (std::size_t i = n; i < closes.size(); ++i) {
        value = alpha * closes[i] + (1.0 - alpha) * value;
        out[i] = value;
    }
    return out;
}

Macd macd(std::span<const double> closes)
{
    const IndicatorSeries fast = ema(closes, kMacdFast);
    const IndicatorSeries slow = ema(closes, kMacdSlow);

    Macd out;
    out.macd_line.resize(closes.size());
    out.signal_line.resize(closes.size());
    out.histogram.resize(closes.size());

    std::vector<double> defined;
    const std::size_t first = kMacdSlow - 1;
    for (std::size_t i = first; i < closes.size(); ++i) {
        const double v = *fast[i] - *slow[i];
        out.macd_line[i] = v;
        defined.push_back(v);
    }
    if (defined.size() < kMacdSignal) return out;

    const IndicatorSeries signal = ema(defined, kMacdSignal);
    for (std::size_t k = 0; k < signal.size(); ++k) {
        if (!signal[k]) continue;
        const std::size_t i = first + k;
        out.signal_line[i] = *signal[k];
        out.histogram[i] = *out.macd_line[i] - *signal[k];
    }
    return out;
}

Bundle compute_bundle(std::span<const double> closes)
{
    return Bundle{sma(closes, 5), sma(closes, 10), sma(closes, 30), macd(closes)};
}

} // namespace stockcnn::indicators
