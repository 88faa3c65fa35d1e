#include "stockcnn/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "stockcnn/error.hpp"

namespace stockcnn::metrics {

Confusion confusion(std::span<const int> predictions, std::span<const int> labels)
{
    if (predictions.size() != labels.size()) {
        throw Error(ErrorKind::LengthMismatch, std::to_string(predictions.size()) +
                                                   " predictions vs " +
                                                   std::to_string(labels.size()) + " labels");
    }
    if (labels.empty()) throw Error(ErrorKind::EmptyInput, "no predictions to score");

    Confusion c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int p = predictions[i];
        const int y = labels[i];
        if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
            throw std::invalid_argument("classes must be 0 or 1");
        }
        if (p == 1) {
            ++(y == 1 ? c.tp : c.fp);
        } else {
            ++(y == 0 ? c.tn : c.fn);
        }
    }
    return c;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) noexcept
{
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

double sensitivity(const Confusion& c) noexcept { return ratio(c.tp, c.tp + c.fn); }

double specificity(const Confusion& c) noexcept { return ratio(c.tn, c.tn + c.fp); }

double accuracy(const Confusion& c) noexcept { return ratio(c.tp + c.tn, c.total()); }

double mcc(const Confusion& c) noexcept
{
    const auto tp = static_cast<double>(c.tp);
    const auto fp = static_cast<double>(c.fp);
    const auto tn = static_cast<double>(c.tn);
    const auto fn = static_cast<double>(c.fn);
    const double a = tp + fp;
    const double b = tp + fn;
    const double d = tn + fp;
    const double e = tn + fn;
    if (a == 0.0 || b == 0.0 || d == 0.0 || e == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(a * b * d * e);
}

} // namespace stockcnn::metrics
