#pragma once

#include <cstdint>
#include <span>

namespace stockcnn::metrics {

/// Binary confusion counts; class 1 ("rise") is the positive class.
struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }

    /// Same predictions with the roles of class 0 and class 1 exchanged.
    Confusion swapped() const noexcept { return {tn, fn, tp, fp}; }

    friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Throws Error{LengthMismatch | EmptyInput}; std::invalid_argument on a
/// class outside {0, 1}.
Confusion confusion(std::span<const int> predictions, std::span<const int> labels);

// Any zero denominator yields 0.
double sensitivity(const Confusion& c) noexcept;
double specificity(const Confusion& c) noexcept;
double accuracy(const Confusion& c) noexcept;
double mcc(const Confusion& c) noexcept;

} // namespace stockcnn::metrics
