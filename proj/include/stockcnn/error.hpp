#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stockcnn {

enum class ErrorKind {
    // market data
    MalformedRow,
    NonMonotonicDates,
    EmptyInput,
    NetworkError,
    HttpStatus,
    // indicators / imaging / dataset
    PeriodTooLong,
    WrongWindowLength,
    MissingIndicators,
    IndexOutOfRange,
    SeriesTooShort,
    // nn
    ShapeMismatch,
    OddDimension,
    MissingCache,
    EmptyDataset,
    NonFiniteLoss,
    SpecMismatch,
    // metrics / evaluation
    LengthMismatch,
    EmptyTestSet,
    // plumbing
    Config,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the whole library. `detail` carries the
// kind-specific number (1-based line for CSV errors, HTTP status code,
// epoch for divergence); zero when unused.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::int64_t detail = 0);

    ErrorKind kind() const noexcept { return kind_; }
    std::int64_t detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::int64_t detail_;
};

} // namespace stockcnn
