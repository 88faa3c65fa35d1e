#include "stockcnn/error.hpp"

namespace stockcnn {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::NonMonotonicDates: return "NonMonotonicDates";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NetworkError: return "NetworkError";
    case ErrorKind::HttpStatus: return "HttpStatus";
    case ErrorKind::PeriodTooLong: return "PeriodTooLong";
    case ErrorKind::WrongWindowLength: return "WrongWindowLength";
    case ErrorKind::MissingIndicators: return "MissingIndicators";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::OddDimension: return "OddDimension";
    case ErrorKind::MissingCache: return "MissingCache";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::SpecMismatch: return "SpecMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::int64_t detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message)
    , kind_(kind)
    , detail_(detail)
{
}

} // namespace stockcnn
