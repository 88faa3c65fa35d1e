#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stockcnn/dataset.hpp"
#include "stockcnn/imaging.hpp"
#include "stockcnn/metrics.hpp"

namespace stockcnn::experiment {

/// One experiment-grid cell. Metrics are always derived from `confusion`.
struct ResultRow {
    dataset::SplitStrategy strategy = dataset::SplitStrategy::Time;
    imaging::Variant variant = imaging::Variant::NoVolume;
    int horizon = 0;
    metrics::Confusion confusion;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::string status = "ok"; // "ok" or "failed: <reason>"

    bool ok() const noexcept { return status == "ok"; }
    double sensitivity() const noexcept { return metrics::sensitivity(confusion); }
    double specificity() const noexcept { return metrics::specificity(confusion); }
    double accuracy() const noexcept { return metrics::accuracy(confusion); }
    double mcc() const noexcept { return metrics::mcc(confusion); }

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr std::string_view kResultColumns =
    "strategy\tvariant\thorizon\ttp\tfp\ttn\tfn\tsensitivity\tspecificity\taccuracy\tmcc\tn_train\tn_test\tstatus";

/// Tab-separated, header row first, fixed column order. Failed cells print
/// "NA" for counts and metrics.
std::string results_to_tsv(const std::vector<ResultRow>& rows);

/// Inverse of results_to_tsv (metric columns are recomputed, not read).
/// Throws Error{MalformedRow}.
std::vector<ResultRow> parse_results_tsv(std::string_view text);

/// Stored metric text must equal the value recomputed from the counts; used
/// by tests and `stockcnn figures` to reject hand-edited tables.
bool metrics_consistent(std::string_view tsv, double tolerance = 1e-12);

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string code_version;
};

/// Human-readable summary: provenance, leakage warnings, per-cell lines.
std::string report_text(const std::vector<ResultRow>& rows, const Provenance& provenance);

/// Printed for any report containing random or automatic split cells.
inline constexpr std::string_view kLeakageWarning =
    "WARNING: random and automatic splits place overlapping 60-bar windows from the same dates in "
    "both train and test, so the model can be scored on periods it has already seen; treat their "
    "accuracy as optimistic.";

/// Printed for time split cells.
inline constexpr std::string_view kLookaheadNote =
    "NOTE: time split assigns samples by window end date; labels of training windows ending "
    "within `horizon` bars of the cutoff are computed from closes on or after the cutoff.";

} // namespace stockcnn::experiment
