#pragma once

#include <string>
#include <vector>

#include "stockcnn/experiment/report.hpp"

namespace stockcnn::experiment {

/// Accuracy against horizon, one line per variant, for the headline split
/// (time if present, else the first split in the table).
std::string accuracy_vs_horizon_svg(const std::vector<ResultRow>& rows);

/// Grouped bars: one group per (variant, horizon), one bar per split.
std::string split_comparison_svg(const std::vector<ResultRow>& rows);

} // namespace stockcnn::experiment
