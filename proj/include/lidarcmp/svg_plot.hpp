#pragma once

#include <string>

#include <json.hpp>

namespace lidarcmp::svg {

/// Renders a report (the JSON form written by the harness) into a
/// self-contained SVG. Throws PreconditionError when the report's type does
/// not match the requested plot kind or the report is empty.
std::string sensitivity_curves(const nlohmann::json& sweep_report);
std::string accuracy_heatmap(const nlohmann::json& accuracy_report);
std::string timing_bars(const nlohmann::json& timing_report);
std::string distribution_hist(const nlohmann::json& pairwise_report);

/// Dispatch by kind name: sensitivity_curves, accuracy_heatmap, timing_bars,
/// distribution_hist.
std::string render(const nlohmann::json& report, const std::string& kind);

}  // namespace lidarcmp::svg
