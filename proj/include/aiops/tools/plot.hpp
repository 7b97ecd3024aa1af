#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "aiops/domain/types.hpp"
#include "aiops/tools/registry.hpp"

namespace aiops::tools {

/// FILE-plot-<metric>-<floor(start)>-<floor(end)>.<ext>
std::string plot_file_name(std::string_view metric, double start, double end, PlotFormat format);

/// Line chart of `points` with axes and tick marks. Throws std::runtime_error
/// on I/O failure and std::invalid_argument for fewer than one point.
void write_line_chart(const std::filesystem::path& path, std::span<const Sample> points, PlotFormat format);

}  // namespace aiops::tools
