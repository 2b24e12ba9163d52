#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace harvest {

enum class PlotKind {
    ValueVsX,          // columns x, regime, value: one line per regime
    JVsN,              // columns n, mean, stderr: line with 2-stderr bars
    ResidualHeatline,  // columns x, regime, residual: one colored strip per regime
};

PlotKind parse_plot_kind(std::string_view name);

/// Renders a CSV table (header row, numeric data) as a standalone SVG.
/// Columns are picked by name. Throws EmptyTable without data rows.
std::string emit_plot(const std::string& csv, PlotKind kind, const std::string& title = "");

void write_plot(const std::filesystem::path& out, const std::string& csv, PlotKind kind,
                const std::string& title = "");

}  // namespace harvest
