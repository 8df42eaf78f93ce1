#pragma once

#include <filesystem>
#include <vector>

namespace fracpath {

enum class PlotKind { diagram, profile };

/// Renders branch CSVs (diagram: mu vs norm2, thick = stable, event markers)
/// or snapshot CSVs (profile: x vs u) into an SVG figure plus an equivalent
/// gnuplot script with the same stem and a .gp extension.
void emit_plot(const std::vector<std::filesystem::path>& inputs, PlotKind kind,
               const std::filesystem::path& out_svg);

}  // namespace fracpath
