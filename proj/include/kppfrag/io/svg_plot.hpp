#pragma once

#include <filesystem>
#include <string>

#include "kppfrag/grid.hpp"

namespace kppfrag::io {

/// 1D: m and theta overlaid on one 800x500 panel, with the nodes where
/// m > kappa/2 shaded. 2D: two 800x500 heat-map panels side by side (m left,
/// theta right) sharing the colour scale [0, max(kappa, max theta)].
/// Coordinates are printed with three decimals, so equal inputs give equal
/// bytes.
std::string render_plot_svg(const ResourceField& m, const ScalarField& theta,
                            const std::string& title = {});

void emit_plot(const ResourceField& m, const ScalarField& theta,
               const std::filesystem::path& path, const std::string& title = {});

}  // namespace kppfrag::io
