#pragma once

// Minimal SVG writers for report artifacts.

#include <span>
#include <string>
#include <vector>

#include "modlab/fuchsian.hpp"
#include "modlab/modulus.hpp"

namespace modlab {

/// Cells of the grid filled by value on a linear color ramp.
std::string svg_heatmap(const DiscretizedDomain& dom, std::span<const double> values, const std::string& title);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Log-log line plot; non-positive points are skipped.
std::string svg_loglog(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                       const std::string& ylabel);

/// Dirichlet domain rasterized on a resolution x resolution grid over the
/// disk; runs of inside pixels become single rectangles.
std::string svg_dirichlet(const DirichletDomain& dom, int resolution);

} // namespace modlab
