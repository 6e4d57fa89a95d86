#pragma once

#include <string>
#include <utility>
#include <vector>

namespace conj1d {

/// Minimal SVG 1.1 line plot: axes, one sampled curve, circle markers.
/// viewBox is normalized to the data bounding box with 5% padding.
std::string svg_plot(const std::vector<std::pair<double, double>>& curve,
                     const std::vector<std::pair<double, double>>& markers,
                     const std::string& x_label = "x", const std::string& y_label = "h");

}  // namespace conj1d
