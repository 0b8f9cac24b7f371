#pragma once

#include "odomap/evaluation.hpp"
#include "odomap/geometry.hpp"
#include "odomap/segmentation.hpp"

#include <filesystem>
#include <vector>

namespace odomap {

/// Trace polyline with dominant points drawn as red dots.
void render_path_svg(const std::vector<Pose2d>& trace, const DominantPointSet& dp,
                     const std::filesystem::path& file);

/// Correlation error heatmap on a log scale; non-comparable entries stay
/// blank. Large matrices are block-averaged down to at most 256x256 tiles.
void render_heatmap_svg(const Eigen::MatrixXd& correlation, const std::filesystem::path& file);

/// Raw path next to the closed map polygon.
void render_before_after_svg(const std::vector<Pose2d>& raw, const Polygon2d& map,
                             const std::filesystem::path& file);

/// Truth and transformed estimate overlaid, with their symmetric difference
/// shaded light blue.
void render_overlay_svg(const Polygon2d& truth, const Polygon2d& estimate,
                        const std::filesystem::path& file, double raster_resolution = 0.05);

}  // namespace odomap
