#pragma once

#include "odomap/geometry.hpp"

#include <filesystem>
#include <vector>

namespace odomap {

struct SegmentationConfig {
    double min_length = 0.1;      // meters between dominant points
    double max_mean_error = 0.001; // mean chord distance that forces a split

    void validate() const {
        if (min_length <= 0 || max_mean_error <= 0) {
            throw std::invalid_argument("SegmentationConfig: parameters must be > 0");
        }
    }
};

/// Pruned polyline: every dominant point is one of the input trace points.
struct DominantPointSet {
    std::vector<Vec2d> points;
    std::vector<Eigen::Index> source_indices;

    Eigen::Index size() const { return static_cast<Eigen::Index>(points.size()); }
};

/// Mean perpendicular distance of the interior points of a subset to the
/// chord from its first to its last point. Subsets with fewer than 3 points
/// have no interior and report zero error.
double line_fit_error(const std::vector<Vec2d>& subset);

/// Greedy straight-line pruning. Points closer than min_length to the last
/// dominant point extend the current subset unchecked; beyond that, the
/// subset is kept while its mean chord distance stays below max_mean_error
/// and split at the previous point otherwise. The final trace point is
/// always emitted as the last dominant point.
DominantPointSet segment_path(const Points2d& trace, const SegmentationConfig& cfg);

/// Dominant points become poses: pose i sits on point i and heads toward
/// point i+1, so the final dominant point generates no pose.
std::vector<Pose2d> poses_from_dominant_points(const DominantPointSet& dp);

/// CSV export with header x,y,source_index.
void save_dominant_points_csv(const DominantPointSet& dp, const std::filesystem::path& file);

}  // namespace odomap
