#pragma once

#include "odomap/loop_closure.hpp"
#include "odomap/pose_graph.hpp"

#include <utility>

namespace odomap {

/// Closed polygon map extracted from an optimized pose graph.
struct MapEstimate {
    Polygon2d polygon;
    std::pair<Eigen::Index, Eigen::Index> closing_pair{0, 0};
    Eigen::Index trimmed_prefix = 0; // vertices discarded before the closing pair
    Eigen::Index trimmed_suffix = 0; // vertices discarded after it
    bool closure_gap_warning = false;     // pair endpoints far apart after optimization
    bool self_intersection_warning = false;
};

/// Default tolerance for recognizing one whole boundary turn, radians.
inline constexpr double kDefaultTurnTolerance = 0.35;

/// Threshold on the optimized gap between the identified pair, meters.
inline constexpr double kClosureGapWarning = 0.5;

/// Range [first, last] of vertices touched by any loop-closing constraint;
/// everything outside never received a closure and stays unoptimized.
std::pair<Eigen::Index, Eigen::Index> trim_prefix_suffix(const PoseGraph& graph);

/// First pair (smallest i) whose cumulative orientation difference is one
/// whole turn within the tolerance. When no pair represents a full turn the
/// pair whose arclength separation is closest to the median separation is
/// returned and *fell_back is set.
std::pair<Eigen::Index, Eigen::Index> select_closing_pair(const LoopPairSet& pairs,
                                                          const OrientationProfile& profile,
                                                          double turn_tolerance = kDefaultTurnTolerance,
                                                          bool* fell_back = nullptr);

/// Identifies the pair's endpoints: the polygon keeps the optimized
/// positions of vertices i..j-1 and vertex j collapses onto vertex i.
MapEstimate close_polygon(const PoseGraph& graph, std::pair<Eigen::Index, Eigen::Index> pair);

}  // namespace odomap
