#include "odomap/map_gen.hpp"

#include <algorithm>

namespace odomap {

std::pair<Eigen::Index, Eigen::Index> trim_prefix_suffix(const PoseGraph& graph) {
    Eigen::Index first = graph.vertex_count();
    Eigen::Index last = -1;
    for (const auto& c : graph.constraints) {
        if (c.kind != ConstraintKind::loop_closing) continue;
        first = std::min({first, c.from, c.to});
        last = std::max({last, c.from, c.to});
    }
    if (last < 0) {
        throw std::runtime_error("trim_prefix_suffix: graph has no loop closures");
    }
    return {first, last};
}

std::pair<Eigen::Index, Eigen::Index> select_closing_pair(const LoopPairSet& pairs,
                                                          const OrientationProfile& profile,
                                                          double turn_tolerance,
                                                          bool* fell_back) {
    if (pairs.empty()) {
        throw std::runtime_error("select_closing_pair: empty pair set");
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (fell_back) *fell_back = false;

    const LoopPair* best = nullptr;
    for (const auto& p : pairs.pairs) {
        const double turn = std::abs(profile.orientations(p.j) - profile.orientations(p.i));
        if (std::abs(turn - two_pi) > turn_tolerance) continue;
        if (!best || p.i < best->i || (p.i == best->i && p.j < best->j)) best = &p;
    }
    if (best) return {best->i, best->j};

    // No full-turn pair: fall back to the pair whose separation is closest
    // to the median separation, our best estimate of one lap length.
    if (fell_back) *fell_back = true;
    std::vector<double> separations;
    separations.reserve(pairs.size());
    for (const auto& p : pairs.pairs) {
        separations.push_back(profile.arclengths(p.j) - profile.arclengths(p.i));
    }
    std::vector<double> sorted = separations;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                     sorted.end());
    const double median = sorted[sorted.size() / 2];

    std::size_t pick = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double gap = std::abs(separations[k] - median);
        if (gap < best_gap ||
            (gap == best_gap && pairs.pairs[k].i < pairs.pairs[pick].i)) {
            best_gap = gap;
            pick = k;
        }
    }
    return {pairs.pairs[pick].i, pairs.pairs[pick].j};
}

MapEstimate close_polygon(const PoseGraph& graph, std::pair<Eigen::Index, Eigen::Index> pair) {
    const auto [i, j] = pair;
    if (i < 0 || j > graph.vertex_count() || i >= j) {
        throw std::invalid_argument("close_polygon: invalid pair");
    }
    if (j - i < 3) {
        throw std::runtime_error("close_polygon: fewer than 3 vertices between the pair");
    }
    std::vector<Vec2d> vertices;
    vertices.reserve(static_cast<std::size_t>(j - i));
    for (Eigen::Index v = i; v < j; ++v) {
        vertices.push_back(graph.vertices[static_cast<std::size_t>(v)].position());
    }

    MapEstimate estimate{Polygon2d::from_vertices(vertices), pair, i,
                         graph.vertex_count() - j, false, false};
    const Vec2d gap = graph.vertices[static_cast<std::size_t>(i)].position() -
                      graph.vertices[static_cast<std::size_t>(j)].position();
    estimate.closure_gap_warning = gap.norm() > kClosureGapWarning;
    estimate.self_intersection_warning = !polygon_is_simple(estimate.polygon);
    return estimate;
}

}  // namespace odomap
