#include "odomap/segmentation.hpp"

#include <cstdio>
#include <fstream>

namespace odomap {

double line_fit_error(const std::vector<Vec2d>& subset) {
    const std::size_t n = subset.size();
    if (n < 3) return 0.0;
    const Vec2d& first = subset.front();
    const Vec2d& last = subset.back();
    const double chord = (last - first).norm();
    double sum = 0.0;
    if (chord <= 1e-12) {
        // Closed-back-on-itself subset: fall back to distance from the point.
        for (std::size_t i = 1; i + 1 < n; ++i) sum += (subset[i] - first).norm();
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            sum += point_line_distance(subset[i], first, last);
        }
    }
    return sum / static_cast<double>(n - 2);
}

DominantPointSet segment_path(const Points2d& trace, const SegmentationConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = trace.cols();
    if (n < 2) {
        throw std::invalid_argument("segment_path: need at least 2 trace points");
    }

    DominantPointSet dp;
    dp.points.push_back(trace.col(0));
    dp.source_indices.push_back(0);

    std::vector<Vec2d> subset{trace.col(0)};
    std::vector<Eigen::Index> subset_idx{0};

    for (Eigen::Index k = 1; k < n; ++k) {
        const Vec2d x = trace.col(k);
        const double d = (dp.points.back() - x).norm();
        if (d < cfg.min_length) {
            subset.push_back(x);
            subset_idx.push_back(k);
            continue;
        }
        subset.push_back(x);
        subset_idx.push_back(k);
        if (line_fit_error(subset) < cfg.max_mean_error) {
            continue;
        }
        // Split: the point before the offending one becomes dominant and
        // starts the next subset together with the new point.
        const Vec2d split_pt = subset[subset.size() - 2];
        const Eigen::Index split_idx = subset_idx[subset.size() - 2];
        dp.points.push_back(split_pt);
        dp.source_indices.push_back(split_idx);
        subset = {split_pt, x};
        subset_idx = {split_idx, k};
    }

    // The trace end always closes the last segment.
    if ((trace.col(n - 1) - dp.points.back()).norm() > 1e-12) {
        dp.points.push_back(trace.col(n - 1));
        dp.source_indices.push_back(n - 1);
    }
    return dp;
}

std::vector<Pose2d> poses_from_dominant_points(const DominantPointSet& dp) {
    if (dp.size() < 2) {
        throw std::invalid_argument("poses_from_dominant_points: need at least 2 points");
    }
    std::vector<Pose2d> poses;
    poses.reserve(static_cast<std::size_t>(dp.size()) - 1);
    for (std::size_t i = 0; i + 1 < dp.points.size(); ++i) {
        const Vec2d v = dp.points[i + 1] - dp.points[i];
        poses.emplace_back(dp.points[i].x(), dp.points[i].y(), std::atan2(v.y(), v.x()));
    }
    return poses;
}

void save_dominant_points_csv(const DominantPointSet& dp, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error(file.string() + ": cannot write dominant points");
    out << "x,y,source_index\n";
    char buf[96];
    for (std::size_t i = 0; i < dp.points.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%lld\n", dp.points[i].x(), dp.points[i].y(),
                      static_cast<long long>(dp.source_indices[i]));
        out << buf;
    }
}

}  // namespace odomap
