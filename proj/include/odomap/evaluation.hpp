#pragma once

#include "odomap/geometry.hpp"
#include "odomap/loop_closure.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace odomap {

/// Rigid planar transform y = R(angle) x + translation.
struct RigidTransform2D {
    double angle = 0.0;
    Vec2d translation = Vec2d::Zero();

    Vec2d apply(const Vec2d& p) const {
        return Eigen::Rotation2Dd(angle) * p + translation;
    }
    Polygon2d apply(const Polygon2d& poly) const {
        Points2d v = Eigen::Rotation2Dd(angle).toRotationMatrix() * poly.vertices();
        v.colwise() += translation;
        return Polygon2d(std::move(v));
    }
};

struct AlignmentConfig {
    double raster_resolution = 0.05; // meters per cell
    double gd_step0 = 0.5;           // initial descent step, meters
    int gd_max_iters = 500;
    double fd_epsilon_cells = 2.0;   // finite-difference step in raster cells
    double match_lnh_fraction = 0.3; // matching window as a perimeter fraction
    int match_samples = 100;
    double match_threshold = 1.0;
    int coarse_angles = 72;          // rotation sweep fallback resolution

    void validate() const {
        if (raster_resolution <= 0 || gd_step0 <= 0 || gd_max_iters <= 0 ||
            fd_epsilon_cells <= 0 || match_lnh_fraction <= 0 || match_samples < 2 ||
            match_threshold <= 0 || coarse_angles < 4) {
            throw std::invalid_argument("AlignmentConfig: invalid parameters");
        }
    }
};

/// Raised when boundary shape matching finds no correspondences (featureless
/// shapes); callers fall back to an exhaustive rotation search.
struct NoBoundaryMatches : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matches vertices of two closed boundaries by comparing grounded
/// orientation windows across the polygons' periodic profiles; returns
/// (estimate point, truth point) pairs at cross-correlation local minima.
std::vector<std::pair<Vec2d, Vec2d>> match_boundary_points(const Polygon2d& estimate,
                                                           const Polygon2d& truth,
                                                           const CorrelationConfig& cfg);

/// Closed-form least-squares rigid transform (no scale) taking the first
/// point of each pair onto the second.
RigidTransform2D align_horn(const std::vector<std::pair<Vec2d, Vec2d>>& pairs);

/// One minus the intersection-over-union of the enclosed areas, computed by
/// even-odd scanline rasterization over the joint bounding box.
double area_deviation(const Polygon2d& estimate, const Polygon2d& truth,
                      double raster_resolution = 0.05);

struct EvaluationReport {
    double delta_a = 1.0;
    RigidTransform2D transform;   // applied to the estimate
    double horn_delta_a = 1.0;    // deviation at the initial alignment
    int iterations = 0;           // refinement iterations
    bool horn_initialized = false;
};

/// Aligns the estimate onto the truth (shape matching + Horn when possible,
/// otherwise a rotation sweep) and refines rotation and translation by
/// finite-difference gradient descent on the area deviation. The refined
/// deviation never exceeds the initial one.
EvaluationReport evaluate_map(const Polygon2d& estimate, const Polygon2d& truth,
                              const AlignmentConfig& cfg = {});

void save_evaluation_json(const EvaluationReport& report, const std::filesystem::path& file);

}  // namespace odomap
