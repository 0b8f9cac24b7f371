#pragma once

#include "odomap/geometry.hpp"
#include "odomap/loop_closure.hpp"
#include "odomap/sim.hpp"

#include <filesystem>
#include <vector>

namespace odomap {

enum class ConstraintKind { odometric, loop_closing };

/// Relative-pose edge with a diagonal covariance (m^2, m^2, rad^2).
struct Constraint {
    Eigen::Index from = 0;
    Eigen::Index to = 0;
    RelPose2d measurement;
    Eigen::Vector3d covariance = Eigen::Vector3d::Ones();
    ConstraintKind kind = ConstraintKind::odometric;
};

/// Directed graph of poses: a chain of odometric constraints i -> i+1 plus
/// loop-closing constraints between revisited vertices.
struct PoseGraph {
    std::vector<Pose2d> vertices;
    std::vector<Constraint> constraints;

    Eigen::Index vertex_count() const { return static_cast<Eigen::Index>(vertices.size()); }
    Eigen::Index odometric_count() const;
    Eigen::Index loop_count() const;
};

/// Smallest admissible covariance entry; keeps every information matrix
/// finite even where the model produces zero variance.
inline constexpr double kDefaultCovarianceFloor = 1e-6;

/// Chains consecutive poses into odometric constraints. The diagonal
/// covariance couples the motion-model coefficients with the step's single
/// rotation delta_r and translation delta_t:
///   [ |cos phi_i| (a3 dt + a4 dr), |sin phi_i| (a3 dt + a4 dr), a1 dr + a2 dt ]
/// with absolute trigonometric factors and every entry floored so the
/// matrix stays positive definite.
PoseGraph build_graph(const std::vector<Pose2d>& poses, const OdometryNoiseModel& noise,
                      double covariance_floor = kDefaultCovarianceFloor);

/// Adds one loop-closing constraint per pair: zero relative measurement
/// (boundary revisits share position and heading) with covariance
/// diag(gamma_xy, gamma_xy, gamma_phi) * c_ij, floored. Duplicate pairs are
/// rejected.
PoseGraph add_loop_closures(PoseGraph graph, const LoopPairSet& pairs, double gamma_xy,
                            double gamma_phi, double covariance_floor = kDefaultCovarianceFloor);

/// Vertices-by-edges incidence matrix: each column holds -1 at the edge
/// source and +1 at its target; odometric columns first in chain order,
/// then loop-closing columns in insertion order.
Eigen::MatrixXd incidence_matrix(const PoseGraph& graph);

/// Plain text graph format, one element per line:
///   VERTEX id x y phi
///   EDGE from to dx dy dphi p11 p22 p33 kind
void save_graph(const PoseGraph& graph, const std::filesystem::path& file);
PoseGraph load_graph(const std::filesystem::path& file);

}  // namespace odomap
