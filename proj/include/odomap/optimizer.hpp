#pragma once

#include "odomap/pose_graph.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace odomap {

struct LmConfig {
    int max_iterations = 100;
    double lambda0 = 1e-4;
    double lambda_up = 10.0;
    double lambda_down = 0.1;
    double lambda_max = 1e10;
    double tol_dx = 1e-8; // step norm below which we stop
    double tol_de = 1e-10; // relative error decrease below which we stop

    void validate() const {
        if (max_iterations <= 0 || lambda0 <= 0 || tol_dx <= 0 || tol_de <= 0 ||
            !(lambda_up > 1.0) || !(lambda_down > 0.0 && lambda_down < 1.0)) {
            throw std::invalid_argument("LmConfig: invalid parameters");
        }
    }
};

struct OptimizationReport {
    int iterations = 0;       // outer iterations (accepted and rejected)
    int accepted_steps = 0;
    double initial_error = 0.0;
    double final_error = 0.0;
    std::vector<double> error_trace; // error after each accepted step
    bool converged = false;
    std::string message;
};

/// Constraint residual: (p_j relative to p_i) minus the measurement, with
/// the angle component wrapped so 2*pi offsets cost nothing.
Eigen::Vector3d residual(const Pose2d& p_i, const Pose2d& p_j, const Constraint& c);

/// Analytic residual Jacobians with respect to the two incident poses.
void residual_jacobians(const Pose2d& p_i, const Pose2d& p_j, Eigen::Matrix3d& j_i,
                        Eigen::Matrix3d& j_j);

/// Sum over constraints of r^T P^{-1} r with the diagonal covariance P.
double total_error(const PoseGraph& graph);

/// Damped Gauss-Newton (Levenberg-Marquardt) over the stacked residuals.
/// Vertex 0 is held fixed as the gauge anchor; steps are accepted only when
/// the total error decreases, so final_error <= initial_error always. A
/// graph without loop closures is already optimal and is returned as-is.
std::pair<PoseGraph, OptimizationReport> lm_optimize(const PoseGraph& graph,
                                                     const LmConfig& cfg = {});

/// Report JSON: {initial_error, final_error, iterations, accepted_steps,
/// converged, message, error_trace}.
void save_report_json(const OptimizationReport& report, const std::filesystem::path& file);

}  // namespace odomap
