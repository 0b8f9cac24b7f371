#include "odomap/optimizer.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <fstream>

namespace odomap {

Eigen::Vector3d residual(const Pose2d& p_i, const Pose2d& p_j, const Constraint& c) {
    const RelPose2d predicted = pose_diff(p_i, p_j);
    return {predicted.dx - c.measurement.dx, predicted.dy - c.measurement.dy,
            wrap_angle(predicted.dphi - c.measurement.dphi)};
}

double total_error(const PoseGraph& graph) {
    double sum = 0.0;
    for (const auto& c : graph.constraints) {
        const Eigen::Vector3d r = residual(graph.vertices[static_cast<std::size_t>(c.from)],
                                           graph.vertices[static_cast<std::size_t>(c.to)], c);
        sum += r.cwiseQuotient(c.covariance).dot(r);
    }
    return sum;
}

// Jacobian blocks of the residual for one constraint. With
// e_xy = R(phi_i)^T (x_j - x_i) - m_xy and e_phi = wrap(phi_j - phi_i - m_phi):
//   d e / d p_i = [ -R^T, dR^T/dphi (x_j - x_i); 0 0 -1 ]
//   d e / d p_j = [  R^T, 0;                     0 0  1 ]
void residual_jacobians(const Pose2d& p_i, const Pose2d& p_j, Eigen::Matrix3d& j_i,
                        Eigen::Matrix3d& j_j) {
    const double c = std::cos(p_i.phi);
    const double s = std::sin(p_i.phi);
    const Eigen::Vector2d d = p_j.position() - p_i.position();

    j_i.setZero();
    j_i(0, 0) = -c;
    j_i(0, 1) = -s;
    j_i(1, 0) = s;
    j_i(1, 1) = -c;
    j_i(0, 2) = -s * d.x() + c * d.y();
    j_i(1, 2) = -c * d.x() - s * d.y();
    j_i(2, 2) = -1.0;

    j_j.setZero();
    j_j(0, 0) = c;
    j_j(0, 1) = s;
    j_j(1, 0) = -s;
    j_j(1, 1) = c;
    j_j(2, 2) = 1.0;
}

namespace {

std::vector<Pose2d> apply_step(const std::vector<Pose2d>& vertices, const Eigen::VectorXd& dx) {
    std::vector<Pose2d> out = vertices;
    for (std::size_t v = 1; v < out.size(); ++v) {
        const Eigen::Index base = 3 * (static_cast<Eigen::Index>(v) - 1);
        out[v] = Pose2d(out[v].x + dx(base), out[v].y + dx(base + 1),
                        wrap_angle(out[v].phi + dx(base + 2)));
    }
    return out;
}

}  // namespace

std::pair<PoseGraph, OptimizationReport> lm_optimize(const PoseGraph& graph, const LmConfig& cfg) {
    cfg.validate();
    OptimizationReport report;
    report.initial_error = total_error(graph);
    report.final_error = report.initial_error;

    if (graph.loop_count() == 0) {
        report.converged = true;
        report.message = "no loop closures; odometric chain is already optimal";
        return {graph, report};
    }
    if (report.initial_error == 0.0) {
        report.converged = true;
        report.message = "initial error already zero";
        return {graph, report};
    }

    const Eigen::Index unknowns = 3 * (graph.vertex_count() - 1);
    PoseGraph current = graph;
    double error = report.initial_error;
    double lambda = cfg.lambda0;

    Eigen::SparseMatrix<double> hessian(unknowns, unknowns);
    Eigen::VectorXd gradient(unknowns);
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

    bool relinearize = true;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        report.iterations = iter + 1;
        if (relinearize) {
            triplets.clear();
            gradient.setZero();
            Eigen::Matrix3d j_i, j_j;
            for (const auto& c : current.constraints) {
                const Pose2d& p_i = current.vertices[static_cast<std::size_t>(c.from)];
                const Pose2d& p_j = current.vertices[static_cast<std::size_t>(c.to)];
                const Eigen::Vector3d r = residual(p_i, p_j, c);
                const Eigen::Vector3d w = c.covariance.cwiseInverse();
                residual_jacobians(p_i, p_j, j_i, j_j);

                const Eigen::Index bi = 3 * (c.from - 1);
                const Eigen::Index bj = 3 * (c.to - 1);
                const bool use_i = c.from > 0;
                const bool use_j = c.to > 0;

                auto add_block = [&](Eigen::Index row0, Eigen::Index col0,
                                     const Eigen::Matrix3d& m) {
                    for (int a = 0; a < 3; ++a) {
                        for (int b = 0; b < 3; ++b) {
                            if (m(a, b) != 0.0) triplets.emplace_back(row0 + a, col0 + b, m(a, b));
                        }
                    }
                };
                if (use_i) {
                    add_block(bi, bi, j_i.transpose() * w.asDiagonal() * j_i);
                    gradient.segment<3>(bi) += j_i.transpose() * (w.asDiagonal() * r);
                }
                if (use_j) {
                    add_block(bj, bj, j_j.transpose() * w.asDiagonal() * j_j);
                    gradient.segment<3>(bj) += j_j.transpose() * (w.asDiagonal() * r);
                }
                if (use_i && use_j) {
                    const Eigen::Matrix3d cross = j_i.transpose() * w.asDiagonal() * j_j;
                    add_block(bi, bj, cross);
                    add_block(bj, bi, cross.transpose());
                }
            }
            relinearize = false;
        }

        Eigen::SparseMatrix<double> damped(unknowns, unknowns);
        {
            auto all = triplets;
            for (Eigen::Index k = 0; k < unknowns; ++k) all.emplace_back(k, k, lambda);
            damped.setFromTriplets(all.begin(), all.end());
        }
        solver.compute(damped);
        if (solver.info() != Eigen::Success) {
            lambda *= cfg.lambda_up;
            if (lambda > cfg.lambda_max) {
                report.converged = false;
                report.message = "normal equations singular at maximum damping";
                break;
            }
            continue;
        }
        const Eigen::VectorXd dx = solver.solve(-gradient);
        if (solver.info() != Eigen::Success) {
            report.converged = false;
            report.message = "sparse solve failed";
            break;
        }
        if (dx.norm() < cfg.tol_dx) {
            report.converged = true;
            report.message = "step norm below tolerance";
            break;
        }

        PoseGraph candidate = current;
        candidate.vertices = apply_step(current.vertices, dx);
        const double candidate_error = total_error(candidate);
        if (candidate_error < error) {
            const double relative_drop = (error - candidate_error) / error;
            current = std::move(candidate);
            error = candidate_error;
            report.error_trace.push_back(error);
            ++report.accepted_steps;
            lambda = std::max(lambda * cfg.lambda_down, 1e-12);
            relinearize = true;
            if (relative_drop < cfg.tol_de) {
                report.converged = true;
                report.message = "relative error decrease below tolerance";
                break;
            }
        } else {
            lambda *= cfg.lambda_up;
            if (lambda > cfg.lambda_max) {
                report.converged = true;
                report.message = "no descent direction at maximum damping";
                break;
            }
        }
    }
    if (report.message.empty()) {
        report.converged = false;
        report.message = "iteration limit reached";
    }
    report.final_error = error;
    return {current, report};
}

void save_report_json(const OptimizationReport& report, const std::filesystem::path& file) {
    nlohmann::json j;
    j["initial_error"] = report.initial_error;
    j["final_error"] = report.final_error;
    j["iterations"] = report.iterations;
    j["accepted_steps"] = report.accepted_steps;
    j["converged"] = report.converged;
    j["message"] = report.message;
    j["error_trace"] = report.error_trace;
    std::ofstream out(file);
    if (!out) throw std::runtime_error(file.string() + ": cannot write report");
    out << j.dump(2) << '\n';
}

}  // namespace odomap
