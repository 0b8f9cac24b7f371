#include "odomap/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace odomap {

namespace {

struct RasterGrid {
    double x0 = 0, y0 = 0;
    Eigen::Index nx = 0, ny = 0;
    double res = 0.05;
    std::vector<std::uint8_t> cells; // row-major ny * nx occupancy

    static RasterGrid over(const Polygon2d& a, const Polygon2d& b, double res) {
        const auto [amin, amax] = a.bounding_box();
        const auto [bmin, bmax] = b.bounding_box();
        RasterGrid g;
        g.res = res;
        g.x0 = std::min(amin.x(), bmin.x()) - res;
        g.y0 = std::min(amin.y(), bmin.y()) - res;
        const double x1 = std::max(amax.x(), bmax.x()) + res;
        const double y1 = std::max(amax.y(), bmax.y()) + res;
        g.nx = static_cast<Eigen::Index>(std::ceil((x1 - g.x0) / res));
        g.ny = static_cast<Eigen::Index>(std::ceil((y1 - g.y0) / res));
        return g;
    }
};

/// Even-odd scanline fill sampled at cell centers.
std::vector<std::uint8_t> rasterize(const Polygon2d& poly, const RasterGrid& g) {
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(g.nx * g.ny), 0);
    const Eigen::Index n = poly.size();
    std::vector<double> crossings;
    for (Eigen::Index r = 0; r < g.ny; ++r) {
        const double yc = g.y0 + (static_cast<double>(r) + 0.5) * g.res;
        crossings.clear();
        for (Eigen::Index e = 0; e < n; ++e) {
            const Vec2d a = poly.vertex(e);
            const Vec2d b = poly.vertex((e + 1) % n);
            // Half-open rule in y keeps shared vertices counted once.
            if ((a.y() <= yc && b.y() > yc) || (b.y() <= yc && a.y() > yc)) {
                crossings.push_back(a.x() + (yc - a.y()) / (b.y() - a.y()) * (b.x() - a.x()));
            }
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
            // Cells whose center lies in [xl, xr).
            const double xl = crossings[k];
            const double xr = crossings[k + 1];
            auto c0 = static_cast<Eigen::Index>(std::ceil((xl - g.x0) / g.res - 0.5));
            auto c1 = static_cast<Eigen::Index>(std::ceil((xr - g.x0) / g.res - 0.5)) - 1;
            c0 = std::max<Eigen::Index>(c0, 0);
            c1 = std::min<Eigen::Index>(c1, g.nx - 1);
            for (Eigen::Index c = c0; c <= c1; ++c) {
                cells[static_cast<std::size_t>(r * g.nx + c)] = 1;
            }
        }
    }
    return cells;
}

Vec2d centroid(const Polygon2d& poly) {
    return poly.vertices().rowwise().mean();
}

double max_radius(const Polygon2d& poly, const Vec2d& center) {
    return (poly.vertices().colwise() - center).colwise().norm().maxCoeff();
}

/// Periodic orientation profile of a closed counterclockwise boundary:
/// one lap spans the perimeter and adds a full positive turn.
struct ClosedProfile {
    Eigen::VectorXd arclengths;   // at each vertex, starting at 0
    Eigen::VectorXd orientations; // cumulative heading at each vertex
    double perimeter = 0.0;

    explicit ClosedProfile(const Polygon2d& poly) {
        const Eigen::Index n = poly.size();
        arclengths.resize(n);
        orientations.resize(n);
        double l = 0.0;
        double phi = 0.0;
        double prev_heading = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vec2d v = poly.vertex((i + 1) % n) - poly.vertex(i);
            const double heading = std::atan2(v.y(), v.x());
            if (i == 0) {
                phi = heading;
            } else {
                phi += wrap_angle(heading - prev_heading);
            }
            arclengths(i) = l;
            orientations(i) = phi;
            prev_heading = heading;
            l += v.norm();
        }
        perimeter = l;
    }

    double value_at(double x) const {
        const double laps = std::floor(x / perimeter);
        const double rem = x - laps * perimeter;
        const auto* begin = arclengths.data();
        const auto* end = begin + arclengths.size();
        const auto* it = std::upper_bound(begin, end, rem);
        const Eigen::Index i = it == begin ? 0 : static_cast<Eigen::Index>(it - begin) - 1;
        return orientations(i) + laps * 2.0 * std::numbers::pi;
    }

    double grounded_at(Eigen::Index i, double x) const {
        return value_at(x + arclengths(i)) - orientations(i);
    }
};

}  // namespace

std::vector<std::pair<Vec2d, Vec2d>> match_boundary_points(const Polygon2d& estimate,
                                                           const Polygon2d& truth,
                                                           const CorrelationConfig& cfg) {
    cfg.validate();
    const Polygon2d est = estimate.counterclockwise();
    const Polygon2d tru = truth.counterclockwise();
    const ClosedProfile pe(est);
    const ClosedProfile pt(tru);

    const Eigen::Index ne = est.size();
    const Eigen::Index nt = tru.size();
    const double step = 2.0 * cfg.neighborhood / (cfg.samples - 1);
    const double center = (cfg.samples - 1) / 2.0;

    Eigen::MatrixXd we(ne, cfg.samples);
    Eigen::MatrixXd wt(nt, cfg.samples);
    for (Eigen::Index i = 0; i < ne; ++i) {
        for (int k = 0; k < cfg.samples; ++k) we(i, k) = pe.grounded_at(i, (k - center) * step);
    }
    for (Eigen::Index j = 0; j < nt; ++j) {
        for (int k = 0; k < cfg.samples; ++k) wt(j, k) = pt.grounded_at(j, (k - center) * step);
    }

    Eigen::MatrixXd c(ne, nt);
    for (Eigen::Index i = 0; i < ne; ++i) {
        for (Eigen::Index j = 0; j < nt; ++j) {
            c(i, j) = (we.row(i) - wt.row(j)).squaredNorm() / cfg.samples;
        }
    }

    std::vector<std::pair<Vec2d, Vec2d>> pairs;
    for (Eigen::Index i = 0; i < ne; ++i) {
        for (Eigen::Index j = 0; j < nt; ++j) {
            const double value = c(i, j);
            if (!(value < cfg.threshold)) continue;
            bool minimal = true;
            for (Eigen::Index di = -1; di <= 1 && minimal; ++di) {
                for (Eigen::Index dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    // Profiles are periodic, so the neighborhood wraps.
                    const Eigen::Index a = (i + di + ne) % ne;
                    const Eigen::Index b = (j + dj + nt) % nt;
                    if (c(a, b) < value) {
                        minimal = false;
                        break;
                    }
                }
            }
            if (minimal) pairs.emplace_back(est.vertex(i), tru.vertex(j));
        }
    }
    if (pairs.empty()) {
        throw NoBoundaryMatches(
            "match_boundary_points: no shape correspondences; fall back to rotation search");
    }
    return pairs;
}

RigidTransform2D align_horn(const std::vector<std::pair<Vec2d, Vec2d>>& pairs) {
    if (pairs.size() < 2) {
        throw std::invalid_argument("align_horn: need at least 2 pairs");
    }
    Vec2d mean_a = Vec2d::Zero();
    Vec2d mean_b = Vec2d::Zero();
    for (const auto& [a, b] : pairs) {
        mean_a += a;
        mean_b += b;
    }
    mean_a /= static_cast<double>(pairs.size());
    mean_b /= static_cast<double>(pairs.size());

    double dot = 0.0, cross = 0.0, spread = 0.0;
    for (const auto& [a, b] : pairs) {
        const Vec2d ca = a - mean_a;
        const Vec2d cb = b - mean_b;
        dot += ca.dot(cb);
        cross += ca.x() * cb.y() - ca.y() * cb.x();
        spread += ca.squaredNorm();
    }
    if (spread <= 1e-18) {
        throw std::invalid_argument("align_horn: source points are coincident");
    }
    RigidTransform2D t;
    t.angle = std::atan2(cross, dot);
    t.translation = mean_b - Eigen::Rotation2Dd(t.angle) * mean_a;
    return t;
}

double area_deviation(const Polygon2d& estimate, const Polygon2d& truth,
                      double raster_resolution) {
    if (raster_resolution <= 0) {
        throw std::invalid_argument("area_deviation: resolution must be > 0");
    }
    const RasterGrid grid = RasterGrid::over(estimate, truth, raster_resolution);
    const auto a = rasterize(estimate, grid);
    const auto b = rasterize(truth, grid);
    std::size_t inter = 0, uni = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        inter += static_cast<std::size_t>(a[k] & b[k]);
        uni += static_cast<std::size_t>(a[k] | b[k]);
    }
    if (uni == 0) {
        throw std::runtime_error("area_deviation: zero union area");
    }
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

/// Estimate-side parametrization used during refinement: rotate about the
/// estimate centroid, then translate.
Polygon2d apply_about(const Polygon2d& est, const Vec2d& center, double angle, const Vec2d& t) {
    Points2d v = Eigen::Rotation2Dd(angle).toRotationMatrix() *
                 (est.vertices().colwise() - center);
    v.colwise() += center + t;
    return Polygon2d(std::move(v));
}

}  // namespace

EvaluationReport evaluate_map(const Polygon2d& estimate, const Polygon2d& truth,
                              const AlignmentConfig& cfg) {
    cfg.validate();
    const double res = cfg.raster_resolution;
    const Vec2d center = centroid(estimate);
    const double radius = std::max(max_radius(estimate, center), res);

    EvaluationReport report;

    // Initial guesses: shape matching + closed-form alignment when the
    // boundaries carry enough features, always backed by a rotation sweep
    // about matched centroids.
    double best_angle = 0.0;
    Vec2d best_t = centroid(truth) - center;
    double best = area_deviation(apply_about(estimate, center, best_angle, best_t), truth, res);

    try {
        CorrelationConfig match_cfg;
        match_cfg.neighborhood =
            cfg.match_lnh_fraction * std::min(estimate.perimeter(), truth.perimeter());
        match_cfg.samples = cfg.match_samples;
        match_cfg.threshold = cfg.match_threshold;
        const auto pairs = match_boundary_points(estimate, truth, match_cfg);
        const RigidTransform2D horn = align_horn(pairs);
        const double horn_angle = horn.angle;
        const Vec2d horn_t = horn.apply(center) - center;
        const double horn_da =
            area_deviation(apply_about(estimate, center, horn_angle, horn_t), truth, res);
        report.horn_initialized = true;
        report.horn_delta_a = horn_da;
        if (horn_da < best) {
            best = horn_da;
            best_angle = horn_angle;
            best_t = horn_t;
        }
    } catch (const NoBoundaryMatches&) {
        report.horn_initialized = false;
    } catch (const std::invalid_argument&) {
        // Too few or degenerate correspondences for the closed form.
        report.horn_initialized = false;
    }

    const Vec2d truth_center = centroid(truth);
    for (int k = 0; k < cfg.coarse_angles; ++k) {
        const double angle = -std::numbers::pi + 2.0 * std::numbers::pi * k / cfg.coarse_angles;
        const Vec2d t = truth_center - center;
        const double da = area_deviation(apply_about(estimate, center, angle, t), truth, res);
        if (da < best) {
            best = da;
            best_angle = angle;
            best_t = t;
        }
    }
    if (!report.horn_initialized) report.horn_delta_a = best;

    // Finite-difference gradient descent with backtracking halving. The
    // objective is piecewise constant at raster granularity, so differences
    // are taken a couple of cells wide and the angle axis is scaled by the
    // estimate radius to keep all three axes in meters.
    const double eps_t = cfg.fd_epsilon_cells * res;
    const double eps_a = eps_t / radius;
    double step = cfg.gd_step0;
    const double min_step = res / 8.0;
    auto objective = [&](double angle, const Vec2d& t) {
        return area_deviation(apply_about(estimate, center, angle, t), truth, res);
    };

    int iterations = 0;
    while (iterations < cfg.gd_max_iters && step >= min_step) {
        ++iterations;
        const double ga =
            (objective(best_angle + eps_a, best_t) - objective(best_angle - eps_a, best_t)) /
            (2.0 * eps_a) / radius;
        const double gx = (objective(best_angle, best_t + Vec2d(eps_t, 0)) -
                           objective(best_angle, best_t - Vec2d(eps_t, 0))) /
                          (2.0 * eps_t);
        const double gy = (objective(best_angle, best_t + Vec2d(0, eps_t)) -
                           objective(best_angle, best_t - Vec2d(0, eps_t))) /
                          (2.0 * eps_t);
        Eigen::Vector3d g(ga, gx, gy); // gradient in scaled (angle*radius, tx, ty) space

        bool improved = false;
        if (g.norm() > 0) {
            const Eigen::Vector3d dir = -g.normalized();
            const double cand_angle = best_angle + step * dir(0) / radius;
            const Vec2d cand_t = best_t + step * Vec2d(dir(1), dir(2));
            const double cand = objective(cand_angle, cand_t);
            if (cand < best) {
                best = cand;
                best_angle = cand_angle;
                best_t = cand_t;
                improved = true;
            }
        }
        if (!improved) {
            // Axis probes catch descent directions the flat gradient misses.
            const Eigen::Vector3d axes[6] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                             {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
            for (const auto& d : axes) {
                const double cand_angle = best_angle + step * d(0) / radius;
                const Vec2d cand_t = best_t + step * Vec2d(d(1), d(2));
                const double cand = objective(cand_angle, cand_t);
                if (cand < best) {
                    best = cand;
                    best_angle = cand_angle;
                    best_t = cand_t;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }

    report.delta_a = best;
    report.iterations = iterations;
    report.transform.angle = wrap_angle(best_angle);
    report.transform.translation =
        center + best_t - Eigen::Rotation2Dd(best_angle) * center;
    return report;
}

void save_evaluation_json(const EvaluationReport& report, const std::filesystem::path& file) {
    nlohmann::json j;
    j["delta_a"] = report.delta_a;
    j["rotation"] = report.transform.angle;
    j["tx"] = report.transform.translation.x();
    j["ty"] = report.transform.translation.y();
    j["horn_delta_a"] = report.horn_delta_a;
    j["iterations"] = report.iterations;
    std::ofstream out(file);
    if (!out) throw std::runtime_error(file.string() + ": cannot write evaluation report");
    out << j.dump(2) << '\n';
}

}  // namespace odomap
