#include "odomap/sim.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace odomap {

namespace {

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

[[noreturn]] void data_error(const std::filesystem::path& file, const std::string& what) {
    throw std::runtime_error(file.string() + ": " + what);
}

}  // namespace

void OdometryNoiseModel::validate() const {
    if (alpha1 < 0 || alpha2 < 0 || alpha3 < 0 || alpha4 < 0) {
        throw std::invalid_argument("OdometryNoiseModel: alphas must be >= 0");
    }
}

void SimConfig::validate() const {
    if (speed <= 0) throw std::invalid_argument("SimConfig: speed must be > 0");
    if (sample_rate <= 0) throw std::invalid_argument("SimConfig: sample_rate must be > 0");
    if (turn_rate <= 0) throw std::invalid_argument("SimConfig: turn_rate must be > 0");
    // Loop closure needs laps >= 2; a single lap still simulates, so the
    // CLI warns instead of rejecting.
    if (laps < 1) throw std::invalid_argument("SimConfig: laps must be >= 1");
}

Environment load_environment(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) data_error(file, "cannot open environment file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        data_error(file, std::string("invalid JSON: ") + e.what());
    }
    if (!j.contains("boundary") || !j["boundary"].is_array()) {
        data_error(file, "missing \"boundary\" array");
    }
    std::vector<Vec2d> pts;
    for (const auto& p : j["boundary"]) {
        if (!p.is_array() || p.size() != 2) data_error(file, "boundary entries must be [x, y]");
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    Environment env{j.value("name", file.stem().string()), Polygon2d::from_vertices(pts)};
    if (!polygon_is_simple(env.boundary)) {
        data_error(file, "boundary polygon is self-intersecting");
    }
    return env;
}

void save_environment(const Environment& env, const std::filesystem::path& file) {
    nlohmann::json j;
    j["name"] = env.name;
    auto& b = j["boundary"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < env.boundary.size(); ++i) {
        b.push_back({env.boundary.vertex(i).x(), env.boundary.vertex(i).y()});
    }
    std::ofstream out(file);
    if (!out) data_error(file, "cannot write environment file");
    out << j.dump(2) << '\n';
}

namespace {

/// Pure arclength resampling: poses at k * step along the closed polyline.
std::vector<Pose2d> resample_by_arclength(const Polygon2d& poly, double step, int laps) {
    const Eigen::Index n = poly.size();
    std::vector<double> cumulative(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> heading(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec2d v = poly.vertex((i + 1) % n) - poly.vertex(i);
        cumulative[static_cast<std::size_t>(i) + 1] =
            cumulative[static_cast<std::size_t>(i)] + v.norm();
        heading[static_cast<std::size_t>(i)] = std::atan2(v.y(), v.x());
    }
    const double perimeter = cumulative.back();
    const double total = perimeter * laps;
    const auto count = static_cast<std::size_t>(std::floor(total / step - 1e-9)) + 1;

    std::vector<Pose2d> path;
    path.reserve(count);
    std::size_t edge = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double s = std::fmod(static_cast<double>(k) * step, perimeter);
        if (s < cumulative[edge]) edge = 0;
        while (edge + 1 < static_cast<std::size_t>(n) && cumulative[edge + 1] <= s) ++edge;
        const Vec2d a = poly.vertex(static_cast<Eigen::Index>(edge));
        const Vec2d b =
            poly.vertex(static_cast<Eigen::Index>((edge + 1) % static_cast<std::size_t>(n)));
        const double len = cumulative[edge + 1] - cumulative[edge];
        const double t = (s - cumulative[edge]) / len;
        const Vec2d p = a + t * (b - a);
        path.emplace_back(p.x(), p.y(), heading[edge]);
    }
    return path;
}

/// Kinematic walk: translate along each edge, pivot in place at each corner
/// stepping the heading by at most turn_step per sample. Corners are exact
/// samples with zero-translation rotation samples between edges.
std::vector<Pose2d> walk_with_turns(const Polygon2d& poly, double step, double turn_step,
                                    int laps) {
    const Eigen::Index n = poly.size();
    std::vector<Pose2d> path;
    const Vec2d first_dir = (poly.vertex(1) - poly.vertex(0)).normalized();
    double heading = std::atan2(first_dir.y(), first_dir.x());
    path.emplace_back(poly.vertex(0).x(), poly.vertex(0).y(), heading);

    for (int lap = 0; lap < laps; ++lap) {
        for (Eigen::Index e = 0; e < n; ++e) {
            const Vec2d a = poly.vertex(e);
            const Vec2d b = poly.vertex((e + 1) % n);
            const Vec2d v = b - a;
            const double len = v.norm();
            const double edge_heading = std::atan2(v.y(), v.x());

            double remaining = wrap_angle(edge_heading - heading);
            while (std::abs(remaining) > 1e-12) {
                const double delta = std::clamp(remaining, -turn_step, turn_step);
                heading = wrap_angle(heading + delta);
                path.emplace_back(a.x(), a.y(), heading);
                remaining = wrap_angle(edge_heading - heading);
            }
            heading = edge_heading;

            long k = 1;
            for (; static_cast<double>(k) * step < len - 1e-12; ++k) {
                const Vec2d p = a + (static_cast<double>(k) * step / len) * v;
                path.emplace_back(p.x(), p.y(), heading);
            }
            path.emplace_back(b.x(), b.y(), heading);
        }
    }
    return path;
}

}  // namespace

std::vector<Pose2d> generate_true_path(const Environment& env, const SimConfig& cfg) {
    if (cfg.speed <= 0 || cfg.sample_rate <= 0 || cfg.laps < 1 || cfg.turn_rate <= 0) {
        throw std::invalid_argument("generate_true_path: invalid config");
    }
    const double step = cfg.step_length();
    if (std::isinf(cfg.turn_rate)) {
        return resample_by_arclength(env.boundary, step, cfg.laps);
    }
    return walk_with_turns(env.boundary, step, cfg.turn_rate / cfg.sample_rate, cfg.laps);
}

OdometryTrace corrupt_odometry(const std::vector<Pose2d>& true_path,
                               const OdometryNoiseModel& model,
                               std::uint64_t seed,
                               double sample_rate) {
    if (true_path.size() < 2) {
        throw std::invalid_argument("corrupt_odometry: need at least 2 poses");
    }
    model.validate();

    GaussianSampler rng(seed);
    OdometryTrace trace;
    trace.rng_name = GaussianSampler::name();
    trace.seed = seed;
    trace.true_poses = true_path;
    trace.timestamps.resize(true_path.size());
    trace.poses.reserve(true_path.size());
    trace.poses.push_back(true_path.front());

    for (std::size_t k = 0; k < true_path.size(); ++k) {
        trace.timestamps[k] = static_cast<double>(k) / sample_rate;
    }
    for (std::size_t k = 0; k + 1 < true_path.size(); ++k) {
        const Pose2d& a = true_path[k];
        const Pose2d& b = true_path[k + 1];
        const double delta_r = wrap_angle(b.phi - a.phi);
        const double delta_t = (b.position() - a.position()).norm();

        const double sigma_r = std::sqrt(model.alpha1 * delta_r * delta_r +
                                         model.alpha2 * delta_t * delta_t);
        const double sigma_t = std::sqrt(model.alpha3 * delta_t * delta_t +
                                         model.alpha4 * delta_r * delta_r);
        const double noisy_r = delta_r + sigma_r * rng.normal();
        const double noisy_t = delta_t + sigma_t * rng.normal();

        // Rotate first, then translate along the new heading.
        const Pose2d& prev = trace.poses.back();
        const double phi = wrap_angle(prev.phi + noisy_r);
        trace.poses.emplace_back(prev.x + noisy_t * std::cos(phi),
                                 prev.y + noisy_t * std::sin(phi), phi);
    }
    return trace;
}

void save_trace_csv(const OdometryTrace& trace, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) data_error(file, "cannot write trace file");
    if (!trace.rng_name.empty()) {
        out << "# rng=" << trace.rng_name << " seed=" << trace.seed << '\n';
    }
    const bool truth = trace.has_truth();
    out << (truth ? "t,x,y,phi,true_x,true_y,true_phi" : "t,x,y,phi") << '\n';
    for (std::size_t k = 0; k < trace.poses.size(); ++k) {
        out << format_g9(trace.timestamps[k]) << ',' << format_g9(trace.poses[k].x) << ','
            << format_g9(trace.poses[k].y) << ',' << format_g9(trace.poses[k].phi);
        if (truth) {
            out << ',' << format_g9(trace.true_poses[k].x) << ','
                << format_g9(trace.true_poses[k].y) << ',' << format_g9(trace.true_poses[k].phi);
        }
        out << '\n';
    }
}

OdometryTrace load_trace_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) data_error(file, "cannot open trace file");

    OdometryTrace trace;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool truth = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto rng_pos = line.find("rng=");
            if (rng_pos != std::string::npos) {
                std::istringstream meta(line.substr(rng_pos + 4));
                meta >> trace.rng_name;
            }
            const auto seed_pos = line.find("seed=");
            if (seed_pos != std::string::npos) {
                trace.seed = std::strtoull(line.c_str() + seed_pos + 5, nullptr, 10);
            }
            continue;
        }
        if (!header_seen) {
            if (line.rfind("t,x,y,phi", 0) != 0) {
                data_error(file, "line " + std::to_string(line_no) + ": expected trace header");
            }
            truth = line.find("true_x") != std::string::npos;
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(row, field, ',')) {
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str()) {
                data_error(file, "line " + std::to_string(line_no) + ": bad number '" + field + "'");
            }
            vals.push_back(v);
        }
        const std::size_t expected = truth ? 7 : 4;
        if (vals.size() != expected) {
            data_error(file, "line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(expected) + " fields, got " +
                                 std::to_string(vals.size()));
        }
        trace.timestamps.push_back(vals[0]);
        trace.poses.emplace_back(vals[1], vals[2], vals[3]);
        if (truth) trace.true_poses.emplace_back(vals[4], vals[5], vals[6]);
    }
    if (!header_seen || trace.poses.empty()) data_error(file, "empty trace");
    for (std::size_t k = 0; k + 1 < trace.timestamps.size(); ++k) {
        if (trace.timestamps[k + 1] <= trace.timestamps[k]) {
            data_error(file, "timestamps not strictly increasing at row " + std::to_string(k + 2));
        }
    }
    return trace;
}

}  // namespace odomap
