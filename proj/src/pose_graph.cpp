#include "odomap/pose_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace odomap {

namespace {

const char* kind_name(ConstraintKind kind) {
    return kind == ConstraintKind::odometric ? "odometric" : "loop_closing";
}

}  // namespace

Eigen::Index PoseGraph::odometric_count() const {
    return static_cast<Eigen::Index>(
        std::count_if(constraints.begin(), constraints.end(),
                      [](const Constraint& c) { return c.kind == ConstraintKind::odometric; }));
}

Eigen::Index PoseGraph::loop_count() const {
    return static_cast<Eigen::Index>(constraints.size()) - odometric_count();
}

PoseGraph build_graph(const std::vector<Pose2d>& poses, const OdometryNoiseModel& noise,
                      double covariance_floor) {
    if (poses.size() < 2) {
        throw std::invalid_argument("build_graph: need at least 2 poses");
    }
    noise.validate();
    if (covariance_floor <= 0) {
        throw std::invalid_argument("build_graph: covariance floor must be > 0");
    }

    PoseGraph graph;
    graph.vertices = poses;
    graph.constraints.reserve(poses.size() - 1);
    for (std::size_t i = 0; i + 1 < poses.size(); ++i) {
        const Pose2d& a = poses[i];
        const Pose2d& b = poses[i + 1];
        Constraint c;
        c.from = static_cast<Eigen::Index>(i);
        c.to = static_cast<Eigen::Index>(i + 1);
        c.measurement = pose_diff(a, b);
        const double delta_t = (b.position() - a.position()).norm();
        const double delta_r = std::abs(wrap_angle(b.phi - a.phi));
        const double planar = noise.alpha3 * delta_t + noise.alpha4 * delta_r;
        c.covariance(0) = std::max(std::abs(std::cos(a.phi)) * planar, covariance_floor);
        c.covariance(1) = std::max(std::abs(std::sin(a.phi)) * planar, covariance_floor);
        c.covariance(2) = std::max(noise.alpha1 * delta_r + noise.alpha2 * delta_t, covariance_floor);
        c.kind = ConstraintKind::odometric;
        graph.constraints.push_back(c);
    }
    return graph;
}

PoseGraph add_loop_closures(PoseGraph graph, const LoopPairSet& pairs, double gamma_xy,
                            double gamma_phi, double covariance_floor) {
    if (gamma_xy <= 0 || gamma_phi <= 0 || covariance_floor <= 0) {
        throw std::invalid_argument("add_loop_closures: scales and floor must be > 0");
    }
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    for (const auto& c : graph.constraints) {
        if (c.kind == ConstraintKind::loop_closing) {
            seen.emplace(std::min(c.from, c.to), std::max(c.from, c.to));
        }
    }
    for (const auto& p : pairs.pairs) {
        if (p.i == p.j || p.i < 0 || p.j < 0 || p.i >= graph.vertex_count() ||
            p.j >= graph.vertex_count()) {
            throw std::invalid_argument("add_loop_closures: pair indexes invalid vertex");
        }
        if (!seen.emplace(std::min(p.i, p.j), std::max(p.i, p.j)).second) {
            throw std::invalid_argument("add_loop_closures: duplicate loop pair");
        }
        Constraint c;
        c.from = p.i;
        c.to = p.j;
        c.measurement = RelPose2d(0.0, 0.0, 0.0);
        c.covariance(0) = std::max(gamma_xy * p.c, covariance_floor);
        c.covariance(1) = std::max(gamma_xy * p.c, covariance_floor);
        c.covariance(2) = std::max(gamma_phi * p.c, covariance_floor);
        c.kind = ConstraintKind::loop_closing;
        graph.constraints.push_back(c);
    }
    return graph;
}

Eigen::MatrixXd incidence_matrix(const PoseGraph& graph) {
    const Eigen::Index rows = graph.vertex_count();
    const Eigen::Index cols = static_cast<Eigen::Index>(graph.constraints.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::Index col = 0;
    for (const auto& c : graph.constraints) {
        if (c.kind != ConstraintKind::odometric) continue;
        a(c.from, col) = -1.0;
        a(c.to, col) = 1.0;
        ++col;
    }
    for (const auto& c : graph.constraints) {
        if (c.kind != ConstraintKind::loop_closing) continue;
        a(c.from, col) = -1.0;
        a(c.to, col) = 1.0;
        ++col;
    }
    return a;
}

void save_graph(const PoseGraph& graph, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error(file.string() + ": cannot write graph");
    char buf[256];
    for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
        const auto& v = graph.vertices[i];
        std::snprintf(buf, sizeof(buf), "VERTEX %zu %.12g %.12g %.12g\n", i, v.x, v.y, v.phi);
        out << buf;
    }
    for (const auto& c : graph.constraints) {
        std::snprintf(buf, sizeof(buf), "EDGE %lld %lld %.12g %.12g %.12g %.12g %.12g %.12g %s\n",
                      static_cast<long long>(c.from), static_cast<long long>(c.to),
                      c.measurement.dx, c.measurement.dy, c.measurement.dphi, c.covariance(0),
                      c.covariance(1), c.covariance(2), kind_name(c.kind));
        out << buf;
    }
}

PoseGraph load_graph(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error(file.string() + ": cannot open graph");
    PoseGraph graph;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string tag;
        row >> tag;
        if (tag == "VERTEX") {
            std::size_t id = 0;
            double x = 0, y = 0, phi = 0;
            row >> id >> x >> y >> phi;
            if (row.fail() || id != graph.vertices.size()) {
                throw std::runtime_error(file.string() + ": line " + std::to_string(line_no) +
                                         ": bad VERTEX record");
            }
            graph.vertices.emplace_back(x, y, phi);
        } else if (tag == "EDGE") {
            Constraint c;
            long long from = 0, to = 0;
            double dx = 0, dy = 0, dphi = 0;
            std::string kind;
            row >> from >> to >> dx >> dy >> dphi >> c.covariance(0) >> c.covariance(1) >>
                c.covariance(2) >> kind;
            if (row.fail() || (kind != "odometric" && kind != "loop_closing")) {
                throw std::runtime_error(file.string() + ": line " + std::to_string(line_no) +
                                         ": bad EDGE record");
            }
            c.from = from;
            c.to = to;
            c.measurement = RelPose2d(dx, dy, dphi);
            c.kind = kind == "odometric" ? ConstraintKind::odometric : ConstraintKind::loop_closing;
            graph.constraints.push_back(c);
        } else {
            throw std::runtime_error(file.string() + ": line " + std::to_string(line_no) +
                                     ": unknown tag '" + tag + "'");
        }
    }
    if (graph.vertices.empty()) {
        throw std::runtime_error(file.string() + ": empty graph");
    }
    return graph;
}

}  // namespace odomap
