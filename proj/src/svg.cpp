#include "odomap/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace odomap {

namespace {

/// Minimal SVG sink mapping world coordinates (y up) onto the page (y down).
class SvgCanvas {
public:
    SvgCanvas(const std::filesystem::path& file, double x0, double y0, double x1, double y1,
              double pixels_per_meter = 20.0)
        : out_(file), x0_(x0), y1_(y1), scale_(pixels_per_meter) {
        if (!out_) throw std::runtime_error(file.string() + ": cannot write SVG");
        const double margin = 20.0;
        width_ = (x1 - x0) * scale_ + 2 * margin;
        height_ = (y1 - y0) * scale_ + 2 * margin;
        margin_ = margin;
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                      "viewBox=\"0 0 %.0f %.0f\">\n",
                      width_, height_, width_, height_);
        out_ << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    ~SvgCanvas() { out_ << "</svg>\n"; }

    double px(double x) const { return (x - x0_) * scale_ + margin_; }
    double py(double y) const { return (y1_ - y) * scale_ + margin_; }

    void polyline(const std::vector<Vec2d>& pts, const char* stroke, double width,
                  bool closed = false, const char* fill = "none", const char* opacity = "1") {
        out_ << (closed ? "<polygon points=\"" : "<polyline points=\"");
        char buf[64];
        for (const auto& p : pts) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(p.x()), py(p.y()));
            out_ << buf;
        }
        char tail[192];
        std::snprintf(tail, sizeof(tail),
                      "\" fill=\"%s\" fill-opacity=\"%s\" stroke=\"%s\" stroke-width=\"%.2f\"/>\n",
                      fill, opacity, stroke, width);
        out_ << tail;
    }

    void circle(const Vec2d& p, double r_px, const char* fill) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\"/>\n",
                      px(p.x()), py(p.y()), r_px, fill);
        out_ << buf;
    }

    void rect_px(double x, double y, double w, double h, const char* fill) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                      x, y, w, h, fill);
        out_ << buf;
    }

    void rect_world(double x, double y, double w, double h, const char* fill) {
        rect_px(px(x), py(y + h), w * scale_, h * scale_, fill);
    }

    std::ofstream& raw() { return out_; }

private:
    std::ofstream out_;
    double x0_, y1_, scale_, width_ = 0, height_ = 0, margin_ = 0;
};

std::vector<Vec2d> positions(const std::vector<Pose2d>& poses) {
    std::vector<Vec2d> out;
    out.reserve(poses.size());
    for (const auto& p : poses) out.push_back(p.position());
    return out;
}

std::vector<Vec2d> polygon_points(const Polygon2d& poly) {
    std::vector<Vec2d> out;
    out.reserve(static_cast<std::size_t>(poly.size()));
    for (Eigen::Index i = 0; i < poly.size(); ++i) out.push_back(poly.vertex(i));
    return out;
}

void bounds(const std::vector<Vec2d>& pts, double& x0, double& y0, double& x1, double& y1) {
    for (const auto& p : pts) {
        x0 = std::min(x0, p.x());
        y0 = std::min(y0, p.y());
        x1 = std::max(x1, p.x());
        y1 = std::max(y1, p.y());
    }
}

}  // namespace

void render_path_svg(const std::vector<Pose2d>& trace, const DominantPointSet& dp,
                     const std::filesystem::path& file) {
    const auto pts = positions(trace);
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    bounds(pts, x0, y0, x1, y1);
    SvgCanvas svg(file, x0, y0, x1, y1);
    svg.polyline(pts, "#4477aa", 1.0);
    for (const auto& p : dp.points) svg.circle(p, 2.5, "#cc3311");
}

void render_heatmap_svg(const Eigen::MatrixXd& correlation, const std::filesystem::path& file) {
    const Eigen::Index n = correlation.rows();
    const Eigen::Index max_tiles = 256;
    const Eigen::Index block = std::max<Eigen::Index>(1, (n + max_tiles - 1) / max_tiles);
    const Eigen::Index tiles = (n + block - 1) / block;

    // Log-scaled block minima; blocks with no comparable entry stay blank.
    Eigen::MatrixXd tile(tiles, tiles);
    tile.setConstant(kNotComparable);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = correlation(i, j);
            if (std::isinf(v)) continue;
            auto& cell = tile(i / block, j / block);
            cell = std::isinf(cell) ? v : std::min(cell, v);
        }
    }
    double lo = 1e300, hi = -1e300;
    for (Eigen::Index i = 0; i < tiles * tiles; ++i) {
        const double v = tile(i / tiles, i % tiles);
        if (std::isinf(v)) continue;
        const double lv = std::log10(v + 1e-12);
        lo = std::min(lo, lv);
        hi = std::max(hi, lv);
    }
    if (hi <= lo) hi = lo + 1.0;

    std::ofstream out(file);
    if (!out) throw std::runtime_error(file.string() + ": cannot write SVG");
    const double cell_px = std::max(2.0, 512.0 / static_cast<double>(tiles));
    const double size = cell_px * static_cast<double>(tiles);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n",
                  size, size);
    out << buf << "<rect width=\"100%\" height=\"100%\" fill=\"#dddddd\"/>\n";
    for (Eigen::Index i = 0; i < tiles; ++i) {
        for (Eigen::Index j = 0; j < tiles; ++j) {
            const double v = tile(i, j);
            if (std::isinf(v)) continue;
            const double t = (std::log10(v + 1e-12) - lo) / (hi - lo);
            const int shade = static_cast<int>(255.0 * t); // dark = similar shapes
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                          "fill=\"rgb(%d,%d,%d)\"/>\n",
                          static_cast<double>(j) * cell_px, static_cast<double>(i) * cell_px,
                          cell_px, cell_px, shade, shade, 255 - shade / 2);
            out << buf;
        }
    }
    out << "</svg>\n";
}

void render_before_after_svg(const std::vector<Pose2d>& raw, const Polygon2d& map,
                             const std::filesystem::path& file) {
    const auto raw_pts = positions(raw);
    const auto map_pts = polygon_points(map);
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    bounds(raw_pts, x0, y0, x1, y1);
    bounds(map_pts, x0, y0, x1, y1);
    SvgCanvas svg(file, x0, y0, x1, y1);
    svg.polyline(raw_pts, "#bbbbbb", 1.0);
    svg.polyline(map_pts, "#228833", 1.6, true);
}

void render_overlay_svg(const Polygon2d& truth, const Polygon2d& estimate,
                        const std::filesystem::path& file, double raster_resolution) {
    const auto t_pts = polygon_points(truth);
    const auto e_pts = polygon_points(estimate);
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    bounds(t_pts, x0, y0, x1, y1);
    bounds(e_pts, x0, y0, x1, y1);
    SvgCanvas svg(file, x0, y0, x1, y1);

    // Shade the symmetric difference cell rows merged into horizontal runs.
    const double res = raster_resolution;
    const auto nx = static_cast<Eigen::Index>(std::ceil((x1 - x0) / res)) + 2;
    const auto ny = static_cast<Eigen::Index>(std::ceil((y1 - y0) / res)) + 2;
    auto inside = [&](const Polygon2d& poly, double x, double y) {
        const Eigen::Index n = poly.size();
        bool in = false;
        for (Eigen::Index e = 0; e < n; ++e) {
            const Vec2d a = poly.vertex(e);
            const Vec2d b = poly.vertex((e + 1) % n);
            if ((a.y() <= y && b.y() > y) || (b.y() <= y && a.y() > y)) {
                if (x < a.x() + (y - a.y()) / (b.y() - a.y()) * (b.x() - a.x())) in = !in;
            }
        }
        return in;
    };
    for (Eigen::Index r = 0; r < ny; ++r) {
        const double yc = y0 - res + (static_cast<double>(r) + 0.5) * res;
        Eigen::Index run_start = -1;
        for (Eigen::Index c = 0; c <= nx; ++c) {
            bool diff = false;
            if (c < nx) {
                const double xc = x0 - res + (static_cast<double>(c) + 0.5) * res;
                diff = inside(truth, xc, yc) != inside(estimate, xc, yc);
            }
            if (diff && run_start < 0) run_start = c;
            if (!diff && run_start >= 0) {
                svg.rect_world(x0 - res + static_cast<double>(run_start) * res, yc - res / 2,
                               static_cast<double>(c - run_start) * res, res, "#aaccee");
                run_start = -1;
            }
        }
    }
    svg.polyline(t_pts, "#222222", 1.6, true);
    svg.polyline(e_pts, "#cc3311", 1.6, true);
}

}  // namespace odomap
