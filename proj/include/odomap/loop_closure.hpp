#pragma once

#include "odomap/geometry.hpp"

#include <filesystem>
#include <limits>
#include <vector>

namespace odomap {

/// Cumulative orientation as a piecewise-constant function of traveled
/// arclength. Orientations are unwrapped: each step adds the wrapped
/// per-step heading change, so a closed boundary accumulates about 2*pi
/// per lap instead of aliasing.
struct OrientationProfile {
    Eigen::VectorXd arclengths;   // l_0 = 0 < l_1 < ... < l_N
    Eigen::VectorXd orientations; // cumulative heading at each vertex

    Eigen::Index size() const { return arclengths.size(); }
    double length() const { return arclengths(arclengths.size() - 1); }

    /// Piecewise-constant evaluation: the value on [l_i, l_{i+1}) is the
    /// cumulative orientation at vertex i, so traversing a segment reports
    /// the heading the robot held along it. Outside [0, l_N] the nearest
    /// end value is returned; callers keep windows inside the domain.
    double value_at(double x) const;

    /// Window of vertex i grounded in its own arclength and orientation:
    /// theta(x + l_i) - phi_i. Zero at x = 0 by construction.
    double grounded_at(Eigen::Index i, double x) const {
        return value_at(x + arclengths(i)) - orientations(i);
    }
};

OrientationProfile build_orientation_profile(const std::vector<Pose2d>& poses);

struct CorrelationConfig {
    double neighborhood = 30.0; // half-length of the compared window, meters
    int samples = 100;          // evaluation points per window
    double threshold = 1.0;     // max correlation error for a loop pair

    void validate() const {
        if (neighborhood <= 0 || samples < 2 || threshold <= 0) {
            throw std::invalid_argument("CorrelationConfig: invalid parameters");
        }
    }
};

inline constexpr double kNotComparable = std::numeric_limits<double>::infinity();

/// True when the window [l_i - L, l_i + L] lies inside the profile domain.
/// Vertices near the trace ends are not comparable; no padding is used.
bool window_comparable(const OrientationProfile& profile, Eigen::Index i,
                       const CorrelationConfig& cfg);

/// Grounded window of vertex i sampled at cfg.samples points linearly
/// spaced over [-L, +L]. Throws if the vertex is not comparable.
Eigen::VectorXd neighborhood_vector(const OrientationProfile& profile, Eigen::Index i,
                                    const CorrelationConfig& cfg);

/// Symmetric matrix of mean squared differences between grounded windows.
/// Each unordered pair is computed once; rows/columns of vertices whose
/// window leaves the domain hold the kNotComparable sentinel.
Eigen::MatrixXd correlation_matrix(const OrientationProfile& profile,
                                   const CorrelationConfig& cfg);

struct LoopPair {
    Eigen::Index i = 0; // earlier vertex
    Eigen::Index j = 0; // later vertex
    double c = 0.0;     // correlation error
};

struct LoopPairSet {
    std::vector<LoopPair> pairs;

    bool empty() const { return pairs.empty(); }
    std::size_t size() const { return pairs.size(); }
};

/// Entries below the threshold that are (non-strict) local minima of the
/// matrix over their 8-neighborhood, restricted to i < j and to pairs at
/// least one neighborhood length apart along the path (closer pairs match
/// their own surroundings trivially).
LoopPairSet detect_loop_pairs(const Eigen::MatrixXd& correlation,
                              const OrientationProfile& profile,
                              const CorrelationConfig& cfg);

/// Median arclength over which the cumulative orientation advances one
/// full turn: the lap length of a closed boundary, immune to global
/// heading drift because each gap only spans its own lap. Returns 0 when
/// the profile never comes around.
double estimate_lap_length(const OrientationProfile& profile);

/// Keeps pairs that look like true boundary revisits: their orientation
/// difference spans whole turns (2*pi*k, k >= 1, allowing the shared
/// per-lap heading drift estimated as the median residual) and their
/// arclength separation is a whole number of turn-normalized lap lengths.
/// Shape matches between distinct corners of a symmetric boundary fail
/// these tests and are dropped. If no pair qualifies the input is returned
/// unchanged and *applied is false.
LoopPairSet filter_full_turn_pairs(const LoopPairSet& pairs, const OrientationProfile& profile,
                                   double turn_tolerance, bool* applied = nullptr);

/// CSV export of the correlation matrix (inf sentinels written as "inf").
void save_correlation_csv(const Eigen::MatrixXd& correlation, const std::filesystem::path& file);

}  // namespace odomap
