#pragma once

#include "odomap/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace odomap {

/// Test environment: the true boundary polygon the robot follows.
struct Environment {
    std::string name;
    Polygon2d boundary;
};

Environment load_environment(const std::filesystem::path& file);
void save_environment(const Environment& env, const std::filesystem::path& file);

/// Coefficients of the differential-drive odometry motion model. Each step
/// is decomposed into one rotation delta_r followed by one translation
/// delta_t; the sampled noise variances are
///   rotation:    alpha1 * delta_r^2 + alpha2 * delta_t^2
///   translation: alpha3 * delta_t^2 + alpha4 * delta_r^2
struct OdometryNoiseModel {
    double alpha1 = 0.0849;
    double alpha2 = 0.0412;
    double alpha3 = 0.0316;
    double alpha4 = 0.0173;

    void validate() const;
    static OdometryNoiseModel uniform(double alpha) { return {alpha, alpha, alpha, alpha}; }
    static OdometryNoiseModel zero() { return {0.0, 0.0, 0.0, 0.0}; }
};

struct SimConfig {
    double speed = 0.3;        // m/s along the boundary
    double sample_rate = 20.0; // Hz
    int laps = 2;              // boundary circuits; revisits need >= 2
    double turn_rate = 0.05;   // rad/s pivoting at corners; inf = instant
    std::uint64_t seed = 1;

    double step_length() const { return speed / sample_rate; }
    void validate() const;
};

/// Dead-reckoned trajectory with optional simulator ground truth.
struct OdometryTrace {
    std::vector<double> timestamps;
    std::vector<Pose2d> poses;      // dead-reckoned
    std::vector<Pose2d> true_poses; // empty for real datasets
    std::string rng_name;           // generator recorded for reproducibility
    std::uint64_t seed = 0;

    bool has_truth() const { return !true_poses.empty(); }
};

/// Portable Gaussian sampler: mt19937_64 bits mapped to uniforms, then the
/// basic Box-Muller transform. Avoids the unspecified std::distribution
/// algorithms so traces reproduce across standard libraries.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : gen_(seed) {}

    static constexpr const char* name() { return "mt19937_64-boxmuller"; }

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 gen_;
};

/// Samples poses along the boundary polyline at constant arclength spacing
/// speed/sample_rate, heading tangent to the current edge, for cfg.laps
/// laps. With a finite turn_rate the robot pivots in place at each corner
/// (zero-translation samples stepping the heading at turn_rate) and every
/// corner is an exact sample; with turn_rate = inf the boundary is resampled
/// purely by arclength and corners fall between samples.
std::vector<Pose2d> generate_true_path(const Environment& env, const SimConfig& cfg);

/// Corrupts a true path with the odometry motion model: each consecutive
/// pair becomes one noisy rotation followed by one noisy translation,
/// dead-reckoned from the previous noisy pose. Deterministic given seed.
OdometryTrace corrupt_odometry(const std::vector<Pose2d>& true_path,
                               const OdometryNoiseModel& model,
                               std::uint64_t seed,
                               double sample_rate = 20.0);

/// Trace CSV: optional '#' metadata lines, then header
/// t,x,y,phi[,true_x,true_y,true_phi] with %.9g fields.
void save_trace_csv(const OdometryTrace& trace, const std::filesystem::path& file);
OdometryTrace load_trace_csv(const std::filesystem::path& file);

}  // namespace odomap
