#pragma once

#include "odomap/evaluation.hpp"
#include "odomap/loop_closure.hpp"
#include "odomap/map_gen.hpp"
#include "odomap/optimizer.hpp"
#include "odomap/pose_graph.hpp"
#include "odomap/segmentation.hpp"
#include "odomap/sim.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace odomap {

/// Everything the end-to-end boundary mapper needs, with defaults matching
/// the reference parameter set (min_length 0.1 m, max_mean_error 0.001,
/// neighborhood 30 m, 100 samples, unit loop-closure scales).
struct PipelineConfig {
    SimConfig sim;
    OdometryNoiseModel noise;
    SegmentationConfig segmentation;
    CorrelationConfig correlation;
    LmConfig lm;
    AlignmentConfig alignment;
    double loop_gamma_xy = 1.0;   // loop-closure covariance scale, position
    double loop_gamma_phi = 1.0;  // loop-closure covariance scale, heading
    double covariance_floor = kDefaultCovarianceFloor;
    double turn_tolerance = kDefaultTurnTolerance;
    bool require_full_turn = true; // drop pairs that are not whole turns

    void validate() const;
};

/// Pipeline-stage failure (for example: no loop closures found). Carries a
/// remedy hint surfaced by the CLI.
struct PipelineFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MappingResult {
    DominantPointSet dominant_points;
    std::vector<Pose2d> poses;
    OrientationProfile profile;
    Eigen::MatrixXd correlation;
    LoopPairSet detected_pairs; // all local minima below threshold
    LoopPairSet used_pairs;     // after the whole-turn filter
    bool turn_filter_applied = false;
    bool closing_fell_back = false;
    PoseGraph graph;           // with loop closures, before optimization
    PoseGraph optimized;
    OptimizationReport report;
    MapEstimate map;
};

/// Segmentation -> loop closure -> graph -> optimization -> closed map.
/// Throws PipelineFailure when no usable loop closures exist.
MappingResult run_mapping(const std::vector<Pose2d>& dead_reckoned, const PipelineConfig& cfg);

struct SweepCell {
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> delta_a; // empty when the run failed
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<double> alphas;
};

/// Full pipeline for every (alpha, seed) cell; failed cells are recorded as
/// missing rather than aborting the sweep.
SweepResult run_sweep(const Environment& env, const PipelineConfig& cfg,
                      const std::vector<double>& alphas, int seeds_per_alpha);

/// CSV with one row per run plus a per-alpha summary block (mean and sample
/// standard deviation over the successful runs).
void save_sweep_csv(const SweepResult& sweep, const std::filesystem::path& file);

double mean_delta_a(const SweepResult& sweep, double alpha);
int failure_count(const SweepResult& sweep, double alpha);

}  // namespace odomap
