#include "odomap/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace odomap {

void PipelineConfig::validate() const {
    sim.validate();
    noise.validate();
    segmentation.validate();
    correlation.validate();
    lm.validate();
    alignment.validate();
    if (loop_gamma_xy <= 0 || loop_gamma_phi <= 0) {
        throw std::invalid_argument("PipelineConfig: loop covariance scales must be > 0");
    }
    if (covariance_floor <= 0) {
        throw std::invalid_argument("PipelineConfig: covariance floor must be > 0");
    }
    if (turn_tolerance <= 0 || turn_tolerance >= std::numbers::pi) {
        throw std::invalid_argument("PipelineConfig: turn tolerance must be in (0, pi)");
    }
}

MappingResult run_mapping(const std::vector<Pose2d>& dead_reckoned, const PipelineConfig& cfg) {
    cfg.validate();
    if (dead_reckoned.size() < 2) {
        throw PipelineFailure("mapping: trace has fewer than 2 poses");
    }

    MappingResult result;
    Points2d trace(2, static_cast<Eigen::Index>(dead_reckoned.size()));
    for (std::size_t k = 0; k < dead_reckoned.size(); ++k) {
        trace.col(static_cast<Eigen::Index>(k)) = dead_reckoned[k].position();
    }

    result.dominant_points = segment_path(trace, cfg.segmentation);
    if (result.dominant_points.size() < 4) {
        throw PipelineFailure("mapping: segmentation produced fewer than 4 dominant points");
    }
    result.poses = poses_from_dominant_points(result.dominant_points);
    result.profile = build_orientation_profile(result.poses);
    result.correlation = correlation_matrix(result.profile, cfg.correlation);
    result.detected_pairs = detect_loop_pairs(result.correlation, result.profile, cfg.correlation);
    if (result.detected_pairs.empty()) {
        throw PipelineFailure(
            "mapping: no loop closures found; consider a larger correlation threshold or more laps");
    }
    result.used_pairs = cfg.require_full_turn
                            ? filter_full_turn_pairs(result.detected_pairs, result.profile,
                                                     cfg.turn_tolerance, &result.turn_filter_applied)
                            : result.detected_pairs;

    result.graph = add_loop_closures(build_graph(result.poses, cfg.noise, cfg.covariance_floor),
                                     result.used_pairs, cfg.loop_gamma_xy, cfg.loop_gamma_phi,
                                     cfg.covariance_floor);
    auto [optimized, report] = lm_optimize(result.graph, cfg.lm);
    result.optimized = std::move(optimized);
    result.report = std::move(report);

    const auto pair = select_closing_pair(result.used_pairs, result.profile, cfg.turn_tolerance,
                                          &result.closing_fell_back);
    if (pair.second - pair.first < 3) {
        throw PipelineFailure(
            "mapping: closing pair spans fewer than 3 vertices; no usable loop closure found");
    }
    result.map = close_polygon(result.optimized, pair);
    return result;
}

SweepResult run_sweep(const Environment& env, const PipelineConfig& cfg,
                      const std::vector<double>& alphas, int seeds_per_alpha) {
    if (alphas.empty() || seeds_per_alpha < 1) {
        throw std::invalid_argument("run_sweep: need alphas and at least one seed");
    }
    SweepResult sweep;
    sweep.alphas = alphas;
    const auto true_path = generate_true_path(env, cfg.sim);
    for (const double alpha : alphas) {
        PipelineConfig run_cfg = cfg;
        run_cfg.noise = OdometryNoiseModel::uniform(alpha);
        for (int s = 0; s < seeds_per_alpha; ++s) {
            SweepCell cell;
            cell.alpha = alpha;
            cell.seed = cfg.sim.seed + static_cast<std::uint64_t>(s);
            try {
                const auto trace =
                    corrupt_odometry(true_path, run_cfg.noise, cell.seed, cfg.sim.sample_rate);
                const auto mapping = run_mapping(trace.poses, run_cfg);
                const auto eval =
                    evaluate_map(mapping.map.polygon, env.boundary, run_cfg.alignment);
                cell.delta_a = eval.delta_a;
            } catch (const std::exception&) {
                cell.delta_a.reset();
            }
            sweep.cells.push_back(cell);
        }
    }
    return sweep;
}

double mean_delta_a(const SweepResult& sweep, double alpha) {
    double sum = 0.0;
    int n = 0;
    for (const auto& cell : sweep.cells) {
        if (cell.alpha == alpha && cell.delta_a) {
            sum += *cell.delta_a;
            ++n;
        }
    }
    return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

int failure_count(const SweepResult& sweep, double alpha) {
    int n = 0;
    for (const auto& cell : sweep.cells) {
        if (cell.alpha == alpha && !cell.delta_a) ++n;
    }
    return n;
}

void save_sweep_csv(const SweepResult& sweep, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error(file.string() + ": cannot write sweep results");
    char buf[128];
    out << "alpha,seed,delta_a\n";
    for (const auto& cell : sweep.cells) {
        if (cell.delta_a) {
            std::snprintf(buf, sizeof(buf), "%.9g,%llu,%.9g\n", cell.alpha,
                          static_cast<unsigned long long>(cell.seed), *cell.delta_a);
        } else {
            std::snprintf(buf, sizeof(buf), "%.9g,%llu,\n", cell.alpha,
                          static_cast<unsigned long long>(cell.seed));
        }
        out << buf;
    }
    out << "# summary\n";
    out << "alpha,mean_delta_a,std_delta_a,runs,failures\n";
    for (const double alpha : sweep.alphas) {
        std::vector<double> values;
        int failures = 0;
        for (const auto& cell : sweep.cells) {
            if (cell.alpha != alpha) continue;
            if (cell.delta_a) {
                values.push_back(*cell.delta_a);
            } else {
                ++failures;
            }
        }
        double mean = std::numeric_limits<double>::quiet_NaN();
        double stddev = std::numeric_limits<double>::quiet_NaN();
        if (!values.empty()) {
            mean = 0.0;
            for (const double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            if (values.size() > 1) {
                double ss = 0.0;
                for (const double v : values) ss += (v - mean) * (v - mean);
                stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
            }
        }
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%zu,%d\n", alpha, mean, stddev,
                      values.size(), failures);
        out << buf;
    }
}

}  // namespace odomap
