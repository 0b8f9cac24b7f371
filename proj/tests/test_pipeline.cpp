#include "odomap/pipeline.hpp"

#include "odomap/config.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace odomap;
using doctest::Approx;

TEST_CASE("noiseless square run closes onto the exact square") {
    const auto env = testing::make_env("square", testing::unit_square());
    PipelineConfig cfg = testing::small_shape_config(env.boundary);
    const auto path = generate_true_path(env, cfg.sim);
    const auto trace = corrupt_odometry(path, OdometryNoiseModel::zero(), 1);
    const auto result = run_mapping(trace.poses, cfg);

    CHECK(result.turn_filter_applied);
    CHECK_FALSE(result.closing_fell_back);
    CHECK(result.report.final_error <= result.report.initial_error);
    REQUIRE(result.map.polygon.size() == 4);

    // Each map vertex coincides with a square corner to numerical precision.
    const std::vector<Vec2d> corners = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    for (Eigen::Index k = 0; k < 4; ++k) {
        double nearest = 1e300;
        for (const auto& c : corners) {
            nearest = std::min(nearest, (result.map.polygon.vertex(k) - c).norm());
        }
        CHECK(nearest < 1e-9);
    }
    CHECK(result.map.polygon.area() == Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(result.map.closure_gap_warning);
}

TEST_CASE("mapping fails cleanly when no loop closures exist") {
    // A single straight pass has nothing to revisit.
    std::vector<Pose2d> line;
    for (int k = 0; k <= 3000; ++k) line.emplace_back(0.01 * k, 0.0, 0.0);
    PipelineConfig cfg;
    cfg.correlation.neighborhood = 3.0;
    CHECK_THROWS_AS(run_mapping(line, cfg), PipelineFailure);
}

TEST_CASE("sweep records per-cell results and summaries") {
    const auto env = testing::make_env("square", testing::unit_square());
    PipelineConfig cfg = testing::small_shape_config(env.boundary);
    const auto sweep = run_sweep(env, cfg, {0.0, 0.05}, 2);
    REQUIRE(sweep.cells.size() == 4);
    CHECK(mean_delta_a(sweep, 0.0) == Approx(0.0).epsilon(0.01));
    CHECK(failure_count(sweep, 0.0) == 0);

    const auto file = std::filesystem::temp_directory_path() / "odomap_sweep_test.csv";
    save_sweep_csv(sweep, file);
    std::ifstream in(file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("alpha,seed,delta_a") != std::string::npos);
    CHECK(text.find("# summary") != std::string::npos);
    CHECK(text.find("mean_delta_a") != std::string::npos);
    std::filesystem::remove(file);
}

TEST_CASE("configuration file and overrides reach the pipeline") {
    const auto file = std::filesystem::temp_directory_path() / "odomap_cfg_test.toml";
    {
        std::ofstream out(file);
        out << "# test configuration\n"
            << "[sim]\n"
            << "speed = 0.25\n"
            << "laps = 3\n"
            << "[loop_closure]\n"
            << "neighborhood = 12.5\n"
            << "threshold = 0.7\n"
            << "[map]\n"
            << "require_full_turn = false\n";
    }
    const auto cfg = load_config_toml(file);
    CHECK(cfg.sim.speed == Approx(0.25));
    CHECK(cfg.sim.laps == 3);
    CHECK(cfg.correlation.neighborhood == Approx(12.5));
    CHECK(cfg.correlation.threshold == Approx(0.7));
    CHECK_FALSE(cfg.require_full_turn);
    // Untouched values keep the reference defaults.
    CHECK(cfg.segmentation.min_length == Approx(0.1));
    CHECK(cfg.segmentation.max_mean_error == Approx(0.001));
    CHECK(cfg.loop_gamma_xy == Approx(1.0));
    CHECK(cfg.noise.alpha1 == Approx(0.0849));
    std::filesystem::remove(file);

    PipelineConfig cfg2;
    set_config_value(cfg2, "optimizer.lambda0", "0.01");
    CHECK(cfg2.lm.lambda0 == Approx(0.01));
    CHECK_THROWS_AS(set_config_value(cfg2, "optimizer.bogus", "1"), std::invalid_argument);
    CHECK_THROWS_AS(set_config_value(cfg2, "sim.speed", "fast"), std::invalid_argument);
}

TEST_CASE("config round trips through the TOML writer") {
    PipelineConfig cfg;
    cfg.sim.laps = 5;
    cfg.correlation.threshold = 0.42;
    cfg.require_full_turn = false;
    const auto file = std::filesystem::temp_directory_path() / "odomap_cfg_roundtrip.toml";
    save_config_toml(cfg, file);
    const auto loaded = load_config_toml(file);
    for (const auto& key : config_keys()) {
        CHECK(get_config_value(loaded, key) == get_config_value(cfg, key));
    }
    std::filesystem::remove(file);
}

TEST_CASE("defaults match the reference parameter set") {
    const PipelineConfig cfg;
    CHECK(cfg.segmentation.min_length == 0.1);
    CHECK(cfg.segmentation.max_mean_error == 0.001);
    CHECK(cfg.correlation.neighborhood == 30.0);
    CHECK(cfg.correlation.samples == 100);
    CHECK(cfg.loop_gamma_xy == 1.0);
    CHECK(cfg.loop_gamma_phi == 1.0);
    CHECK(cfg.sim.speed == 0.3);
    CHECK(cfg.sim.sample_rate == 20.0);
}

TEST_CASE("clockwise boundary traversal closes just as well") {
    const auto env = testing::make_env("square_cw", testing::unit_square().reversed());
    PipelineConfig cfg = testing::small_shape_config(env.boundary);
    const auto path = generate_true_path(env, cfg.sim);
    const auto trace = corrupt_odometry(path, OdometryNoiseModel::zero(), 1);
    const auto result = run_mapping(trace.poses, cfg);
    const auto eval = evaluate_map(result.map.polygon, testing::unit_square(), cfg.alignment);
    CHECK(eval.delta_a < 0.01);
}

TEST_CASE("non-rectilinear boundary with oblique corners maps cleanly") {
    // Scalene pentagon with no two equal edges or angles.
    const auto poly = Polygon2d::from_vertices(
        {{0, 0}, {3.0, -0.4}, {4.2, 1.8}, {2.0, 3.4}, {-0.8, 2.0}});
    const auto env = testing::make_env("pentagon", poly);
    PipelineConfig cfg;
    cfg.sim.speed = 0.3;
    cfg.correlation.neighborhood = 0.2 * poly.perimeter();
    cfg.noise = OdometryNoiseModel::zero();
    const auto path = generate_true_path(env, cfg.sim);
    const auto trace = corrupt_odometry(path, cfg.noise, 1);
    const auto result = run_mapping(trace.poses, cfg);
    const auto eval = evaluate_map(result.map.polygon, poly, cfg.alignment);
    CHECK(eval.delta_a < 0.01);
}

TEST_CASE("asymmetric boundary maps without the whole-turn filter") {
    const auto env = testing::make_env("lshape", testing::lshape());
    PipelineConfig cfg = testing::small_shape_config(env.boundary);
    cfg.require_full_turn = false;
    // Without the filter the threshold must separate true revisits (zero
    // correlation) from merely similar corners; the tight setting does.
    cfg.correlation.threshold = 0.3;
    const auto path = generate_true_path(env, cfg.sim);
    const auto trace = corrupt_odometry(path, OdometryNoiseModel::zero(), 1);
    const auto result = run_mapping(trace.poses, cfg);
    CHECK(result.used_pairs.size() == result.detected_pairs.size());
    const auto eval = evaluate_map(result.map.polygon, env.boundary, cfg.alignment);
    CHECK(eval.delta_a < 0.01);
}

TEST_CASE("three noisy laps around the courtyard stay accurate") {
    const auto env = testing::make_env("courtyard", testing::courtyard());
    PipelineConfig cfg; // reference noise coefficients
    cfg.sim.laps = 3;
    const auto path = generate_true_path(env, cfg.sim);
    const auto trace = corrupt_odometry(path, cfg.noise, 5, cfg.sim.sample_rate);
    const auto result = run_mapping(trace.poses, cfg);
    CHECK(result.report.final_error < result.report.initial_error);
    const auto eval = evaluate_map(result.map.polygon, env.boundary, cfg.alignment);
    CHECK(eval.delta_a < 0.15);
}

TEST_CASE("traces without ground-truth columns round trip and map") {
    const auto env = testing::make_env("square", testing::unit_square());
    PipelineConfig cfg = testing::small_shape_config(env.boundary);
    const auto path = generate_true_path(env, cfg.sim);
    auto trace = corrupt_odometry(path, OdometryNoiseModel::zero(), 1);
    trace.true_poses.clear(); // as delivered by a real robot
    const auto file = std::filesystem::temp_directory_path() / "odomap_truthless.csv";
    save_trace_csv(trace, file);
    const auto loaded = load_trace_csv(file);
    CHECK_FALSE(loaded.has_truth());
    REQUIRE(loaded.poses.size() == trace.poses.size());
    const auto result = run_mapping(loaded.poses, cfg);
    CHECK(result.map.polygon.size() == 4);
    std::filesystem::remove(file);
}
