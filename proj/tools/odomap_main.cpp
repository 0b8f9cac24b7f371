#include "odomap/config.hpp"
#include "odomap/pipeline.hpp"
#include "odomap/svg.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitPipeline = 4;

struct CommonOptions {
    std::string config_file;
    std::map<std::string, std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string plot_dir;
};

void register_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--config", common.config_file, "flat TOML configuration file");
    cmd->add_option_function<std::uint64_t>(
           "--seed",
           [&common](std::uint64_t v) {
               common.seed = v;
               common.seed_set = true;
           },
           "random seed (overrides sim.seed)");
    cmd->add_option("--plot", common.plot_dir, "directory for SVG plots");
    for (const auto& key : odomap::config_keys()) {
        cmd->add_option_function<std::string>(
            "--" + key,
            [&common, key](const std::string& v) { common.overrides[key] = v; },
            "override parameter " + key);
    }
}

odomap::PipelineConfig resolve_config(const CommonOptions& common) {
    odomap::PipelineConfig cfg;
    if (!common.config_file.empty()) {
        cfg = odomap::load_config_toml(common.config_file, cfg);
    }
    for (const auto& [key, value] : common.overrides) {
        odomap::set_config_value(cfg, key, value);
    }
    if (common.seed_set) cfg.sim.seed = common.seed;
    return cfg;
}

std::filesystem::path ensure_plot_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

std::vector<double> parse_alpha_list(const std::string& text) {
    std::vector<double> alphas;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        if (!item.empty()) alphas.push_back(std::stod(item));
        pos = comma + 1;
    }
    if (alphas.empty()) throw std::invalid_argument("sweep: empty alpha list");
    return alphas;
}

int run_simulate(const std::string& env_file, const std::string& out_file,
                 const CommonOptions& common) {
    const auto cfg = resolve_config(common);
    cfg.sim.validate();
    cfg.noise.validate();
    if (cfg.sim.laps < 2) {
        std::cerr << "warning: loop closure needs at least 2 laps; got " << cfg.sim.laps << "\n";
    }
    const auto env = odomap::load_environment(env_file);
    const auto path = odomap::generate_true_path(env, cfg.sim);
    const auto trace =
        odomap::corrupt_odometry(path, cfg.noise, cfg.sim.seed, cfg.sim.sample_rate);
    odomap::save_trace_csv(trace, out_file);
    double arclength = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        arclength += (path[k + 1].position() - path[k].position()).norm();
    }
    std::cout << "simulate: " << path.size() << " poses, " << arclength << " m along '"
              << env.name << "' -> " << out_file << "\n";
    return kExitOk;
}

int run_map(const std::string& trace_file, const std::string& out_file,
            const std::string& report_file, const std::string& graph_file,
            const std::string& truth_file, const CommonOptions& common) {
    const auto cfg = resolve_config(common);
    const auto trace = odomap::load_trace_csv(trace_file);
    const auto result = odomap::run_mapping(trace.poses, cfg);

    odomap::Environment map_env{"map_estimate", result.map.polygon};
    odomap::save_environment(map_env, out_file);
    if (!report_file.empty()) odomap::save_report_json(result.report, report_file);
    if (!graph_file.empty()) odomap::save_graph(result.optimized, graph_file);

    std::cout << "map: " << result.dominant_points.size() << " dominant points, "
              << result.used_pairs.size() << " loop pairs ("
              << result.detected_pairs.size() << " detected), error "
              << result.report.initial_error << " -> " << result.report.final_error << ", polygon "
              << result.map.polygon.size() << " vertices -> " << out_file << "\n";
    if (!result.turn_filter_applied && cfg.require_full_turn) {
        std::cerr << "warning: no loop pair closes a whole turn; using unfiltered pairs\n";
    }
    if (result.closing_fell_back) {
        std::cerr << "warning: closing pair chosen by median separation, not by a whole turn\n";
    }
    if (result.map.closure_gap_warning) {
        std::cerr << "warning: closing pair ends more than " << odomap::kClosureGapWarning
                  << " m apart after optimization\n";
    }
    if (result.map.self_intersection_warning) {
        std::cerr << "warning: closed map polygon self-intersects\n";
    }

    if (!common.plot_dir.empty()) {
        const auto dir = ensure_plot_dir(common.plot_dir);
        odomap::render_path_svg(trace.poses, result.dominant_points, dir / "path.svg");
        odomap::render_heatmap_svg(result.correlation, dir / "correlation.svg");
        odomap::render_before_after_svg(trace.poses, result.map.polygon,
                                        dir / "before_after.svg");
        odomap::save_dominant_points_csv(result.dominant_points, dir / "dominant_points.csv");
        odomap::save_correlation_csv(result.correlation, dir / "correlation.csv");
    }
    if (!truth_file.empty()) {
        const auto truth = odomap::load_environment(truth_file);
        const auto eval = odomap::evaluate_map(result.map.polygon, truth.boundary, cfg.alignment);
        std::cout << "map: delta_a vs '" << truth.name << "' = " << eval.delta_a * 100.0 << " %\n";
    }
    return kExitOk;
}

int run_evaluate(const std::string& map_file, const std::string& truth_file,
                 const std::string& report_file, const CommonOptions& common) {
    const auto cfg = resolve_config(common);
    const auto estimate = odomap::load_environment(map_file);
    const auto truth = odomap::load_environment(truth_file);
    const auto eval = odomap::evaluate_map(estimate.boundary, truth.boundary, cfg.alignment);
    std::cout << "evaluate: delta_a = " << eval.delta_a * 100.0 << " % (initial "
              << eval.horn_delta_a * 100.0 << " %), rotation " << eval.transform.angle
              << " rad, translation (" << eval.transform.translation.x() << ", "
              << eval.transform.translation.y() << ") m, " << eval.iterations << " iterations\n";
    if (!report_file.empty()) odomap::save_evaluation_json(eval, report_file);
    if (!common.plot_dir.empty()) {
        const auto dir = ensure_plot_dir(common.plot_dir);
        odomap::render_overlay_svg(truth.boundary, eval.transform.apply(estimate.boundary),
                                   dir / "overlay.svg", cfg.alignment.raster_resolution);
    }
    return kExitOk;
}

int run_sweep(const std::string& env_file, const std::string& out_file, const std::string& alphas,
              int seeds, const CommonOptions& common) {
    const auto cfg = resolve_config(common);
    const auto env = odomap::load_environment(env_file);
    const auto alpha_list = parse_alpha_list(alphas);
    const auto sweep = odomap::run_sweep(env, cfg, alpha_list, seeds);
    odomap::save_sweep_csv(sweep, out_file);
    for (const double alpha : alpha_list) {
        std::cout << "sweep: alpha " << alpha << ": mean delta_a "
                  << odomap::mean_delta_a(sweep, alpha) * 100.0 << " %, failures "
                  << odomap::failure_count(sweep, alpha) << "/" << seeds << "\n";
    }
    std::cout << "sweep: results -> " << out_file << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary mapping from wall-following odometry"};
    app.require_subcommand(1);

    CommonOptions common;

    std::string env_file, trace_file, map_file, truth_file, out_file;
    std::string report_file, graph_file, alphas = "0.1,0.2,0.3,0.4,0.5";
    int seeds = 10;

    auto* simulate = app.add_subcommand("simulate", "generate an odometry trace CSV");
    simulate->add_option("env", env_file, "environment JSON")->required();
    simulate->add_option("-o,--output", out_file, "trace CSV path")->required();
    register_common(simulate, common);

    auto* map_cmd = app.add_subcommand("map", "estimate a boundary map from a trace");
    map_cmd->add_option("trace", trace_file, "trace CSV")->required();
    map_cmd->add_option("-o,--output", out_file, "map JSON path")->required();
    map_cmd->add_option("--report", report_file, "optimization report JSON path");
    map_cmd->add_option("--graph", graph_file, "optimized pose graph text path");
    map_cmd->add_option("--truth", truth_file, "environment JSON to score against");
    register_common(map_cmd, common);

    auto* evaluate = app.add_subcommand("evaluate", "score a map against a true boundary");
    evaluate->add_option("map", map_file, "map JSON")->required();
    evaluate->add_option("truth", truth_file, "environment JSON")->required();
    evaluate->add_option("--report", report_file, "evaluation report JSON path");
    register_common(evaluate, common);

    auto* sweep = app.add_subcommand("sweep", "run the pipeline over noise levels and seeds");
    sweep->add_option("env", env_file, "environment JSON")->required();
    sweep->add_option("-o,--output", out_file, "sweep CSV path")->required();
    sweep->add_option("--alphas", alphas, "comma-separated noise levels");
    sweep->add_option("--seeds", seeds, "seeds per noise level");
    register_common(sweep, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(env_file, out_file, common);
        if (map_cmd->parsed()) {
            return run_map(trace_file, out_file, report_file, graph_file, truth_file, common);
        }
        if (evaluate->parsed()) return run_evaluate(map_file, truth_file, report_file, common);
        if (sweep->parsed()) return run_sweep(env_file, out_file, alphas, seeds, common);
    } catch (const odomap::PipelineFailure& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
