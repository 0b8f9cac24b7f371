#include "odomap/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace odomap {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + key + ": expected a number, got '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v != std::floor(v)) {
        throw std::invalid_argument("config: " + key + ": expected an integer, got '" + value + "'");
    }
    return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw std::invalid_argument("config: " + key + ": expected an unsigned integer, got '" +
                                    value + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw std::invalid_argument("config: " + key + ": expected true or false, got '" + value + "'");
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct Entry {
    std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

#define ODOMAP_DOUBLE_ENTRY(field)                                                       \
    Entry {                                                                              \
        [](PipelineConfig& c, const std::string& k, const std::string& v) {             \
            c.field = parse_double(k, v);                                                \
        },                                                                               \
            [](const PipelineConfig& c) { return format_number(c.field); }               \
    }
#define ODOMAP_INT_ENTRY(field)                                                          \
    Entry {                                                                              \
        [](PipelineConfig& c, const std::string& k, const std::string& v) {             \
            c.field = parse_int(k, v);                                                   \
        },                                                                               \
            [](const PipelineConfig& c) { return std::to_string(c.field); }              \
    }

const std::map<std::string, Entry>& entries() {
    static const std::map<std::string, Entry> table = {
        {"sim.speed", ODOMAP_DOUBLE_ENTRY(sim.speed)},
        {"sim.sample_rate", ODOMAP_DOUBLE_ENTRY(sim.sample_rate)},
        {"sim.laps", ODOMAP_INT_ENTRY(sim.laps)},
        {"sim.turn_rate", ODOMAP_DOUBLE_ENTRY(sim.turn_rate)},
        {"sim.seed",
         Entry{[](PipelineConfig& c, const std::string& k, const std::string& v) {
                   c.sim.seed = parse_u64(k, v);
               },
               [](const PipelineConfig& c) { return std::to_string(c.sim.seed); }}},
        {"noise.alpha1", ODOMAP_DOUBLE_ENTRY(noise.alpha1)},
        {"noise.alpha2", ODOMAP_DOUBLE_ENTRY(noise.alpha2)},
        {"noise.alpha3", ODOMAP_DOUBLE_ENTRY(noise.alpha3)},
        {"noise.alpha4", ODOMAP_DOUBLE_ENTRY(noise.alpha4)},
        {"segmentation.min_length", ODOMAP_DOUBLE_ENTRY(segmentation.min_length)},
        {"segmentation.max_mean_error", ODOMAP_DOUBLE_ENTRY(segmentation.max_mean_error)},
        {"loop_closure.neighborhood", ODOMAP_DOUBLE_ENTRY(correlation.neighborhood)},
        {"loop_closure.samples", ODOMAP_INT_ENTRY(correlation.samples)},
        {"loop_closure.threshold", ODOMAP_DOUBLE_ENTRY(correlation.threshold)},
        {"optimizer.max_iterations", ODOMAP_INT_ENTRY(lm.max_iterations)},
        {"optimizer.lambda0", ODOMAP_DOUBLE_ENTRY(lm.lambda0)},
        {"optimizer.lambda_up", ODOMAP_DOUBLE_ENTRY(lm.lambda_up)},
        {"optimizer.lambda_down", ODOMAP_DOUBLE_ENTRY(lm.lambda_down)},
        {"optimizer.lambda_max", ODOMAP_DOUBLE_ENTRY(lm.lambda_max)},
        {"optimizer.tol_dx", ODOMAP_DOUBLE_ENTRY(lm.tol_dx)},
        {"optimizer.tol_de", ODOMAP_DOUBLE_ENTRY(lm.tol_de)},
        {"alignment.raster_resolution", ODOMAP_DOUBLE_ENTRY(alignment.raster_resolution)},
        {"alignment.gd_step0", ODOMAP_DOUBLE_ENTRY(alignment.gd_step0)},
        {"alignment.gd_max_iters", ODOMAP_INT_ENTRY(alignment.gd_max_iters)},
        {"alignment.fd_epsilon_cells", ODOMAP_DOUBLE_ENTRY(alignment.fd_epsilon_cells)},
        {"alignment.match_lnh_fraction", ODOMAP_DOUBLE_ENTRY(alignment.match_lnh_fraction)},
        {"alignment.match_samples", ODOMAP_INT_ENTRY(alignment.match_samples)},
        {"alignment.match_threshold", ODOMAP_DOUBLE_ENTRY(alignment.match_threshold)},
        {"alignment.coarse_angles", ODOMAP_INT_ENTRY(alignment.coarse_angles)},
        {"graph.loop_gamma_xy", ODOMAP_DOUBLE_ENTRY(loop_gamma_xy)},
        {"graph.loop_gamma_phi", ODOMAP_DOUBLE_ENTRY(loop_gamma_phi)},
        {"graph.covariance_floor", ODOMAP_DOUBLE_ENTRY(covariance_floor)},
        {"map.turn_tolerance", ODOMAP_DOUBLE_ENTRY(turn_tolerance)},
        {"map.require_full_turn",
         Entry{[](PipelineConfig& c, const std::string& k, const std::string& v) {
                   c.require_full_turn = parse_bool(k, v);
               },
               [](const PipelineConfig& c) {
                   return std::string(c.require_full_turn ? "true" : "false");
               }}},
    };
    return table;
}

#undef ODOMAP_DOUBLE_ENTRY
#undef ODOMAP_INT_ENTRY

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    keys.reserve(entries().size());
    for (const auto& [key, entry] : entries()) keys.push_back(key);
    return keys;
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    const auto it = entries().find(key);
    if (it == entries().end()) {
        throw std::invalid_argument("config: unknown parameter '" + key + "'");
    }
    it->second.set(cfg, key, value);
}

std::string get_config_value(const PipelineConfig& cfg, const std::string& key) {
    const auto it = entries().find(key);
    if (it == entries().end()) {
        throw std::invalid_argument("config: unknown parameter '" + key + "'");
    }
    return it->second.get(cfg);
}

PipelineConfig load_config_toml(const std::filesystem::path& file, PipelineConfig base) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("config: cannot open '" + file.string() + "'");
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config: " + file.string() + ":" +
                                            std::to_string(line_no) + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: " + file.string() + ":" +
                                        std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        const std::string dotted = section.empty() ? key : section + "." + key;
        try {
            set_config_value(base, dotted, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(file.string() + ":" + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
    return base;
}

void save_config_toml(const PipelineConfig& cfg, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("config: cannot write '" + file.string() + "'");
    std::string current_section;
    for (const auto& key : config_keys()) {
        const auto dot = key.find('.');
        const std::string section = key.substr(0, dot);
        if (section != current_section) {
            if (!current_section.empty()) out << '\n';
            out << '[' << section << "]\n";
            current_section = section;
        }
        out << key.substr(dot + 1) << " = " << get_config_value(cfg, key) << '\n';
    }
}

}  // namespace odomap
