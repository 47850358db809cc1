#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voltpath/battery.hpp"
#include "voltpath/models.hpp"

namespace voltpath {

struct Node {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct Edge {
    int from = 0;
    int to = 0;
    double cost = 0.0;     // distance units
    double power_w = 0.0;  // constant draw while traversing
    double time_s = 0.0;   // traversal duration
};

/// Generator settings embedded in saved instances for provenance.
struct GenProvenance {
    int n = 0;
    std::uint64_t seed = 0;
    double extent_m = 0.0;
    double speed_mps = 0.0;
    double p_min_w = 0.0;
    double p_max_w = 0.0;
};

/// A routing problem: directed graph, start/goal, battery, initial charge,
/// and the linear coefficients used by the linear resource constraint.
struct Instance {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    int start = 0;
    int goal = 0;
    BatteryParams battery;
    double soc0 = 1.0;
    LinearFit fit;
    std::optional<GenProvenance> provenance;
};

void validate(const Instance& instance);

struct GenConfig {
    double extent_m = 10000.0;
    double speed_mps = 20.0;
    double p_min_w = 200.0;
    double p_max_w = 600.0;
    BatteryConfig battery = default_lipo_4s();
    double soc0 = 1.0;
    /// Fitted from `battery` over [p_min_w, p_max_w] when absent.
    std::optional<LinearFit> fit;
};

/// Scatters n nodes uniformly in the extent square, connects each to its 4
/// nearest neighbors (both directions, shared power draw per node pair),
/// cost = Euclidean distance, time = distance / speed, start/goal = nodes
/// nearest opposite corners. Deterministic in (n, seed, config).
Instance generate_instance(int n, std::uint64_t seed, const GenConfig& config = GenConfig{});

std::string save_instance(const Instance& instance);
void save_instance_file(const Instance& instance, const std::filesystem::path& path);
Instance load_instance(const std::string& json_text);
Instance load_instance_file(const std::filesystem::path& path);

}  // namespace voltpath
