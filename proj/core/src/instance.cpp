#include "voltpath/instance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "fit_json.hpp"
#include "json_util.hpp"

namespace voltpath {

void validate(const Instance& instance) {
    if (instance.nodes.empty()) {
        throw ValidationError("nodes: must be non-empty");
    }
    std::unordered_set<int> ids;
    for (const auto& node : instance.nodes) {
        if (!ids.insert(node.id).second) {
            throw ValidationError("nodes: duplicate id " + std::to_string(node.id));
        }
        if (!std::isfinite(node.x) || !std::isfinite(node.y)) {
            throw ValidationError("nodes: non-finite coordinates at id " +
                                  std::to_string(node.id));
        }
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& e : instance.edges) {
        const std::string tag =
            "edge " + std::to_string(e.from) + "->" + std::to_string(e.to);
        if (e.from == e.to) {
            throw ValidationError(tag + ": self-loop");
        }
        if (!ids.count(e.from) || !ids.count(e.to)) {
            throw ValidationError(tag + ": endpoint is not a node id");
        }
        if (!seen.insert({e.from, e.to}).second) {
            throw ValidationError(tag + ": duplicate directed edge");
        }
        if (!(e.cost > 0.0) || !std::isfinite(e.cost)) {
            throw ValidationError(tag + ": cost must be > 0");
        }
        if (!(e.power_w >= 0.0) || !std::isfinite(e.power_w)) {
            throw ValidationError(tag + ": power_w must be >= 0");
        }
        if (!(e.time_s > 0.0) || !std::isfinite(e.time_s)) {
            throw ValidationError(tag + ": time_s must be > 0");
        }
    }
    if (instance.start == instance.goal) {
        throw ValidationError("start: must differ from goal");
    }
    if (!ids.count(instance.start)) {
        throw ValidationError("start: not a node id");
    }
    if (!ids.count(instance.goal)) {
        throw ValidationError("goal: not a node id");
    }
    validate(instance.battery);
    if (!(instance.soc0 >= 0.0 && instance.soc0 <= instance.battery.soc_max)) {
        throw ValidationError("soc0: must be within [0, soc_max]");
    }
    // The fit is deliberately not sign-checked here: instances carrying an
    // unsafe fit must load so the labeling solver can refuse them itself.
}

Instance generate_instance(int n, std::uint64_t seed, const GenConfig& config) {
    if (n < 2) {
        throw ValidationError("n: must be >= 2");
    }
    if (!(config.extent_m > 0.0)) {
        throw ValidationError("extent_m: must be > 0");
    }
    if (!(config.speed_mps > 0.0)) {
        throw ValidationError("speed_mps: must be > 0");
    }
    if (!(config.p_min_w >= 0.0) || !(config.p_max_w >= config.p_min_w)) {
        throw ValidationError("power range: need 0 <= p_min_w <= p_max_w");
    }
    validate(config.battery.params);

    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };

    Instance instance;
    instance.nodes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = uniform01() * config.extent_m;
        const double y = uniform01() * config.extent_m;
        instance.nodes.push_back(Node{i, x, y});
    }

    auto dist = [&](int i, int j) {
        const double dx = instance.nodes[i].x - instance.nodes[j].x;
        const double dy = instance.nodes[i].y - instance.nodes[j].y;
        return std::hypot(dx, dy);
    };

    // Each node links to its nearest neighbors in both directions; the two
    // directions of a node pair share one power draw, assigned when the
    // pair first appears so the draw order is reproducible.
    const int k_neighbors = std::min(4, n - 1);
    std::set<std::pair<int, int>> present;
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> order;
        order.reserve(static_cast<std::size_t>(n) - 1);
        for (int j = 0; j < n; ++j) {
            if (j != i) {
                order.push_back({dist(i, j), j});
            }
        }
        std::sort(order.begin(), order.end());
        for (int k = 0; k < k_neighbors; ++k) {
            const int j = order[static_cast<std::size_t>(k)].second;
            if (present.count({i, j})) {
                continue;
            }
            const double power =
                config.p_min_w + (config.p_max_w - config.p_min_w) * uniform01();
            const double d = dist(i, j);
            instance.edges.push_back(Edge{i, j, d, power, d / config.speed_mps});
            present.insert({i, j});
            if (!present.count({j, i})) {
                instance.edges.push_back(Edge{j, i, d, power, d / config.speed_mps});
                present.insert({j, i});
            }
        }
    }
    std::sort(instance.edges.begin(), instance.edges.end(), [](const Edge& a, const Edge& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });

    auto nearest = [&](double cx, double cy, int exclude) {
        int best = -1;
        double best_d = 0.0;
        for (const auto& node : instance.nodes) {
            if (node.id == exclude) {
                continue;
            }
            const double d = std::hypot(node.x - cx, node.y - cy);
            if (best < 0 || d < best_d) {
                best = node.id;
                best_d = d;
            }
        }
        return best;
    };
    instance.start = nearest(0.0, 0.0, -1);
    instance.goal = nearest(config.extent_m, config.extent_m, instance.start);

    instance.battery = config.battery.params;
    instance.soc0 = config.soc0;
    instance.fit = config.fit ? *config.fit
                              : fit_linear(config.battery.curve, config.battery.params,
                                           default_soc_grid(),
                                           uniform_power_grid(config.p_min_w, config.p_max_w));
    instance.provenance = GenProvenance{n,      seed,           config.extent_m,
                                        config.speed_mps, config.p_min_w, config.p_max_w};
    validate(instance);
    return instance;
}

namespace {

nlohmann::json params_to_json(const BatteryParams& p) {
    return nlohmann::json{
        {"capacity_coulombs", p.capacity_coulombs}, {"r0_ohm", p.r0_ohm},
        {"r1_ohm", p.r1_ohm},                       {"tau_s", p.tau_s},
        {"v_nom", p.v_nom},                         {"soc_max", p.soc_max},
    };
}

BatteryParams params_from_json(const nlohmann::json& doc) {
    BatteryParams p;
    p.capacity_coulombs = detail::require_number(doc, "capacity_coulombs");
    p.r0_ohm = detail::require_number(doc, "r0_ohm");
    p.r1_ohm = detail::number_or(doc, "r1_ohm", 0.0);
    p.tau_s = detail::number_or(doc, "tau_s", 1.0);
    p.v_nom = detail::require_number(doc, "v_nom");
    p.soc_max = detail::number_or(doc, "soc_max", 1.0);
    return p;
}

}  // namespace

std::string save_instance(const Instance& instance) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : instance.nodes) {
        nodes.push_back({{"id", node.id}, {"x", node.x}, {"y", node.y}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : instance.edges) {
        edges.push_back({{"from", e.from},
                         {"to", e.to},
                         {"cost", e.cost},
                         {"power_w", e.power_w},
                         {"time_s", e.time_s}});
    }
    nlohmann::json doc{
        {"nodes", nodes},
        {"edges", edges},
        {"start", instance.start},
        {"goal", instance.goal},
        {"battery", params_to_json(instance.battery)},
        {"soc0", instance.soc0},
        {"fit", detail::fit_to_json(instance.fit)},
    };
    if (instance.provenance) {
        const auto& p = *instance.provenance;
        doc["provenance"] = {{"n", p.n},
                             {"seed", p.seed},
                             {"extent_m", p.extent_m},
                             {"speed_mps", p.speed_mps},
                             {"p_min_w", p.p_min_w},
                             {"p_max_w", p.p_max_w}};
    }
    return doc.dump(2) + "\n";
}

void save_instance_file(const Instance& instance, const std::filesystem::path& path) {
    detail::write_file(path, save_instance(instance));
}

Instance load_instance(const std::string& json_text) {
    const auto doc = detail::parse_json(json_text, "instance");
    Instance instance;
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ValidationError("nodes: missing or not an array");
    }
    for (const auto& node : doc["nodes"]) {
        if (!node.contains("id") || !node["id"].is_number_integer()) {
            throw ValidationError("nodes: id missing or not an integer");
        }
        instance.nodes.push_back(Node{node["id"].get<int>(), detail::require_number(node, "x"),
                                      detail::require_number(node, "y")});
    }
    if (!doc.contains("edges") || !doc["edges"].is_array()) {
        throw ValidationError("edges: missing or not an array");
    }
    for (const auto& e : doc["edges"]) {
        if (!e.contains("from") || !e["from"].is_number_integer() || !e.contains("to") ||
            !e["to"].is_number_integer()) {
            throw ValidationError("edges: from/to missing or not integers");
        }
        instance.edges.push_back(Edge{e["from"].get<int>(), e["to"].get<int>(),
                                      detail::require_number(e, "cost"),
                                      detail::require_number(e, "power_w"),
                                      detail::require_number(e, "time_s")});
    }
    if (!doc.contains("start") || !doc["start"].is_number_integer() || !doc.contains("goal") ||
        !doc["goal"].is_number_integer()) {
        throw ValidationError("start/goal: missing or not integers");
    }
    instance.start = doc["start"].get<int>();
    instance.goal = doc["goal"].get<int>();
    if (!doc.contains("battery") || !doc["battery"].is_object()) {
        throw ValidationError("battery: missing or not an object");
    }
    instance.battery = params_from_json(doc["battery"]);
    instance.soc0 = detail::require_number(doc, "soc0");
    if (!doc.contains("fit") || !doc["fit"].is_object()) {
        throw ValidationError("fit: missing or not an object");
    }
    instance.fit = detail::fit_from_json(doc["fit"]);
    if (doc.contains("provenance")) {
        const auto& p = doc["provenance"];
        GenProvenance prov;
        if (!p.contains("n") || !p["n"].is_number_integer() || !p.contains("seed") ||
            !p["seed"].is_number_unsigned()) {
            throw ValidationError("provenance: n/seed missing or malformed");
        }
        prov.n = p["n"].get<int>();
        prov.seed = p["seed"].get<std::uint64_t>();
        prov.extent_m = detail::require_number(p, "extent_m");
        prov.speed_mps = detail::require_number(p, "speed_mps");
        prov.p_min_w = detail::require_number(p, "p_min_w");
        prov.p_max_w = detail::require_number(p, "p_max_w");
        instance.provenance = prov;
    }
    validate(instance);
    return instance;
}

Instance load_instance_file(const std::filesystem::path& path) {
    return load_instance(detail::read_file(path));
}

}  // namespace voltpath
