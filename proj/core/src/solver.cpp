#include "voltpath/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "json_util.hpp"

namespace voltpath {

std::string to_string(ResourceKind kind) {
    return kind == ResourceKind::linear ? "linear" : "nominal";
}

ResourceKind resource_kind_from_string(const std::string& name) {
    if (name == "linear") {
        return ResourceKind::linear;
    }
    if (name == "nominal") {
        return ResourceKind::nominal;
    }
    throw ValidationError("model: expected 'linear' or 'nominal', got '" + name + "'");
}

ResourceModel linear_model(const Instance& instance) {
    ResourceModel model;
    model.kind = ResourceKind::linear;
    model.fit = instance.fit;
    model.v_nom = instance.battery.v_nom;
    return model;
}

ResourceModel nominal_model(const Instance& instance) {
    ResourceModel model;
    model.kind = ResourceKind::nominal;
    model.v_nom = instance.battery.v_nom;
    return model;
}

std::optional<double> extend(double soc, const Edge& edge, const ResourceModel& model,
                             double capacity_coulombs) {
    const double inv_v = model.kind == ResourceKind::linear
                             ? model.fit.a * soc + model.fit.b * edge.power_w + model.fit.c
                             : 1.0 / model.v_nom;
    const double next =
        detail::soc_after(soc, edge.power_w, inv_v, edge.time_s, capacity_coulombs);
    if (next < 0.0) {
        return std::nullopt;
    }
    return next;
}

std::string to_string(SolveStatus status) {
    return status == SolveStatus::optimal ? "optimal" : "infeasible";
}

std::vector<std::string> dominance_violations(const Instance& instance,
                                              const ResourceModel& model) {
    std::vector<std::string> out;
    if (model.kind != ResourceKind::linear) {
        return out;
    }
    for (const auto& e : instance.edges) {
        if (!dominance_safe(model.fit, e.power_w, e.time_s)) {
            std::ostringstream msg;
            msg << "edge " << e.from << "->" << e.to
                << ": 1 - a*P*t = " << 1.0 - model.fit.a * e.power_w * e.time_s << " <= 0";
            out.push_back(msg.str());
        }
    }
    return out;
}

namespace {

// Node ids mapped onto [0, n) with per-node outgoing edges in (from, to)
// order, so traversal order is independent of input edge order.
struct Adjacency {
    std::unordered_map<int, int> index_of;
    std::vector<int> id_of;
    std::vector<std::vector<const Edge*>> out;
    std::vector<std::vector<const Edge*>> in;
};

Adjacency build_adjacency(const Instance& instance) {
    Adjacency adj;
    adj.id_of.reserve(instance.nodes.size());
    for (const auto& node : instance.nodes) {
        adj.index_of[node.id] = static_cast<int>(adj.id_of.size());
        adj.id_of.push_back(node.id);
    }
    adj.out.resize(instance.nodes.size());
    adj.in.resize(instance.nodes.size());
    for (const auto& e : instance.edges) {
        adj.out[static_cast<std::size_t>(adj.index_of.at(e.from))].push_back(&e);
        adj.in[static_cast<std::size_t>(adj.index_of.at(e.to))].push_back(&e);
    }
    auto by_pair = [](const Edge* a, const Edge* b) {
        return a->from != b->from ? a->from < b->from : a->to < b->to;
    };
    for (auto& v : adj.out) {
        std::sort(v.begin(), v.end(), by_pair);
    }
    for (auto& v : adj.in) {
        std::sort(v.begin(), v.end(), by_pair);
    }
    return adj;
}

struct DeadlineGuard {
    const std::optional<std::chrono::steady_clock::time_point>& deadline;
    const char* what;
    unsigned counter = 0;

    // Checks the clock on the first call and then every 1024th, so an
    // already-expired deadline fires immediately while long runs amortize
    // the clock reads.
    void poll() {
        if (!deadline || (counter++ & 1023u) != 0) {
            return;
        }
        if (std::chrono::steady_clock::now() > *deadline) {
            throw TimeoutError(std::string(what) + ": deadline exceeded");
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Battery-free shortest distance from every node to the target, computed
// backwards over incoming edges with the given per-edge weight.
std::vector<double> reverse_dijkstra(const Adjacency& adj, int target,
                                     const std::vector<std::vector<double>>& weight_in) {
    std::vector<double> dist(adj.id_of.size(), kInf);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[static_cast<std::size_t>(target)] = 0.0;
    queue.push({0.0, target});
    while (!queue.empty()) {
        const auto [d, v] = queue.top();
        queue.pop();
        if (d > dist[static_cast<std::size_t>(v)]) {
            continue;
        }
        const auto& edges = adj.in[static_cast<std::size_t>(v)];
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const int u = adj.index_of.at(edges[k]->from);
            const double nd = d + weight_in[static_cast<std::size_t>(v)][k];
            if (nd < dist[static_cast<std::size_t>(u)]) {
                dist[static_cast<std::size_t>(u)] = nd;
                queue.push({nd, u});
            }
        }
    }
    return dist;
}

std::vector<double> cost_to_goal(const Adjacency& adj, int goal) {
    std::vector<std::vector<double>> weight(adj.in.size());
    for (std::size_t v = 0; v < adj.in.size(); ++v) {
        for (const Edge* e : adj.in[v]) {
            weight[v].push_back(e->cost);
        }
    }
    return reverse_dijkstra(adj, goal, weight);
}

// Least possible charge drop over an edge: the drop is affine in the
// state of charge, so the extremes sit at the soc window endpoints.
double min_edge_drop(const Edge& e, const ResourceModel& model, const BatteryParams& battery) {
    if (model.kind == ResourceKind::nominal) {
        return detail::soc_drop(e.power_w, 1.0 / model.v_nom, e.time_s,
                                battery.capacity_coulombs);
    }
    const double lo = detail::soc_drop(e.power_w, model.fit.b * e.power_w + model.fit.c,
                                       e.time_s, battery.capacity_coulombs);
    const double hi = detail::soc_drop(
        e.power_w, model.fit.a * battery.soc_max + model.fit.b * e.power_w + model.fit.c,
        e.time_s, battery.capacity_coulombs);
    return std::min(lo, hi);
}

// Admissible lower bound on the charge any path from a node to the goal
// must consume. All-zero (no pruning) when some edge could recharge, since
// shortest-drop distances would then be meaningless.
std::vector<double> drop_to_goal(const Adjacency& adj, int goal, const ResourceModel& model,
                                 const BatteryParams& battery) {
    std::vector<std::vector<double>> weight(adj.in.size());
    for (std::size_t v = 0; v < adj.in.size(); ++v) {
        for (const Edge* e : adj.in[v]) {
            const double drop = min_edge_drop(*e, model, battery);
            if (drop < 0.0) {
                return std::vector<double>(adj.id_of.size(), 0.0);
            }
            weight[v].push_back(drop);
        }
    }
    auto dist = reverse_dijkstra(adj, goal, weight);
    for (auto& d : dist) {
        if (d == kInf) {
            d = 0.0;  // unreachable nodes are pruned by the cost bound instead
        }
    }
    return dist;
}

// Tolerance for comparing accumulated charge against bounds assembled with
// different floating-point groupings.
constexpr double kSocSlack = 1e-9;

}  // namespace

PathSolution solve_labeling(const Instance& instance, const ResourceModel& model,
                            const SolveOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    validate(instance);
    if (const auto violations = dominance_violations(instance, model); !violations.empty()) {
        std::string msg = "label dominance is unsound for this fit: " + violations.front();
        if (violations.size() > 1) {
            msg += " (and " + std::to_string(violations.size() - 1) + " more edges)";
        }
        throw SolveRefusedError(msg);
    }

    const Adjacency adj = build_adjacency(instance);
    const int start = adj.index_of.at(instance.start);
    const int goal = adj.index_of.at(instance.goal);
    const double capacity = instance.battery.capacity_coulombs;

    struct Label {
        int node = 0;
        double cost = 0.0;
        double soc = 0.0;
        int parent = -1;
        bool alive = true;
    };
    struct FrontEntry {
        double cost = 0.0;
        double soc = 0.0;
        int label = -1;
    };
    struct QueueEntry {
        double cost = 0.0;
        double soc = 0.0;
        long long seq = 0;
        int label = -1;
    };
    struct WorseThan {
        bool operator()(const QueueEntry& a, const QueueEntry& b) const {
            if (a.cost != b.cost) {
                return a.cost > b.cost;
            }
            if (a.soc != b.soc) {
                return a.soc < b.soc;
            }
            return a.seq > b.seq;
        }
    };

    std::deque<Label> labels;
    std::vector<std::vector<FrontEntry>> front(adj.id_of.size());
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, WorseThan> queue;
    long long seq = 0;

    // Keeps the per-node Pareto frontier over (cost low, charge high);
    // returns false when the candidate is dominated by a kept label.
    auto frontier_admit = [&](int node, double cost, double soc, int label_idx) {
        auto& entries = front[static_cast<std::size_t>(node)];
        for (const auto& f : entries) {
            if (f.cost <= cost && f.soc >= soc) {
                return false;
            }
        }
        std::erase_if(entries, [&](const FrontEntry& f) {
            if (cost <= f.cost && soc >= f.soc) {
                labels[static_cast<std::size_t>(f.label)].alive = false;
                return true;
            }
            return false;
        });
        entries.push_back(FrontEntry{cost, soc, label_idx});
        return true;
    };

    labels.push_back(Label{start, 0.0, instance.soc0, -1, true});
    frontier_admit(start, 0.0, instance.soc0, 0);
    queue.push(QueueEntry{0.0, instance.soc0, seq++, 0});

    PathSolution solution;
    solution.solver = "labeling";
    DeadlineGuard guard{options.deadline, "labeling"};
    guard.poll();
    long long expanded = 0;

    while (!queue.empty()) {
        guard.poll();
        const QueueEntry top = queue.top();
        queue.pop();
        if (!labels[static_cast<std::size_t>(top.label)].alive) {
            continue;
        }
        const Label current = labels[static_cast<std::size_t>(top.label)];
        ++expanded;
        if (current.node == goal) {
            std::vector<int> chain;
            std::vector<double> socs;
            for (int at = top.label; at >= 0; at = labels[static_cast<std::size_t>(at)].parent) {
                chain.push_back(labels[static_cast<std::size_t>(at)].node);
                socs.push_back(labels[static_cast<std::size_t>(at)].soc);
            }
            std::reverse(chain.begin(), chain.end());
            std::reverse(socs.begin(), socs.end());
            for (int idx : chain) {
                solution.nodes.push_back(adj.id_of[static_cast<std::size_t>(idx)]);
            }
            solution.soc_profile = std::move(socs);
            solution.cost = current.cost;
            solution.status = SolveStatus::optimal;
            break;
        }
        for (const Edge* e : adj.out[static_cast<std::size_t>(current.node)]) {
            const auto next = extend(current.soc, *e, model, capacity);
            if (!next) {
                continue;
            }
            const int to = adj.index_of.at(e->to);
            const double cost = current.cost + e->cost;
            const int label_idx = static_cast<int>(labels.size());
            if (!frontier_admit(to, cost, *next, label_idx)) {
                continue;
            }
            labels.push_back(Label{to, cost, *next, top.label, true});
            queue.push(QueueEntry{cost, *next, seq++, label_idx});
        }
    }

    solution.expanded = expanded;
    solution.wall_time_s = seconds_since(t0);
    return solution;
}

PathSolution solve_bnb(const Instance& instance, const ResourceModel& model,
                       const SolveOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    validate(instance);

    const Adjacency adj = build_adjacency(instance);
    const int start = adj.index_of.at(instance.start);
    const int goal = adj.index_of.at(instance.goal);
    const double capacity = instance.battery.capacity_coulombs;
    const std::vector<double> h_cost = cost_to_goal(adj, goal);
    const std::vector<double> h_drop = drop_to_goal(adj, goal, model, instance.battery);

    struct TreeNode {
        int node = 0;
        double cost = 0.0;
        double soc = 0.0;
        int parent = -1;
    };
    struct QueueEntry {
        double bound = 0.0;
        double soc = 0.0;
        long long seq = 0;
        int index = -1;
    };
    struct WorseThan {
        bool operator()(const QueueEntry& a, const QueueEntry& b) const {
            if (a.bound != b.bound) {
                return a.bound > b.bound;
            }
            if (a.soc != b.soc) {
                return a.soc < b.soc;
            }
            return a.seq > b.seq;
        }
    };

    std::deque<TreeNode> tree;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, WorseThan> queue;
    long long seq = 0;

    auto visits = [&](int leaf, int node) {
        for (int at = leaf; at >= 0; at = tree[static_cast<std::size_t>(at)].parent) {
            if (tree[static_cast<std::size_t>(at)].node == node) {
                return true;
            }
        }
        return false;
    };

    double best_cost = kInf;
    int best_leaf = -1;

    if (h_cost[static_cast<std::size_t>(start)] < kInf &&
        instance.soc0 - h_drop[static_cast<std::size_t>(start)] >= -kSocSlack) {
        tree.push_back(TreeNode{start, 0.0, instance.soc0, -1});
        queue.push(QueueEntry{h_cost[static_cast<std::size_t>(start)], instance.soc0, seq++, 0});
    }

    PathSolution solution;
    solution.solver = "bnb";
    DeadlineGuard guard{options.deadline, "bnb"};
    guard.poll();
    long long expanded = 0;

    while (!queue.empty()) {
        guard.poll();
        const QueueEntry top = queue.top();
        queue.pop();
        if (top.bound >= best_cost) {
            break;  // best-first: no remaining subtree can improve
        }
        const TreeNode current = tree[static_cast<std::size_t>(top.index)];
        ++expanded;
        for (const Edge* e : adj.out[static_cast<std::size_t>(current.node)]) {
            const int to = adj.index_of.at(e->to);
            if (visits(top.index, to)) {
                continue;  // simple paths only
            }
            const auto next = extend(current.soc, *e, model, capacity);
            if (!next) {
                continue;
            }
            const double cost = current.cost + e->cost;
            const double bound = cost + h_cost[static_cast<std::size_t>(to)];
            if (bound >= best_cost) {
                continue;
            }
            if (*next - h_drop[static_cast<std::size_t>(to)] < -kSocSlack) {
                continue;  // cannot reach the goal on the remaining charge
            }
            tree.push_back(TreeNode{to, cost, *next, top.index});
            if (to == goal) {
                best_cost = cost;
                best_leaf = static_cast<int>(tree.size()) - 1;
                continue;
            }
            queue.push(QueueEntry{bound, *next, seq++, static_cast<int>(tree.size()) - 1});
        }
    }

    if (best_leaf >= 0) {
        std::vector<int> chain;
        std::vector<double> socs;
        for (int at = best_leaf; at >= 0; at = tree[static_cast<std::size_t>(at)].parent) {
            chain.push_back(tree[static_cast<std::size_t>(at)].node);
            socs.push_back(tree[static_cast<std::size_t>(at)].soc);
        }
        std::reverse(chain.begin(), chain.end());
        std::reverse(socs.begin(), socs.end());
        for (int idx : chain) {
            solution.nodes.push_back(adj.id_of[static_cast<std::size_t>(idx)]);
        }
        solution.soc_profile = std::move(socs);
        solution.cost = best_cost;
        solution.status = SolveStatus::optimal;
    }
    solution.expanded = expanded;
    solution.wall_time_s = seconds_since(t0);
    return solution;
}

PathSolution solve_bruteforce(const Instance& instance, const ResourceModel& model,
                              const SolveOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    validate(instance);
    if (static_cast<int>(instance.nodes.size()) > options.bruteforce_node_limit) {
        throw SolveRefusedError("exhaustive enumeration capped at " +
                                std::to_string(options.bruteforce_node_limit) + " nodes, got " +
                                std::to_string(instance.nodes.size()));
    }

    const Adjacency adj = build_adjacency(instance);
    const int start = adj.index_of.at(instance.start);
    const int goal = adj.index_of.at(instance.goal);
    const double capacity = instance.battery.capacity_coulombs;

    std::vector<char> on_path(adj.id_of.size(), 0);
    std::vector<int> path{start};
    std::vector<double> socs{instance.soc0};
    on_path[static_cast<std::size_t>(start)] = 1;

    double best_cost = kInf;
    std::vector<int> best_path;
    std::vector<double> best_socs;
    long long expanded = 0;
    DeadlineGuard guard{options.deadline, "bruteforce"};
    guard.poll();

    auto dfs = [&](auto&& self, int node, double cost, double soc) -> void {
        guard.poll();
        ++expanded;
        if (node == goal) {
            if (cost < best_cost) {
                best_cost = cost;
                best_path = path;
                best_socs = socs;
            }
            return;
        }
        for (const Edge* e : adj.out[static_cast<std::size_t>(node)]) {
            const int to = adj.index_of.at(e->to);
            if (on_path[static_cast<std::size_t>(to)]) {
                continue;
            }
            const auto next = extend(soc, *e, model, capacity);
            if (!next) {
                continue;
            }
            const double c = cost + e->cost;
            if (c >= best_cost) {
                continue;
            }
            on_path[static_cast<std::size_t>(to)] = 1;
            path.push_back(to);
            socs.push_back(*next);
            self(self, to, c, *next);
            on_path[static_cast<std::size_t>(to)] = 0;
            path.pop_back();
            socs.pop_back();
        }
    };
    dfs(dfs, start, 0.0, instance.soc0);

    PathSolution solution;
    solution.solver = "bruteforce";
    if (best_cost < kInf) {
        for (int idx : best_path) {
            solution.nodes.push_back(adj.id_of[static_cast<std::size_t>(idx)]);
        }
        solution.soc_profile = std::move(best_socs);
        solution.cost = best_cost;
        solution.status = SolveStatus::optimal;
    }
    solution.expanded = expanded;
    solution.wall_time_s = seconds_since(t0);
    return solution;
}

CheckResult check_solution(const Instance& instance, const ResourceModel& model,
                           const PathSolution& solution) {
    CheckResult result;
    auto fail = [&](const std::string& msg) {
        result.ok = false;
        result.violations.push_back(msg);
    };

    if (solution.status == SolveStatus::infeasible) {
        if (!solution.nodes.empty() || !solution.soc_profile.empty()) {
            fail("infeasible status carries a non-empty path");
        }
        return result;
    }
    if (solution.nodes.size() < 2) {
        fail("optimal path must have at least two nodes");
        return result;
    }
    if (solution.nodes.front() != instance.start) {
        fail("path does not begin at the start node");
    }
    if (solution.nodes.back() != instance.goal) {
        fail("path does not end at the goal node");
    }
    {
        std::set<int> unique_nodes(solution.nodes.begin(), solution.nodes.end());
        if (unique_nodes.size() != solution.nodes.size()) {
            fail("path revisits a node");
        }
    }
    if (solution.soc_profile.size() != solution.nodes.size()) {
        fail("charge profile length does not match the path length");
        return result;
    }
    if (std::abs(solution.soc_profile.front() - instance.soc0) > 1e-12) {
        fail("initial charge differs from the instance's starting charge");
    }

    std::map<std::pair<int, int>, const Edge*> by_pair;
    for (const auto& e : instance.edges) {
        by_pair[{e.from, e.to}] = &e;
    }
    double cost = 0.0;
    double soc = instance.soc0;
    bool propagation_ok = true;
    for (std::size_t i = 0; i + 1 < solution.nodes.size(); ++i) {
        const auto it = by_pair.find({solution.nodes[i], solution.nodes[i + 1]});
        if (it == by_pair.end()) {
            fail("transition " + std::to_string(solution.nodes[i]) + "->" +
                 std::to_string(solution.nodes[i + 1]) + " is not an instance edge");
            propagation_ok = false;
            break;
        }
        cost += it->second->cost;
        const auto next = extend(soc, *it->second, model, instance.battery.capacity_coulombs);
        if (!next) {
            fail("charge runs below empty on edge " + std::to_string(solution.nodes[i]) + "->" +
                 std::to_string(solution.nodes[i + 1]));
            propagation_ok = false;
            break;
        }
        soc = *next;
        if (std::abs(soc - solution.soc_profile[i + 1]) > 1e-9) {
            fail("reported charge at position " + std::to_string(i + 1) +
                 " diverges from edge propagation");
        }
    }
    if (propagation_ok &&
        std::abs(cost - solution.cost) > 1e-9 * std::max(1.0, std::abs(solution.cost))) {
        fail("reported cost differs from the path's edge total");
    }
    for (std::size_t i = 0; i < solution.soc_profile.size(); ++i) {
        if (solution.soc_profile[i] < -1e-12) {
            fail("charge below the empty bound at position " + std::to_string(i));
        }
        if (solution.soc_profile[i] > instance.battery.soc_max + 1e-12) {
            fail("charge above the full bound at position " + std::to_string(i));
        }
    }
    return result;
}

std::string save_path_solution(const PathSolution& solution) {
    nlohmann::json doc{
        {"nodes", solution.nodes},
        {"cost", solution.cost},
        {"soc_profile", solution.soc_profile},
        {"status", to_string(solution.status)},
        {"solver", solution.solver},
        {"wall_time_s", solution.wall_time_s},
        {"expanded", solution.expanded},
    };
    return doc.dump(2) + "\n";
}

void save_path_solution_file(const PathSolution& solution, const std::filesystem::path& path) {
    detail::write_file(path, save_path_solution(solution));
}

PathSolution load_path_solution(const std::string& json_text) {
    const auto doc = detail::parse_json(json_text, "path solution");
    PathSolution solution;
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ValidationError("nodes: missing or not an array");
    }
    for (const auto& v : doc["nodes"]) {
        if (!v.is_number_integer()) {
            throw ValidationError("nodes: entries must be integers");
        }
        solution.nodes.push_back(v.get<int>());
    }
    solution.cost = detail::number_or(doc, "cost", 0.0);
    if (doc.contains("soc_profile")) {
        if (!doc["soc_profile"].is_array()) {
            throw ValidationError("soc_profile: not an array");
        }
        for (const auto& v : doc["soc_profile"]) {
            if (!v.is_number()) {
                throw ValidationError("soc_profile: entries must be numbers");
            }
            solution.soc_profile.push_back(v.get<double>());
        }
    }
    if (!doc.contains("status") || !doc["status"].is_string()) {
        throw ValidationError("status: missing or not a string");
    }
    const std::string status = doc["status"].get<std::string>();
    if (status == "optimal") {
        solution.status = SolveStatus::optimal;
    } else if (status == "infeasible") {
        solution.status = SolveStatus::infeasible;
    } else {
        throw ValidationError("status: expected 'optimal' or 'infeasible'");
    }
    if (doc.contains("solver")) {
        if (!doc["solver"].is_string()) {
            throw ValidationError("solver: not a string");
        }
        solution.solver = doc["solver"].get<std::string>();
    }
    solution.wall_time_s = detail::number_or(doc, "wall_time_s", 0.0);
    solution.expanded =
        static_cast<long long>(detail::number_or(doc, "expanded", 0.0));
    return solution;
}

PathSolution load_path_solution_file(const std::filesystem::path& path) {
    return load_path_solution(detail::read_file(path));
}

}  // namespace voltpath
