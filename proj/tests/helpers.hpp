// Shared test utilities: scratch directories, an independent shortest-path
// oracle, and a small LP-file reader used to verify the MILP exporter.
#pragma once

#include <unistd.h>

#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "voltpath/instance.hpp"

namespace testutil {

/// Runs f, which must throw E, and hands back the exception message so the
/// caller can assert on its contents.
template <class E, class F>
std::string message_of(F&& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    } catch (const std::exception& e) {
        return std::string("WRONG EXCEPTION TYPE: ") + e.what();
    }
    return "NO EXCEPTION THROWN";
}

/// Unique scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<int> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path = base / ("voltpath_test_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// Plain cost-only Dijkstra, written independently of the solver module.
/// Returns infinity when the goal is unreachable.
inline double dijkstra_cost(const voltpath::Instance& instance) {
    const double inf = std::numeric_limits<double>::infinity();
    std::map<int, std::vector<std::pair<int, double>>> adj;
    for (const auto& e : instance.edges) adj[e.from].push_back({e.to, e.cost});
    std::map<int, double> dist;
    for (const auto& n : instance.nodes) dist[n.id] = inf;
    dist[instance.start] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.push({0.0, instance.start});
    while (!heap.empty()) {
        auto [d, node] = heap.top();
        heap.pop();
        if (d > dist[node]) continue;
        if (node == instance.goal) return d;
        for (auto [to, w] : adj[node]) {
            if (d + w < dist[to]) {
                dist[to] = d + w;
                heap.push({d + w, to});
            }
        }
    }
    return inf;
}

/// Minimal reader for the LP files the exporter writes: linear expressions
/// with explicit coefficients, one constraint per "name:" row, wrapped
/// continuation lines indented deeper than the row start.
struct LpConstraint {
    std::map<std::string, double> coefs;
    std::string sense;  // "<=", ">=", "="
    double rhs = 0.0;
};

struct LpFile {
    std::map<std::string, double> objective;
    std::map<std::string, LpConstraint> rows;
    std::map<std::string, std::pair<double, double>> bounds;  // var -> [lo, hi]
    std::set<std::string> binaries;
};

inline LpFile parse_lp(const std::string& text) {
    // Join wrapped lines: a logical line starts with exactly one leading
    // space; continuations are indented further.
    std::vector<std::string> logical;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    std::vector<std::pair<std::string, std::string>> entries;  // (section, logical line)
    auto flush = [&](const std::string& line) {
        if (!line.empty()) entries.push_back({section, line});
    };
    std::string pending;
    while (std::getline(in, raw)) {
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty() || raw[0] == '\\') continue;
        if (raw == "Minimize" || raw == "Subject To" || raw == "Bounds" || raw == "Binaries" ||
            raw == "End") {
            flush(pending);
            pending.clear();
            section = raw;
            continue;
        }
        const bool continuation = raw.rfind("   ", 0) == 0;  // 3+ spaces
        if (continuation) {
            pending += raw;  // keep a separating space from the indent
        } else {
            flush(pending);
            pending = raw;
        }
    }
    flush(pending);

    auto tokens_of = [](const std::string& line) {
        std::vector<std::string> toks;
        std::istringstream ts(line);
        std::string t;
        while (ts >> t) toks.push_back(t);
        return toks;
    };
    // Parses "[sign] coef var [sign coef var ...]" into a coefficient map.
    auto parse_expr = [&](const std::vector<std::string>& toks, size_t begin, size_t end) {
        std::map<std::string, double> coefs;
        double sign = 1.0;
        for (size_t i = begin; i < end;) {
            if (toks[i] == "+") {
                sign = 1.0;
                ++i;
            } else if (toks[i] == "-") {
                sign = -1.0;
                ++i;
            } else {
                const double coef = std::stod(toks[i]);
                coefs[toks.at(i + 1)] += sign * coef;
                sign = 1.0;
                i += 2;
            }
        }
        return coefs;
    };

    LpFile lp;
    for (const auto& [sec, line] : entries) {
        const auto toks = tokens_of(line);
        if (toks.empty()) continue;
        if (sec == "Minimize") {
            // "obj: expr"
            lp.objective = parse_expr(toks, 1, toks.size());
        } else if (sec == "Subject To") {
            std::string name = toks[0];
            if (!name.empty() && name.back() == ':') name.pop_back();
            size_t sense_at = toks.size();
            for (size_t i = 1; i < toks.size(); ++i) {
                if (toks[i] == "<=" || toks[i] == ">=" || toks[i] == "=") {
                    sense_at = i;
                    break;
                }
            }
            if (sense_at + 1 >= toks.size() + 1) throw std::runtime_error("row without sense: " + line);
            LpConstraint c;
            c.coefs = parse_expr(toks, 1, sense_at);
            c.sense = toks[sense_at];
            c.rhs = std::stod(toks[sense_at + 1]);
            lp.rows[name] = std::move(c);
        } else if (sec == "Bounds") {
            if (toks.size() == 3 && toks[1] == "=") {
                lp.bounds[toks[0]] = {std::stod(toks[2]), std::stod(toks[2])};
            } else if (toks.size() == 5 && toks[1] == "<=" && toks[3] == "<=") {
                lp.bounds[toks[2]] = {std::stod(toks[0]), std::stod(toks[4])};
            } else {
                throw std::runtime_error("unrecognized bound: " + line);
            }
        } else if (sec == "Binaries") {
            for (const auto& t : toks) lp.binaries.insert(t);
        }
    }
    return lp;
}

}  // namespace testutil
