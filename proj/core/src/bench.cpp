#include "voltpath/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "json_util.hpp"

namespace voltpath {

void validate(const BenchPlan& plan) {
    if (plan.sizes.empty()) {
        throw ValidationError("sizes: must be non-empty");
    }
    for (std::size_t i = 0; i < plan.sizes.size(); ++i) {
        if (plan.sizes[i] < 2) {
            throw ValidationError("sizes: every size must be >= 2");
        }
        if (i > 0 && plan.sizes[i] <= plan.sizes[i - 1]) {
            throw ValidationError("sizes: must be strictly increasing");
        }
    }
    if (plan.instances_per_size < 1) {
        throw ValidationError("instances_per_size: must be >= 1");
    }
    if (plan.solvers.empty()) {
        throw ValidationError("solvers: must be non-empty");
    }
    for (const auto& s : plan.solvers) {
        if (s != "labeling" && s != "bnb") {
            throw ValidationError("solvers: unknown solver '" + s + "'");
        }
    }
    if (plan.models.empty()) {
        throw ValidationError("models: must be non-empty");
    }
    for (const auto& m : plan.models) {
        resource_kind_from_string(m);
    }
    if (!(plan.timeout_s > 0.0)) {
        throw ValidationError("timeout_s: must be > 0");
    }
}

std::string save_bench_plan(const BenchPlan& plan) {
    nlohmann::json doc{
        {"sizes", plan.sizes},
        {"instances_per_size", plan.instances_per_size},
        {"base_seed", plan.base_seed},
        {"solvers", plan.solvers},
        {"models", plan.models},
        {"timeout_s", plan.timeout_s},
    };
    return doc.dump(2) + "\n";
}

void save_bench_plan_file(const BenchPlan& plan, const std::filesystem::path& path) {
    detail::write_file(path, save_bench_plan(plan));
}

BenchPlan load_bench_plan(const std::string& json_text) {
    const auto doc = detail::parse_json(json_text, "bench plan");
    BenchPlan plan;
    if (!doc.contains("sizes") || !doc["sizes"].is_array()) {
        throw ValidationError("sizes: missing or not an array");
    }
    plan.sizes.clear();
    for (const auto& v : doc["sizes"]) {
        if (!v.is_number_integer()) {
            throw ValidationError("sizes: entries must be integers");
        }
        plan.sizes.push_back(v.get<int>());
    }
    plan.instances_per_size =
        static_cast<int>(detail::number_or(doc, "instances_per_size", 30.0));
    if (doc.contains("base_seed")) {
        if (!doc["base_seed"].is_number_unsigned()) {
            throw ValidationError("base_seed: must be a non-negative integer");
        }
        plan.base_seed = doc["base_seed"].get<std::uint64_t>();
    }
    auto read_names = [&doc](const char* field, std::vector<std::string>& into) {
        if (!doc.contains(field)) {
            return;
        }
        if (!doc[field].is_array()) {
            throw ValidationError(std::string(field) + ": not an array");
        }
        into.clear();
        for (const auto& v : doc[field]) {
            if (!v.is_string()) {
                throw ValidationError(std::string(field) + ": entries must be strings");
            }
            into.push_back(v.get<std::string>());
        }
    };
    read_names("solvers", plan.solvers);
    read_names("models", plan.models);
    plan.timeout_s = detail::number_or(doc, "timeout_s", 60.0);
    validate(plan);
    return plan;
}

BenchPlan load_bench_plan_file(const std::filesystem::path& path) {
    return load_bench_plan(detail::read_file(path));
}

std::uint64_t cell_seed(std::uint64_t base_seed, int size, int index) {
    // splitmix64 of a key combining the three coordinates
    std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(size) *
                                                               1000003ULL +
                                                           static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

struct Cell {
    int size = 0;
    std::uint64_t seed = 0;
    const Instance* instance = nullptr;  // null when generation failed
    std::string gen_error;
    std::string solver;
    std::string model;
};

BenchRecord run_cell(const Cell& cell, double timeout_s) {
    BenchRecord record;
    record.size = cell.size;
    record.seed = cell.seed;
    record.solver = cell.solver;
    record.model = cell.model;
    if (cell.instance == nullptr) {
        record.status = "error";
        return record;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const ResourceModel model = resource_kind_from_string(cell.model) ==
                                            ResourceKind::linear
                                        ? linear_model(*cell.instance)
                                        : nominal_model(*cell.instance);
        SolveOptions options;
        options.deadline =
            t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double>(timeout_s));
        const PathSolution solution = cell.solver == "labeling"
                                          ? solve_labeling(*cell.instance, model, options)
                                          : solve_bnb(*cell.instance, model, options);
        record.status = to_string(solution.status);
        if (solution.status == SolveStatus::optimal) {
            record.cost = solution.cost;
        }
        record.wall_time_s = solution.wall_time_s;
        record.expanded = solution.expanded;
    } catch (const TimeoutError&) {
        record.status = "timeout";
        record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                 .count();
    } catch (const Error&) {
        record.status = "error";
        record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                 .count();
    }
    return record;
}

}  // namespace

std::vector<BenchRecord> run_bench(const BenchPlan& plan, const GenConfig& config, int jobs) {
    validate(plan);
    if (jobs < 1) {
        throw ValidationError("jobs: must be >= 1");
    }

    // Instances are shared across the solver/model cells of one
    // (size, index) slot and generated up front, so every cell sees the
    // same problem no matter how cells are scheduled.
    struct Slot {
        std::uint64_t seed = 0;
        std::optional<Instance> instance;
        std::string gen_error;
    };
    std::vector<std::pair<int, Slot>> slots;
    for (int size : plan.sizes) {
        for (int idx = 0; idx < plan.instances_per_size; ++idx) {
            Slot slot;
            slot.seed = cell_seed(plan.base_seed, size, idx);
            try {
                slot.instance = generate_instance(size, slot.seed, config);
            } catch (const Error& e) {
                slot.gen_error = e.what();
            }
            slots.push_back({size, std::move(slot)});
        }
    }

    std::vector<Cell> cells;
    for (const auto& [size, slot] : slots) {
        for (const auto& solver : plan.solvers) {
            for (const auto& model : plan.models) {
                Cell cell;
                cell.size = size;
                cell.seed = slot.seed;
                cell.instance = slot.instance ? &*slot.instance : nullptr;
                cell.gen_error = slot.gen_error;
                cell.solver = solver;
                cell.model = model;
                cells.push_back(std::move(cell));
            }
        }
    }

    std::vector<BenchRecord> records(cells.size());
    if (jobs == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            records[i] = run_cell(cells[i], plan.timeout_s);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) {
                    return;
                }
                records[i] = run_cell(cells[i], plan.timeout_s);
            }
        };
        std::vector<std::thread> pool;
        const int n_workers = std::min<int>(jobs, static_cast<int>(cells.size()));
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return records;
}

std::string records_to_csv(const std::vector<BenchRecord>& records) {
    std::ostringstream out;
    out << "size,seed,solver,model,status,cost,wall_time_s,expanded\n";
    for (const auto& r : records) {
        out << r.size << ',' << r.seed << ',' << r.solver << ',' << r.model << ',' << r.status
            << ',' << (r.cost ? detail::format_full(*r.cost) : "") << ','
            << detail::format_full(r.wall_time_s) << ',' << r.expanded << '\n';
    }
    return out.str();
}

void records_to_csv_file(const std::vector<BenchRecord>& records,
                         const std::filesystem::path& path) {
    detail::write_file(path, records_to_csv(records));
}

std::vector<SummaryRow> aggregate(const std::vector<BenchRecord>& records) {
    if (records.empty()) {
        throw ValidationError("records: must be non-empty");
    }
    std::vector<SummaryRow> rows;
    std::vector<std::vector<double>> times;  // completed-cell walls per row
    auto row_for = [&](const BenchRecord& r) -> std::size_t {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size == r.size && rows[i].solver == r.solver &&
                rows[i].model == r.model) {
                return i;
            }
        }
        SummaryRow row;
        row.size = r.size;
        row.solver = r.solver;
        row.model = r.model;
        rows.push_back(std::move(row));
        times.emplace_back();
        return rows.size() - 1;
    };
    for (const auto& r : records) {
        const std::size_t i = row_for(r);
        if (r.status == "optimal") {
            ++rows[i].optimal_count;
            times[i].push_back(r.wall_time_s);
        } else if (r.status == "infeasible") {
            ++rows[i].infeasible_count;
            times[i].push_back(r.wall_time_s);
        } else if (r.status == "timeout") {
            ++rows[i].timeout_count;
        } else {
            ++rows[i].error_count;
        }
    }
    // Group order follows first appearance, which is the canonical record
    // order for runner output; sort keeps hand-assembled inputs stable too.
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a].size != rows[b].size) {
            return rows[a].size < rows[b].size;
        }
        if (rows[a].solver != rows[b].solver) {
            return rows[a].solver < rows[b].solver;
        }
        return rows[a].model < rows[b].model;
    });
    std::vector<SummaryRow> out;
    out.reserve(rows.size());
    for (std::size_t i : order) {
        SummaryRow row = rows[i];
        auto& t = times[i];
        if (!t.empty()) {
            std::sort(t.begin(), t.end());
            double sum = 0.0;
            for (double v : t) {
                sum += v;
            }
            row.mean_time_s = sum / static_cast<double>(t.size());
            row.median_time_s = t.size() % 2 == 1
                                    ? t[t.size() / 2]
                                    : 0.5 * (t[t.size() / 2 - 1] + t[t.size() / 2]);
            row.max_time_s = t.back();
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << "size,solver,model,optimal,infeasible,timeout,error,mean_time_s,median_time_s,"
           "max_time_s\n";
    for (const auto& r : rows) {
        out << r.size << ',' << r.solver << ',' << r.model << ',' << r.optimal_count << ','
            << r.infeasible_count << ',' << r.timeout_count << ',' << r.error_count << ','
            << (r.mean_time_s ? detail::format_full(*r.mean_time_s) : "") << ','
            << (r.median_time_s ? detail::format_full(*r.median_time_s) : "") << ','
            << (r.max_time_s ? detail::format_full(*r.max_time_s) : "") << '\n';
    }
    return out.str();
}

std::string summary_to_table(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%5s %9s %8s %4s %6s %5s %4s %11s %11s %11s\n", "size",
                  "solver", "model", "opt", "infeas", "tout", "err", "mean_s", "median_s",
                  "max_s");
    out << buf;
    auto cell = [](std::optional<double> v) {
        char b[32];
        if (v) {
            std::snprintf(b, sizeof(b), "%.4g", *v);
        } else {
            std::snprintf(b, sizeof(b), "-");
        }
        return std::string(b);
    };
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%5d %9s %8s %4d %6d %5d %4d %11s %11s %11s\n", r.size,
                      r.solver.c_str(), r.model.c_str(), r.optimal_count, r.infeasible_count,
                      r.timeout_count, r.error_count, cell(r.mean_time_s).c_str(),
                      cell(r.median_time_s).c_str(), cell(r.max_time_s).c_str());
        out << buf;
    }
    return out.str();
}

}  // namespace voltpath
