#pragma once

#include <filesystem>
#include <string>

#include "voltpath/solver.hpp"

namespace voltpath {

/// Renders the problem as a mixed-integer program in LP text format: a
/// minimum-cost objective over edge binaries, unit out-flow at the start,
/// unit in-flow at the goal, flow conservation elsewhere, a fixed starting
/// charge, per-node charge window bounds, and one big-M charge-propagation
/// row per edge under the given resource model.
std::string export_milp(const Instance& instance, const ResourceModel& model);

void export_milp_file(const Instance& instance, const ResourceModel& model,
                      const std::filesystem::path& path);

}  // namespace voltpath
