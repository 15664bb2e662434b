#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "veribond/capacity.hpp"

namespace veribond::golden {

/// Reference collusion-probability grid: odd panel sizes (rows) by colluder
/// ratios (columns), finite pool of 10,000, values formatted to three
/// significant figures; empty optional marks a below-display-floor cell
/// ("<1e-10").
inline constexpr std::uint64_t kCollusionPool = 10000;

const std::vector<std::uint32_t>& collusion_panels();
const std::vector<double>& collusion_ratios();
/// Row-major [panel][ratio]; nullopt = sentinel cell.
const std::vector<std::vector<std::optional<std::string>>>& collusion_cells();

/// Reference staffing grid: four platform rows by three staffing
/// configurations, with the exact minimum-pool integers.
const std::vector<PlatformRow>& capacity_rows();
const std::vector<StaffingConfig>& capacity_configs();
/// Row-major [platform][config].
const std::vector<std::vector<std::uint64_t>>& capacity_cells();

/// Formats a probability the way the reference table does: "%.2e", or the
/// "<1e-10" sentinel below the display floor.
std::string format_probability(double value);

/// True when two 3-significant-figure strings agree within one unit in the
/// third digit (or are the same sentinel).
bool within_one_third_digit(const std::string& a, const std::string& b);

}  // namespace veribond::golden
