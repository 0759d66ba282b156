// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * @file scenarios.hpp
 * @brief Bundled topology/playbook pairs for the four canned scenarios.
 *
 *   1  non-routable target: PLC2 only wired to PLC1
 *   2  IP-to-serial escape: PLC1..PLC2 leg is a serial link
 *   3  site-to-site WAN with allowlist reachability rules
 *   4  multi-hop pivot: PLC3 reached through PLC1 and PLC2
 */

#include <cstdint>
#include <string>

#include "playbook.hpp"

namespace plcpivot::run {

inline constexpr int kScenarioCount = 4;

/// nullptr when n is outside 1..4.
const char* scenario_name(int n);
const char* scenario_topology_json(int n);
/// Ready-to-parse playbook text; empty when n is outside 1..4.
std::string scenario_playbook_json(int n);

/// Runs the bundled pair for scenario n in virtual time. Throws
/// std::invalid_argument for n outside 1..4.
RunReport run_scenario(int n, std::uint64_t seed, const std::string& log_path = {},
                       const std::string& report_path = {});

}  // namespace plcpivot::run
