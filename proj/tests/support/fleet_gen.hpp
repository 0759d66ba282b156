// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Randomized fingerprinting fleets: one entry PLC hosting a mix of true
// GET/PUT instance DBs and decoys that differ in size or carry one nonzero
// probed byte. Ground truth travels alongside the topology.

#include <cstdint>
#include <map>
#include <string>

namespace testgen {

struct GeneratedFleet {
    std::string topology_json;
    std::map<std::uint16_t, std::string> truth;  // db -> GET / PUT / OTHER
};

GeneratedFleet generate_fingerprint_fleet(std::uint64_t seed, int n_get, int n_put,
                                          int n_decoys);

}  // namespace testgen
