// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include "support/fleet_gen.hpp"

#include <random>
#include <set>

#include <json.hpp>

#include "attack.hpp"
#include "plc.hpp"

namespace testgen {

using nlohmann::json;
using plcpivot::sim::kGetDbSize;
using plcpivot::sim::kPutDbSize;

GeneratedFleet generate_fingerprint_fleet(std::uint64_t seed, int n_get, int n_put,
                                          int n_decoys) {
    std::mt19937 rng(static_cast<std::uint32_t>(seed));
    GeneratedFleet out;

    const int total = n_get + n_put + n_decoys;
    std::set<std::uint16_t> numbers;
    while (static_cast<int>(numbers.size()) < total)
        numbers.insert(static_cast<std::uint16_t>(1 + rng() % 400));
    std::vector<std::uint16_t> order(numbers.begin(), numbers.end());
    std::shuffle(order.begin(), order.end(), rng);

    // Probed offsets a byte-decoy may dirty (size-dependent tail included).
    auto probed_offsets = [&](std::uint32_t size) {
        plcpivot::attack::ProbeSet probes;
        return probes.offsets_for(size);
    };

    json dbs = json::array();
    json fbs = json::array();
    std::size_t cursor = 0;

    for (int i = 0; i < n_get + n_put; ++i) {
        const bool is_get = i < n_get;
        const std::uint16_t number = order[cursor++];
        json db;
        db["number"] = number;
        db["size"] = is_get ? kGetDbSize : kPutDbSize;
        dbs.push_back(db);

        json fb;
        fb["kind"] = is_get ? "GET" : "PUT";
        fb["instance_db"] = number;
        fb["conn_id"] = 2;
        fb["trigger_interval_us"] = 60'000'000;  // idle during fingerprint runs
        if (rng() % 2 == 0) {
            fb["slots"] = json::array({{{"slot", 1},
                                        {"remote", "P#DB1.DBX0.0 WORD 1"},
                                        {"local", "P#DB2.DBX0.0 WORD 1"}}});
        }
        fbs.push_back(fb);
        out.truth[number] = is_get ? "GET" : "PUT";
    }

    for (int i = 0; i < n_decoys; ++i) {
        const std::uint16_t number = order[cursor++];
        json db;
        db["number"] = number;
        if (i % 2 == 0) {
            // Size decoy: all zero, but not an instance-DB size.
            std::uint32_t size;
            do {
                size = 64 + rng() % 1985;
            } while (size == kGetDbSize || size == kPutDbSize);
            db["size"] = size;
        } else {
            // Byte decoy: right size, one nonzero probed byte.
            const std::uint32_t size = (rng() % 2) ? kGetDbSize : kPutDbSize;
            db["size"] = size;
            auto offsets = probed_offsets(size);
            const std::uint32_t offset = offsets[rng() % offsets.size()];
            char hex[3];
            std::snprintf(hex, sizeof hex, "%02x",
                          static_cast<unsigned>(1 + rng() % 255));
            db["init"] = json::array({{{"offset", offset}, {"hex", hex}}});
        }
        dbs.push_back(db);
        out.truth[number] = "OTHER";
    }

    json topo;
    topo["plcs"] = json::array();
    json plant;
    plant["id"] = "plant";
    plant["scan_interval_us"] = 50'000;
    plant["data_blocks"] = std::move(dbs);
    plant["connections"] = json::array({{{"conn_id", 2}, {"channel", "plant-peer"}}});
    plant["fb_instances"] = std::move(fbs);
    topo["plcs"].push_back(std::move(plant));
    json peer;
    peer["id"] = "peer";
    peer["scan_interval_us"] = 50'000;
    peer["data_blocks"] = json::array({{{"number", 1}, {"size", 64}}});
    topo["plcs"].push_back(std::move(peer));
    topo["channels"] = json::array(
        {{{"id", "attacker-plant"},
          {"kind", "IP"},
          {"endpoints", json::array({"ATTACKER", "plant"})},
          {"delay_us", 500}},
         {{"id", "plant-peer"},
          {"kind", "IP"},
          {"endpoints", json::array({"plant", "peer"})},
          {"delay_us", 1000}}});

    out.topology_json = topo.dump(2);
    return out;
}

}  // namespace testgen
