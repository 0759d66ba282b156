// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * @file playbook.hpp
 * @brief Declarative attack playbooks and the run report.
 *
 * A playbook is an ordered list of steps (probe, fingerprint_range,
 * read_usage, configure, await, collect, reset, remote_read, remote_write,
 * assert_equals) expressed as JSON. Steps reference facts established by
 * earlier steps -- a configure must name a DB some fingerprint_range
 * covered, a collect must name a pointer some configure staged, an
 * assert_equals may only reference saved values -- and that is validated
 * before anything executes. At run time a failed step poisons the facts it
 * would have established, and steps depending on them are skipped.
 *
 * Runs are deterministic: the same topology, playbook and seed produce a
 * byte-identical event log in virtual-time mode.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "attack.hpp"
#include "fabric.hpp"

namespace plcpivot::run {

using net::Micros;

class PlaybookError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Step {
    enum class Op {
        Probe,
        FingerprintRange,
        ReadUsage,
        Configure,
        Await,
        Collect,
        Reset,
        RemoteRead,
        RemoteWrite,
        AssertEquals,
    };
    enum class Expect { None, Size, Absent, Unreachable };

    Op op = Op::Probe;

    std::optional<std::string> plc;  // probe: direct-attempt target PLC
    std::uint16_t db = 0;
    std::uint32_t max_size = wire::kMaxByteOffset + 1;
    Expect expect = Expect::None;
    std::uint32_t expect_size = 0;

    std::uint16_t from_db = 0, to_db = 0;            // fingerprint_range
    std::map<std::uint16_t, std::string> expect_classes;

    std::optional<std::set<int>> expect_spare;       // read_usage

    int slot = 0;                                    // configure / reset
    std::optional<wire::AnyPointer> remote;
    std::optional<wire::AnyPointer> local;
    std::vector<std::uint8_t> value;
    bool has_value = false;
    bool overwrite = false;

    Micros timeout = 600'000;                        // await
    Micros hop_timeout = 120'000'000;                // remote ops

    std::string save_as;                             // collect / remote_read
    std::vector<attack::Hop> chain;
    std::optional<wire::AnyPointer> target;
    bool verify = true;                              // remote_write

    struct Operand {
        bool is_ref = false;
        std::string ref;
        std::vector<std::uint8_t> bytes;
    };
    Operand left, right;                             // assert_equals
};

const char* step_op_name(Step::Op op);

struct Playbook {
    std::string name;
    std::string entry_channel;  // empty: the topology's only attacker channel
    std::vector<Step> steps;
};

Playbook parse_playbook(const std::string& json_text);
Playbook parse_playbook_file(const std::string& path);

/// Static fact checking; throws PlaybookError naming the offending step.
void validate_playbook(const Playbook& pb);

struct StepReport {
    std::size_t index = 0;
    std::string op;
    std::string outcome;  // "ok", "failed", "skipped"
    std::string detail;
    Micros t_start = 0;
    Micros t_end = 0;
    std::size_t exchanges = 0;  // protocol exchanges this step issued
};

struct RunReport {
    std::string playbook;
    std::uint64_t seed = 0;
    std::vector<StepReport> steps;
    Micros virtual_elapsed = 0;
    std::size_t exchanges = 0;
    std::size_t transfers = 0;
    int assertions_passed = 0;
    int assertions_failed = 0;
    bool success = false;
    // True iff every session the run opened emitted read/write kinds only.
    bool lotp_pure = false;

    nlohmann::ordered_json to_json() const;
};

/// Executes the playbook against a running fleet (validates first).
RunReport run_playbook(net::Fleet& fleet, const Playbook& pb, std::uint64_t seed);

/// File-level convenience: loads both inputs, runs, optionally writes the
/// JSONL event log and the JSON report. Throws ConfigError/PlaybookError on
/// bad inputs.
RunReport run_playbook_files(const std::string& topology_path,
                             const std::string& playbook_path, std::uint64_t seed,
                             const std::string& log_path = {},
                             const std::string& report_path = {});

}  // namespace plcpivot::run
