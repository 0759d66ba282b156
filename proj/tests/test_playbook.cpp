// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "playbook.hpp"
#include "scenarios.hpp"

using namespace plcpivot;
using run::parse_playbook;
using run::Playbook;
using run::PlaybookError;
using run::RunReport;

namespace {

net::Fleet scenario_fleet(int n) {
    return net::Fleet(net::load_topology(run::scenario_topology_json(n)));
}

Playbook scenario_playbook(int n) {
    return parse_playbook(run::scenario_playbook_json(n));
}

}  // namespace

TEST_CASE("playbook parsing rejects malformed input") {
    CHECK_THROWS_AS(parse_playbook("not json"), PlaybookError);
    CHECK_THROWS_AS(parse_playbook(R"({"steps":[{"op":"frobnicate"}]})"),
                    PlaybookError);
    CHECK_THROWS_AS(parse_playbook(R"({"steps":[{"op":"probe"}]})"), PlaybookError);
    CHECK_THROWS_AS(
        parse_playbook(R"({"steps":[{"op":"collect","local":"garbage","save_as":"x"}]})"),
        PlaybookError);
}

TEST_CASE("playbook validation: steps must reference established facts") {
    // configure without any fingerprint_range covering the DB
    auto pb = parse_playbook(R"({"steps":[
        {"op":"configure","db":99,"slot":2,
         "remote":"P#DB1.DBX0.0 BYTE 1","local":"P#DB100.DBX1.0 BYTE 1"}]})");
    CHECK_THROWS_AS(run::validate_playbook(pb), PlaybookError);

    // collect without a matching configure
    auto pb2 = parse_playbook(R"({"steps":[
        {"op":"collect","local":"P#DB100.DBX1.0 BYTE 1","save_as":"x"}]})");
    CHECK_THROWS_AS(run::validate_playbook(pb2), PlaybookError);

    // assert_equals against a name nothing saved
    auto pb3 = parse_playbook(R"({"steps":[
        {"op":"assert_equals","left":"$ghost","right":"00"}]})");
    CHECK_THROWS_AS(run::validate_playbook(pb3), PlaybookError);

    // the bundled playbooks validate cleanly
    for (int n = 1; n <= 4; ++n) CHECK_NOTHROW(run::validate_playbook(scenario_playbook(n)));
}

TEST_CASE("scenario 1 playbook passes end to end") {
    net::Fleet fleet = scenario_fleet(1);
    RunReport report = run::run_playbook(fleet, scenario_playbook(1), 7);
    for (const auto& step : report.steps)
        INFO(step.index, " ", step.op, " ", step.outcome, " ", step.detail);
    CHECK(report.success);
    CHECK(report.assertions_failed == 0);
    CHECK(report.assertions_passed >= 6);
    // The harness oracle confirms the PUT leg landed on PLC2.
    auto byte = fleet.read_memory("plc2", 1, 3, 1);
    CHECK((*byte)[0] == 0xA5);
}

TEST_CASE("scenario 2 (serial) playbook passes and logs serial timing") {
    net::Fleet fleet = scenario_fleet(2);
    RunReport report = run::run_playbook(fleet, scenario_playbook(2), 7);
    CHECK(report.success);

    // Serial exchanges must charge at least the transmission time.
    const auto* serial = fleet.find_channel("plc1-plc2");
    REQUIRE(serial);
    bool saw_serial_exchange = false;
    for (const auto& rec : fleet.event_log()) {
        if (rec.value("type", "") != "exchange") continue;
        if (rec.value("channel", "") != "plc1-plc2") continue;
        if (rec.contains("unreachable")) continue;
        saw_serial_exchange = true;
        const std::uint64_t elapsed = rec["elapsed_us"].get<std::uint64_t>();
        const std::uint64_t req_bytes = rec["req_bytes"].get<std::uint64_t>();
        CHECK(elapsed >= req_bytes * 1'000'000ULL / serial->bytes_per_second);
    }
    CHECK(saw_serial_exchange);
}

TEST_CASE("scenario 3 (site-to-site) playbook passes with the denied channel") {
    net::Fleet fleet = scenario_fleet(3);
    RunReport report = run::run_playbook(fleet, scenario_playbook(3), 7);
    CHECK(report.success);

    // The negative step used the existing-but-denied channel.
    bool saw_denied = false;
    for (const auto& rec : fleet.event_log()) {
        if (rec.value("channel", "") == "attacker-plc2" && rec.contains("unreachable"))
            saw_denied = true;
    }
    CHECK(saw_denied);
}

TEST_CASE("failed steps poison their facts; dependents are skipped") {
    net::Fleet fleet = scenario_fleet(1);
    auto pb = parse_playbook(R"({"steps":[
        {"op":"fingerprint_range","from_db":99,"to_db":99,"expect":{"99":"PUT"}},
        {"op":"configure","db":99,"slot":2,
         "remote":"P#DB1.DBX0.0 BYTE 1","local":"P#DB100.DBX1.0 BYTE 1"},
        {"op":"collect","local":"P#DB100.DBX1.0 BYTE 1","save_as":"x"},
        {"op":"assert_equals","left":"$x","right":"5a"},
        {"op":"probe","db":99,"expect_size":600}]})");
    RunReport report = run::run_playbook(fleet, pb, 0);
    CHECK_FALSE(report.success);
    CHECK(report.steps[0].outcome == "failed");   // wrong expectation
    CHECK(report.steps[1].outcome == "skipped");  // fp:99 poisoned
    CHECK(report.steps[2].outcome == "skipped");
    CHECK(report.steps[3].outcome == "skipped");
    CHECK(report.steps[4].outcome == "ok");       // independent of the failure
}

TEST_CASE("identical topology, playbook and seed give identical logs") {
    auto run_once = [](std::string& log_out) {
        net::Fleet fleet = scenario_fleet(2);
        RunReport report = run::run_playbook(fleet, scenario_playbook(2), 99);
        log_out = fleet.event_log_jsonl();
        return report.to_json().dump();
    };
    std::string log_a, log_b;
    const std::string report_a = run_once(log_a);
    const std::string report_b = run_once(log_b);
    CHECK(report_a == report_b);
    CHECK(log_a == log_b);
    CHECK_FALSE(log_a.empty());
}

TEST_CASE("run_scenario rejects out-of-range numbers") {
    CHECK_THROWS_AS(run::run_scenario(9, 0), std::invalid_argument);
    CHECK_THROWS_AS(run::run_scenario(0, 0), std::invalid_argument);
}

TEST_CASE("scenario fixtures expose the documented shapes") {
    net::Fleet s1 = scenario_fleet(1);
    CHECK(s1.topology().plcs.size() == 2);
    CHECK(s1.topology().channels.size() == 2);
    CHECK_FALSE(s1.attacker_channel_to("plc2").has_value());

    net::Fleet s3 = scenario_fleet(3);
    CHECK(s3.topology().sites.size() == 2);
    CHECK(s3.attacker_channel_to("plc2").has_value());  // exists, but denied

    net::Fleet s4 = scenario_fleet(4);
    CHECK(s4.topology().plcs.size() == 3);
    CHECK(s4.topology().channels.size() == 3);
}
