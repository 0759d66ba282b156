// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library strictly through the public C header, the
// way an external consumer (FFI binding, fuzzer harness) would.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>

#include "plcpivot/plcpivot.h"

namespace {

struct FleetHandle {
    plcp_fleet* fleet = nullptr;
    ~FleetHandle() { plcp_fleet_close(fleet); }
};

struct SessionHandle {
    plcp_session* session = nullptr;
    ~SessionHandle() { plcp_session_close(session); }
};

struct CString {
    char* s = nullptr;
    ~CString() { plcp_string_free(s); }
};

std::string scenario_topology(int n) {
    CString text;
    REQUIRE(plcp_scenario_topology(n, &text.s) == PLCP_OK);
    return text.s;
}

}  // namespace

TEST_CASE("version and error plumbing") {
    CHECK(std::string(plcp_version()) == "0.1.0");
    CHECK(plcp_fleet_open(nullptr, nullptr) == PLCP_EINVAL);
    CHECK(std::string(plcp_last_error()).size() > 0);
}

TEST_CASE("pointer literals across the C surface") {
    uint8_t bytes[10];
    REQUIRE(plcp_pointer_parse("P#DB1.DBX0.0 BYTE 1", bytes) == PLCP_OK);
    const uint8_t want[10] = {0x10, 0x02, 0x00, 0x01, 0x00, 0x01, 0x84, 0, 0, 0};
    CHECK(std::memcmp(bytes, want, 10) == 0);

    CString literal;
    REQUIRE(plcp_pointer_format(bytes, &literal.s) == PLCP_OK);
    CHECK(std::string(literal.s) == "P#DB1.DBX0.0 BYTE 1");

    const uint8_t zeros[10] = {};
    CString unused;
    REQUIRE(plcp_pointer_format(zeros, &unused.s) == PLCP_OK);
    CHECK(std::string(unused.s) == "UNUSED");

    CHECK(plcp_pointer_parse("P#DB1", bytes) == PLCP_EPARSE);
}

TEST_CASE("frame decode via the C surface") {
    const uint8_t frame[] = {0x00, 0x0B, 0x4C, 0x50, 0x01, 0x81, 0x00,
                             0x01, 0x01, 0xFF, 0x00, 0x01, 0x5A};
    CString json;
    REQUIRE(plcp_frame_decode_json(frame, sizeof frame, &json.s) == PLCP_OK);
    std::string text = json.s;
    CHECK(text.find("read_response") != std::string::npos);
    CHECK(text.find("\"5a\"") != std::string::npos);
}

TEST_CASE("fleet lifecycle, memory oracle, session operations") {
    const std::string topo = scenario_topology(1);
    FleetHandle fleet;
    REQUIRE(plcp_fleet_open_json(topo.c_str(), &fleet.fleet) == PLCP_OK);
    CHECK(plcp_fleet_plc_count(fleet.fleet) == 2);
    CHECK(plcp_fleet_channel_count(fleet.fleet) == 2);

    REQUIRE(plcp_fleet_advance(fleet.fleet, 300'000) == PLCP_OK);
    CHECK(plcp_fleet_now(fleet.fleet) == 300'000);

    uint8_t marker = 0;
    REQUIRE(plcp_fleet_read_memory(fleet.fleet, "plc2", 1, 0, 1, &marker) == PLCP_OK);
    CHECK(marker == 0x5A);

    SessionHandle session;
    REQUIRE(plcp_session_open(fleet.fleet, nullptr, &session.session) == PLCP_OK);

    int64_t size = 0;
    REQUIRE(plcp_probe_db_size(session.session, 99, 1 << 20, &size) == PLCP_OK);
    CHECK(size == 600);
    REQUIRE(plcp_probe_db_size(session.session, 4242, 1 << 20, &size) == PLCP_OK);
    CHECK(size == -1);

    CString fp;
    REQUIRE(plcp_fingerprint_db(session.session, 99, &fp.s) == PLCP_OK);
    CHECK(std::string(fp.s).find("\"GET\"") != std::string::npos);

    CString usage;
    REQUIRE(plcp_read_slot_usage(session.session, 99, &usage.s) == PLCP_OK);
    CHECK(std::string(usage.s).find("spare") != std::string::npos);

    // Full hijack cycle through the C API.
    REQUIRE(plcp_configure_slot(session.session, 99, PLCP_FB_GET, 2,
                                "P#DB1.DBX0.0 BYTE 1", "P#DB100.DBX1.0 BYTE 1",
                                nullptr, 0, 0) == PLCP_OK);
    // Occupied now: a second configure without overwrite is refused.
    CHECK(plcp_configure_slot(session.session, 99, PLCP_FB_GET, 2,
                              "P#DB1.DBX0.0 BYTE 1", "P#DB100.DBX1.0 BYTE 1",
                              nullptr, 0, 0) == PLCP_EREFUSED);

    uint32_t pulses = 0;
    uint16_t status = 0xFFFF;
    REQUIRE(plcp_await_execution(session.session, 99, 600'000, &pulses, &status) ==
            PLCP_OK);
    CHECK(pulses >= 1);
    CHECK(status == 0);

    uint8_t collected[4];
    size_t collected_len = 0;
    REQUIRE(plcp_collect_result(session.session, "P#DB100.DBX1.0 BYTE 1", collected,
                                sizeof collected, &collected_len) == PLCP_OK);
    REQUIRE(collected_len == 1);
    CHECK(collected[0] == 0x5A);

    REQUIRE(plcp_reset_slot(session.session, 99, PLCP_FB_GET, 2) == PLCP_OK);
    CHECK(plcp_session_log_pure(session.session) == 1);
    CHECK(plcp_session_request_count(session.session) > 0);

    CString log;
    REQUIRE(plcp_session_request_log(session.session, &log.s) == PLCP_OK);
    CHECK(std::string(log.s).find("read_request") != std::string::npos);

    CString events;
    REQUIRE(plcp_fleet_event_log(fleet.fleet, &events.s) == PLCP_OK);
    CHECK(std::string(events.s).find("\"transfer\"") != std::string::npos);
}

TEST_CASE("remote operations through the C surface") {
    const std::string topo = scenario_topology(1);
    FleetHandle fleet;
    REQUIRE(plcp_fleet_open_json(topo.c_str(), &fleet.fleet) == PLCP_OK);
    REQUIRE(plcp_fleet_advance(fleet.fleet, 300'000) == PLCP_OK);
    SessionHandle session;
    REQUIRE(plcp_session_open(fleet.fleet, "attacker-plc1", &session.session) ==
            PLCP_OK);

    const char* chain = R"([{"plc":"plc1","get_db":99,"put_db":77}])";
    uint8_t buf[8];
    size_t len = 0;
    REQUIRE(plcp_remote_read(session.session, chain, "P#DB1.DBX0.0 BYTE 1", buf,
                             sizeof buf, &len) == PLCP_OK);
    REQUIRE(len == 1);
    CHECK(buf[0] == 0x5A);

    const uint8_t value = 0xA5;
    REQUIRE(plcp_remote_write(session.session, chain, "P#DB1.DBX9.0 BYTE 1", &value,
                              1, 1) == PLCP_OK);
    uint8_t check = 0;
    REQUIRE(plcp_fleet_read_memory(fleet.fleet, "plc2", 1, 9, 1, &check) == PLCP_OK);
    CHECK(check == 0xA5);

    // Capability failure maps onto its status code.
    const char* lame = R"([{"plc":"plc1","put_db":77}])";
    CHECK(plcp_remote_read(session.session, lame, "P#DB1.DBX0.0 BYTE 1", buf,
                           sizeof buf, &len) == PLCP_ECAPABILITY);
}

TEST_CASE("scenario runner returns reports and honors failure codes") {
    CString report;
    CHECK(plcp_run_scenario(1, 1, nullptr, nullptr, &report.s) == PLCP_OK);
    std::string text = report.s;
    CHECK(text.find("\"success\": true") != std::string::npos);

    CHECK(plcp_run_scenario(9, 1, nullptr, nullptr, nullptr) == PLCP_EINVAL);
}

TEST_CASE("load errors surface as PLCP_ELOAD with a message") {
    plcp_fleet* fleet = nullptr;
    CHECK(plcp_fleet_open_json("{\"plcs\": 7}", &fleet) == PLCP_ELOAD);
    CHECK(std::string(plcp_last_error()).find("plcs") != std::string::npos);
    CHECK(plcp_fleet_open("/nonexistent/topo.json", &fleet) == PLCP_ELOAD);
}
