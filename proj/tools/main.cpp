// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

// plcpivot CLI: fleet launcher, attack playbook runner, canned scenarios,
// and a frame pretty-printer. Everything goes through the shared library's
// C API. Exit codes: 0 success, 1 assertion failure, 2 usage/load error.

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "plcpivot/plcpivot.h"

namespace {

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

int exit_code_for(plcp_status rc) {
    if (rc == PLCP_OK) return 0;
    if (rc == PLCP_EASSERT) return 1;
    return 2;
}

int fail(plcp_status rc) {
    std::cerr << "error: " << plcp_last_error() << "\n";
    return exit_code_for(rc);
}

std::vector<uint8_t> parse_hex(const std::string& text, bool& ok) {
    std::vector<uint8_t> out;
    int hi = -1;
    ok = true;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        int n = -1;
        if (c >= '0' && c <= '9') n = c - '0';
        else if (c >= 'a' && c <= 'f') n = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') n = c - 'A' + 10;
        else { ok = false; return out; }
        if (hi < 0) { hi = n; } else { out.push_back(static_cast<uint8_t>((hi << 4) | n)); hi = -1; }
    }
    if (hi >= 0) ok = false;
    return out;
}

int cmd_fleet_run(const std::string& topology, const std::string& mode,
                  double duration_s, const std::string& log_path) {
    plcp_fleet* fleet = nullptr;
    plcp_status rc = plcp_fleet_open(topology.c_str(), &fleet);
    if (rc != PLCP_OK) return fail(rc);

    std::printf("fleet up: %d PLC(s), %d channel(s)\n", plcp_fleet_plc_count(fleet),
                plcp_fleet_channel_count(fleet));

    if (mode == "realtime") {
        rc = plcp_fleet_realtime_start(fleet);
        if (rc != PLCP_OK) {
            plcp_fleet_close(fleet);
            return fail(rc);
        }
        std::printf("realtime mode; Ctrl-C to stop\n");
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        plcp_fleet_realtime_stop(fleet);
    } else {
        const uint64_t micros = static_cast<uint64_t>(duration_s * 1e6);
        rc = plcp_fleet_advance(fleet, micros);
        if (rc != PLCP_OK) {
            plcp_fleet_close(fleet);
            return fail(rc);
        }
        std::printf("advanced %.3f s of virtual time (now=%llu us)\n", duration_s,
                    static_cast<unsigned long long>(plcp_fleet_now(fleet)));
    }

    if (!log_path.empty()) {
        char* log = nullptr;
        rc = plcp_fleet_event_log(fleet, &log);
        if (rc == PLCP_OK) {
            FILE* f = std::fopen(log_path.c_str(), "wb");
            if (f) {
                std::fputs(log, f);
                std::fclose(f);
                std::printf("event log written to %s\n", log_path.c_str());
            } else {
                std::cerr << "error: cannot write " << log_path << "\n";
                plcp_string_free(log);
                plcp_fleet_close(fleet);
                return 2;
            }
            plcp_string_free(log);
        }
    }
    plcp_fleet_close(fleet);
    return 0;
}

void print_report_summary(const char* report_json) {
    // The report is JSON; the CLI keeps its own output line-oriented and
    // leaves parsing to --report consumers.
    std::fputs(report_json, stdout);
    std::fputs("\n", stdout);
}

int cmd_attack_play(const std::string& topology, const std::string& playbook,
                    uint64_t seed, const std::string& log_path,
                    const std::string& report_path, bool quiet) {
    char* report = nullptr;
    plcp_status rc = plcp_run_playbook(topology.c_str(), playbook.c_str(), seed,
                                       log_path.empty() ? nullptr : log_path.c_str(),
                                       report_path.empty() ? nullptr : report_path.c_str(),
                                       &report);
    if (report) {
        if (!quiet) print_report_summary(report);
        plcp_string_free(report);
    }
    if (rc != PLCP_OK && rc != PLCP_EASSERT) return fail(rc);
    if (rc == PLCP_EASSERT) std::cerr << "playbook failed: " << plcp_last_error() << "\n";
    return exit_code_for(rc);
}

int cmd_scenario(int n, uint64_t seed, const std::string& log_path,
                 const std::string& report_path, bool show_topology,
                 bool show_playbook, bool quiet) {
    if (show_topology || show_playbook) {
        char* text = nullptr;
        plcp_status rc = show_topology ? plcp_scenario_topology(n, &text)
                                       : plcp_scenario_playbook(n, &text);
        if (rc != PLCP_OK) return fail(rc);
        std::fputs(text, stdout);
        std::fputs("\n", stdout);
        plcp_string_free(text);
        return 0;
    }
    char* report = nullptr;
    plcp_status rc = plcp_run_scenario(n, seed,
                                       log_path.empty() ? nullptr : log_path.c_str(),
                                       report_path.empty() ? nullptr : report_path.c_str(),
                                       &report);
    if (report) {
        if (!quiet) print_report_summary(report);
        plcp_string_free(report);
    }
    if (rc != PLCP_OK && rc != PLCP_EASSERT) return fail(rc);
    if (rc == PLCP_EASSERT) std::cerr << "scenario failed: " << plcp_last_error() << "\n";
    return exit_code_for(rc);
}

int cmd_codec_decode(std::string hex) {
    if (hex.empty() || hex == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        hex = ss.str();
    }
    bool ok = false;
    std::vector<uint8_t> bytes = parse_hex(hex, ok);
    if (!ok) {
        std::cerr << "error: input is not a hex byte string\n";
        return 2;
    }
    char* json = nullptr;
    plcp_status rc = plcp_frame_decode_json(bytes.data(), bytes.size(), &json);
    if (rc != PLCP_OK) return fail(rc);
    std::fputs(json, stdout);
    std::fputs("\n", stdout);
    plcp_string_free(json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"plcpivot: PLC fleet simulator and PUT/GET pivoting toolkit"};
    app.require_subcommand(1);

    // fleet run
    auto* fleet = app.add_subcommand("fleet", "fleet operations");
    fleet->require_subcommand(1);
    auto* fleet_run = fleet->add_subcommand("run", "launch a fleet from a topology file");
    std::string topology, mode = "virtual", log_path, report_path, playbook;
    double duration_s = 5.0;
    uint64_t seed = 0;
    fleet_run->add_option("--topology", topology, "topology JSON file")->required();
    fleet_run->add_option("--mode", mode, "virtual|realtime")
        ->check(CLI::IsMember({"virtual", "realtime"}));
    fleet_run->add_option("--duration", duration_s,
                          "virtual seconds to simulate (virtual mode)");
    fleet_run->add_option("--log", log_path, "write the JSONL event log here");

    // attack play
    auto* attack = app.add_subcommand("attack", "attack operations");
    attack->require_subcommand(1);
    auto* attack_play = attack->add_subcommand("play", "run a playbook against a topology");
    bool quiet = false;
    attack_play->add_option("--topology", topology, "topology JSON file")->required();
    attack_play->add_option("--playbook", playbook, "playbook JSON file")->required();
    attack_play->add_option("--seed", seed, "run seed (recorded in the report)");
    attack_play->add_option("--mode", mode, "virtual (realtime not supported here)")
        ->check(CLI::IsMember({"virtual"}));
    attack_play->add_option("--log", log_path, "write the JSONL event log here");
    attack_play->add_option("--report", report_path, "write the JSON run report here");
    attack_play->add_flag("--quiet", quiet, "suppress the report on stdout");

    // scenario <n>
    auto* scenario = app.add_subcommand("scenario", "run a bundled scenario (1..4)");
    int scenario_n = 0;
    bool show_topology = false, show_playbook = false;
    scenario->add_option("n", scenario_n, "scenario number")->required();
    scenario->add_option("--seed", seed, "run seed (recorded in the report)");
    scenario->add_option("--log", log_path, "write the JSONL event log here");
    scenario->add_option("--report", report_path, "write the JSON run report here");
    scenario->add_flag("--show-topology", show_topology, "print the fixture topology and exit");
    scenario->add_flag("--show-playbook", show_playbook, "print the fixture playbook and exit");
    scenario->add_flag("--quiet", quiet, "suppress the report on stdout");

    // codec decode
    auto* codec = app.add_subcommand("codec", "wire codec utilities");
    codec->require_subcommand(1);
    auto* codec_decode = codec->add_subcommand("decode", "pretty-print hex frames");
    std::string hex;
    codec_decode->add_option("hex", hex, "hex bytes (or - for stdin)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (fleet_run->parsed()) return cmd_fleet_run(topology, mode, duration_s, log_path);
    if (attack_play->parsed())
        return cmd_attack_play(topology, playbook, seed, log_path, report_path, quiet);
    if (scenario->parsed())
        return cmd_scenario(scenario_n, seed, log_path, report_path, show_topology,
                            show_playbook, quiet);
    if (codec_decode->parsed()) return cmd_codec_decode(hex);
    return 2;
}
