// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include "plcpivot/plcpivot.h"

#include <cstring>
#include <memory>
#include <string>

#include "attack.hpp"
#include "fabric.hpp"
#include "jsonio.hpp"
#include "playbook.hpp"
#include "scenarios.hpp"
#include "wire.hpp"

using namespace plcpivot;

struct plcp_fleet {
    std::unique_ptr<net::Fleet> fleet;
};

struct plcp_session {
    plcp_fleet* owner = nullptr;
    std::unique_ptr<attack::Session> session;
};

namespace {

thread_local std::string t_last_error;

plcp_status set_error(plcp_status code, const std::string& msg) {
    t_last_error = msg;
    return code;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

plcp_status out_string(char** dst, const std::string& s) {
    if (!dst) return set_error(PLCP_EINVAL, "null output pointer");
    *dst = dup_string(s);
    if (!*dst) return set_error(PLCP_EINTERNAL, "allocation failure");
    return PLCP_OK;
}

// Maps toolkit exceptions onto status codes.
plcp_status classify_exception() {
    try {
        throw;
    } catch (const attack::ChainHopError& e) {
        return set_error(e.timed_out ? PLCP_ETIMEOUT : PLCP_ECAPABILITY, e.what());
    } catch (const attack::ChainCapabilityError& e) {
        return set_error(PLCP_ECAPABILITY, e.what());
    } catch (const attack::SlotOccupiedError& e) {
        return set_error(PLCP_EREFUSED, e.what());
    } catch (const attack::VerifyMismatchError& e) {
        return set_error(PLCP_EVERIFY, e.what());
    } catch (const attack::UnreachableError& e) {
        return set_error(PLCP_EUNREACHABLE, e.what());
    } catch (const attack::ProbeLimitError& e) {
        return set_error(PLCP_ERANGE, e.what());
    } catch (const attack::SessionError& e) {
        return set_error(PLCP_EINVAL, e.what());
    } catch (const run::PlaybookError& e) {
        return set_error(PLCP_ELOAD, e.what());
    } catch (const net::ConfigError& e) {
        return set_error(PLCP_ELOAD, e.what());
    } catch (const wire::EncodeError& e) {
        return set_error(PLCP_EPARSE, e.what());
    } catch (const std::invalid_argument& e) {
        return set_error(PLCP_EINVAL, e.what());
    } catch (const std::exception& e) {
        return set_error(PLCP_EINTERNAL, e.what());
    } catch (...) {
        return set_error(PLCP_EINTERNAL, "unknown error");
    }
}

nlohmann::ordered_json fingerprint_to_json(const attack::DbFingerprint& fp) {
    nlohmann::ordered_json j;
    j["db"] = fp.db_number;
    if (fp.size_bytes) j["size"] = *fp.size_bytes;
    j["class"] = attack::db_class_name(fp.classification);
    if (!fp.note.empty()) j["note"] = fp.note;
    nlohmann::ordered_json evidence = nlohmann::ordered_json::array();
    for (const auto& [offset, value] : fp.evidence)
        evidence.push_back({{"offset", offset}, {"value", value}});
    j["evidence"] = std::move(evidence);
    if (fp.classification == attack::DbClass::Get ||
        fp.classification == attack::DbClass::Put) {
        nlohmann::ordered_json slots = nlohmann::ordered_json::array();
        for (const auto& slot : fp.decoded_slots)
            slots.push_back(jsonio::describe_pointer_decode(slot));
        j["slots"] = std::move(slots);
    }
    return j;
}

std::vector<attack::Hop> parse_chain_json(const char* chain_json) {
    if (!chain_json) throw std::invalid_argument("null chain");
    auto j = nlohmann::json::parse(chain_json, nullptr, false);
    if (j.is_discarded() || !j.is_array() || j.empty())
        throw std::invalid_argument("chain must be a non-empty JSON array");
    std::vector<attack::Hop> chain;
    for (const auto& jh : j) {
        attack::Hop hop;
        if (!jh.contains("plc") || !jh["plc"].is_string())
            throw std::invalid_argument("chain hop needs a plc id");
        hop.plc = jh["plc"].get<std::string>();
        if (jh.contains("get_db")) hop.get_db = jh["get_db"].get<std::uint16_t>();
        if (jh.contains("put_db")) hop.put_db = jh["put_db"].get<std::uint16_t>();
        chain.push_back(std::move(hop));
    }
    return chain;
}

wire::AnyPointer parse_pointer_arg(const char* literal) {
    if (!literal) throw std::invalid_argument("null pointer literal");
    auto parsed = wire::parse_pointer_literal(literal);
    if (!parsed.pointer)
        throw std::invalid_argument("bad pointer literal at offset " +
                                    std::to_string(parsed.position) + ": " +
                                    parsed.error);
    return *parsed.pointer;
}

// Fleet calls must hold the mutex when a realtime thread may be running.
template <typename F>
plcp_status with_fleet(plcp_fleet* fleet, F&& f) {
    if (!fleet || !fleet->fleet) return set_error(PLCP_EINVAL, "null fleet handle");
    try {
        std::lock_guard<std::mutex> lock(fleet->fleet->mutex());
        return f(*fleet->fleet);
    } catch (...) {
        return classify_exception();
    }
}

template <typename F>
plcp_status with_session(plcp_session* session, F&& f) {
    if (!session || !session->session)
        return set_error(PLCP_EINVAL, "null session handle");
    try {
        std::lock_guard<std::mutex> lock(session->owner->fleet->mutex());
        return f(*session->session);
    } catch (...) {
        return classify_exception();
    }
}

}  // namespace

extern "C" {

const char* plcp_version(void) { return "0.1.0"; }

const char* plcp_last_error(void) { return t_last_error.c_str(); }

void plcp_string_free(char* s) { std::free(s); }

// ------------------------------------------------------------- wire codec

plcp_status plcp_frame_decode_json(const uint8_t* data, size_t len,
                                   char** json_out) {
    if (!data && len > 0) return set_error(PLCP_EINVAL, "null data");
    try {
        auto j = jsonio::describe_frame_bytes({data, len});
        return out_string(json_out, j.dump(2));
    } catch (...) {
        return classify_exception();
    }
}

plcp_status plcp_pointer_parse(const char* literal, uint8_t out[10]) {
    if (!out) return set_error(PLCP_EINVAL, "null output buffer");
    try {
        wire::AnyPointer p = parse_pointer_arg(literal);
        auto bytes = wire::encode_any_pointer(p);
        std::memcpy(out, bytes.data(), bytes.size());
        return PLCP_OK;
    } catch (const std::invalid_argument& e) {
        return set_error(PLCP_EPARSE, e.what());
    }
}

plcp_status plcp_pointer_format(const uint8_t bytes[10], char** literal_out) {
    if (!bytes) return set_error(PLCP_EINVAL, "null input");
    wire::PointerDecode d = wire::decode_any_pointer({bytes, wire::kPointerSize});
    if (d.is_unused()) return out_string(literal_out, "UNUSED");
    if (d.is_invalid()) return set_error(PLCP_EPARSE, "invalid pointer: " + d.reason);
    return out_string(literal_out, wire::format_pointer_literal(d.pointer));
}

// ------------------------------------------------------------------ fleet

plcp_status plcp_fleet_open(const char* topology_path, plcp_fleet** out) {
    if (!topology_path || !out) return set_error(PLCP_EINVAL, "null argument");
    try {
        auto topo = net::load_topology_file(topology_path);
        auto handle = std::make_unique<plcp_fleet>();
        handle->fleet = std::make_unique<net::Fleet>(std::move(topo));
        *out = handle.release();
        return PLCP_OK;
    } catch (...) {
        return classify_exception();
    }
}

plcp_status plcp_fleet_open_json(const char* topology_json, plcp_fleet** out) {
    if (!topology_json || !out) return set_error(PLCP_EINVAL, "null argument");
    try {
        auto topo = net::load_topology(topology_json);
        auto handle = std::make_unique<plcp_fleet>();
        handle->fleet = std::make_unique<net::Fleet>(std::move(topo));
        *out = handle.release();
        return PLCP_OK;
    } catch (...) {
        return classify_exception();
    }
}

void plcp_fleet_close(plcp_fleet* fleet) { delete fleet; }

uint64_t plcp_fleet_now(plcp_fleet* fleet) {
    if (!fleet || !fleet->fleet) return 0;
    std::lock_guard<std::mutex> lock(fleet->fleet->mutex());
    return fleet->fleet->now();
}

plcp_status plcp_fleet_advance(plcp_fleet* fleet, uint64_t micros) {
    return with_fleet(fleet, [&](net::Fleet& f) {
        f.advance(micros);
        return PLCP_OK;
    });
}

int plcp_fleet_plc_count(plcp_fleet* fleet) {
    if (!fleet || !fleet->fleet) return -1;
    return static_cast<int>(fleet->fleet->topology().plcs.size());
}

int plcp_fleet_channel_count(plcp_fleet* fleet) {
    if (!fleet || !fleet->fleet) return -1;
    return static_cast<int>(fleet->fleet->topology().channels.size());
}

plcp_status plcp_fleet_read_memory(plcp_fleet* fleet, const char* plc_id,
                                   uint16_t db, uint32_t start, uint32_t len,
                                   uint8_t* buf) {
    if (!plc_id || (!buf && len > 0)) return set_error(PLCP_EINVAL, "null argument");
    return with_fleet(fleet, [&](net::Fleet& f) {
        auto data = f.read_memory(plc_id, db, start, len);
        if (!data)
            return set_error(PLCP_EINVAL, "no such PLC/DB or range out of bounds");
        std::memcpy(buf, data->data(), data->size());
        return PLCP_OK;
    });
}

plcp_status plcp_fleet_write_memory(plcp_fleet* fleet, const char* plc_id,
                                    uint16_t db, uint32_t start,
                                    const uint8_t* data, uint32_t len) {
    if (!plc_id || (!data && len > 0)) return set_error(PLCP_EINVAL, "null argument");
    return with_fleet(fleet, [&](net::Fleet& f) {
        if (!f.write_memory(plc_id, db, start, {data, len}))
            return set_error(PLCP_EINVAL, "no such PLC/DB or range out of bounds");
        return PLCP_OK;
    });
}

plcp_status plcp_fleet_event_log(plcp_fleet* fleet, char** jsonl_out) {
    return with_fleet(fleet, [&](net::Fleet& f) {
        return out_string(jsonl_out, f.event_log_jsonl());
    });
}

plcp_status plcp_fleet_realtime_start(plcp_fleet* fleet) {
    if (!fleet || !fleet->fleet) return set_error(PLCP_EINVAL, "null fleet handle");
    try {
        fleet->fleet->realtime_start();
        return PLCP_OK;
    } catch (...) {
        return classify_exception();
    }
}

plcp_status plcp_fleet_realtime_stop(plcp_fleet* fleet) {
    if (!fleet || !fleet->fleet) return set_error(PLCP_EINVAL, "null fleet handle");
    fleet->fleet->realtime_stop();
    return PLCP_OK;
}

// ---------------------------------------------------------------- session

plcp_status plcp_session_open(plcp_fleet* fleet, const char* channel_id,
                              plcp_session** out) {
    if (!fleet || !fleet->fleet || !out)
        return set_error(PLCP_EINVAL, "null argument");
    try {
        auto handle = std::make_unique<plcp_session>();
        handle->owner = fleet;
        handle->session = std::make_unique<attack::Session>(
            *fleet->fleet, channel_id ? channel_id : "");
        *out = handle.release();
        return PLCP_OK;
    } catch (...) {
        return classify_exception();
    }
}

void plcp_session_close(plcp_session* session) { delete session; }

plcp_status plcp_session_set_poll_interval(plcp_session* session, uint64_t us) {
    return with_session(session, [&](attack::Session& s) {
        if (us == 0) return set_error(PLCP_EINVAL, "poll interval must be > 0");
        s.options().poll_interval = us;
        return PLCP_OK;
    });
}

uint64_t plcp_session_request_count(plcp_session* session) {
    if (!session || !session->session) return 0;
    return session->session->request_count();
}

int plcp_session_log_pure(plcp_session* session) {
    if (!session || !session->session) return 0;
    return session->session->log_kinds_pure() ? 1 : 0;
}

plcp_status plcp_session_request_log(plcp_session* session, char** jsonl_out) {
    return with_session(session, [&](attack::Session& s) {
        std::string out;
        for (const auto& rec : s.request_log()) {
            nlohmann::ordered_json j;
            j["t"] = rec.at;
            j["req"] = jsonio::describe_message(rec.request);
            if (rec.unreachable)
                j["unreachable"] = true;
            else
                j["resp"] = jsonio::describe_message(rec.response);
            out += j.dump();
            out += '\n';
        }
        return out_string(jsonl_out, out);
    });
}

plcp_status plcp_probe_db_size(plcp_session* session, uint16_t db,
                               uint32_t max_size, int64_t* size_out) {
    if (!size_out) return set_error(PLCP_EINVAL, "null size_out");
    return with_session(session, [&](attack::Session& s) {
        auto size = s.probe_db_size(db, max_size);
        *size_out = size ? static_cast<int64_t>(*size) : -1;
        return PLCP_OK;
    });
}

plcp_status plcp_fingerprint_db(plcp_session* session, uint16_t db,
                                char** json_out) {
    return with_session(session, [&](attack::Session& s) {
        auto fp = s.fingerprint_db(db);
        return out_string(json_out, fingerprint_to_json(fp).dump(2));
    });
}

plcp_status plcp_read_slot_usage(plcp_session* session, uint16_t db,
                                 char** json_out) {
    return with_session(session, [&](attack::Session& s) {
        attack::SlotUsage usage = s.read_slot_usage(db);
        nlohmann::ordered_json j;
        nlohmann::ordered_json addr = nlohmann::ordered_json::array();
        nlohmann::ordered_json local = nlohmann::ordered_json::array();
        for (int i = 0; i < sim::kSlotCount; ++i) {
            addr.push_back(jsonio::describe_pointer_decode(usage.addr[i]));
            local.push_back(jsonio::describe_pointer_decode(usage.local[i]));
        }
        j["addr"] = std::move(addr);
        j["local"] = std::move(local);
        nlohmann::ordered_json spare = nlohmann::ordered_json::array();
        for (int s2 : usage.spare) spare.push_back(s2);
        j["spare"] = std::move(spare);
        return out_string(json_out, j.dump(2));
    });
}

plcp_status plcp_configure_slot(plcp_session* session, uint16_t db, int fb_kind,
                                int slot, const char* remote, const char* local,
                                const uint8_t* value, size_t value_len,
                                int overwrite) {
    return with_session(session, [&](attack::Session& s) {
        const sim::FbKind kind =
            fb_kind == PLCP_FB_PUT ? sim::FbKind::Put : sim::FbKind::Get;
        s.configure_slot(db, kind, slot, parse_pointer_arg(remote),
                         parse_pointer_arg(local),
                         {value, value ? value_len : 0}, overwrite != 0);
        return PLCP_OK;
    });
}

plcp_status plcp_await_execution(plcp_session* session, uint16_t db,
                                 uint64_t timeout_us, uint32_t* pulses_out,
                                 uint16_t* status_out) {
    return with_session(session, [&](attack::Session& s) {
        attack::ExecutionObservation obs = s.await_execution(db, timeout_us);
        if (pulses_out) *pulses_out = obs.pulses;
        if (status_out) *status_out = obs.last_status;
        if (obs.timed_out)
            return set_error(PLCP_ETIMEOUT, "no full REQ pulse before timeout");
        return PLCP_OK;
    });
}

plcp_status plcp_collect_result(plcp_session* session, const char* local,
                                uint8_t* buf, size_t buf_len, size_t* len_out) {
    if (!buf || !len_out) return set_error(PLCP_EINVAL, "null output");
    return with_session(session, [&](attack::Session& s) {
        auto bytes = s.collect_result(parse_pointer_arg(local));
        if (bytes.size() > buf_len)
            return set_error(PLCP_EINVAL, "buffer too small: need " +
                                              std::to_string(bytes.size()));
        std::memcpy(buf, bytes.data(), bytes.size());
        *len_out = bytes.size();
        return PLCP_OK;
    });
}

plcp_status plcp_reset_slot(plcp_session* session, uint16_t db, int fb_kind,
                            int slot) {
    return with_session(session, [&](attack::Session& s) {
        const sim::FbKind kind =
            fb_kind == PLCP_FB_PUT ? sim::FbKind::Put : sim::FbKind::Get;
        s.reset_slot(db, kind, slot);
        return PLCP_OK;
    });
}

plcp_status plcp_remote_read(plcp_session* session, const char* chain_json,
                             const char* target, uint8_t* buf, size_t buf_len,
                             size_t* len_out) {
    if (!buf || !len_out) return set_error(PLCP_EINVAL, "null output");
    return with_session(session, [&](attack::Session& s) {
        auto bytes = s.remote_read(parse_chain_json(chain_json),
                                   parse_pointer_arg(target));
        if (bytes.size() > buf_len)
            return set_error(PLCP_EINVAL, "buffer too small: need " +
                                              std::to_string(bytes.size()));
        std::memcpy(buf, bytes.data(), bytes.size());
        *len_out = bytes.size();
        return PLCP_OK;
    });
}

plcp_status plcp_remote_write(plcp_session* session, const char* chain_json,
                              const char* target, const uint8_t* data,
                              size_t len, int verify) {
    if (!data && len > 0) return set_error(PLCP_EINVAL, "null data");
    return with_session(session, [&](attack::Session& s) {
        attack::ChainOptions opts;
        opts.verify_writes = verify != 0;
        s.remote_write(parse_chain_json(chain_json), parse_pointer_arg(target),
                       {data, len}, opts);
        return PLCP_OK;
    });
}

// ------------------------------------------------------------------- runs

static plcp_status finish_run(const run::RunReport& report, char** report_json_out) {
    if (report_json_out) {
        plcp_status rc = out_string(report_json_out, report.to_json().dump(2));
        if (rc != PLCP_OK) return rc;
    }
    if (!report.success)
        return set_error(PLCP_EASSERT,
                         "playbook failed: " + std::to_string(report.assertions_failed) +
                             " assertion(s) failed");
    return PLCP_OK;
}

plcp_status plcp_run_playbook(const char* topology_path,
                              const char* playbook_path, uint64_t seed,
                              const char* log_path, const char* report_path,
                              char** report_json_out) {
    if (!topology_path || !playbook_path)
        return set_error(PLCP_EINVAL, "null path");
    try {
        run::RunReport report = run::run_playbook_files(
            topology_path, playbook_path, seed, log_path ? log_path : "",
            report_path ? report_path : "");
        return finish_run(report, report_json_out);
    } catch (...) {
        return classify_exception();
    }
}

plcp_status plcp_run_scenario(int n, uint64_t seed, const char* log_path,
                              const char* report_path, char** report_json_out) {
    try {
        run::RunReport report = run::run_scenario(n, seed, log_path ? log_path : "",
                                                  report_path ? report_path : "");
        return finish_run(report, report_json_out);
    } catch (...) {
        return classify_exception();
    }
}

plcp_status plcp_scenario_topology(int n, char** json_out) {
    const char* text = run::scenario_topology_json(n);
    if (!text) return set_error(PLCP_EINVAL, "scenario number must be 1..4");
    return out_string(json_out, text);
}

plcp_status plcp_scenario_playbook(int n, char** json_out) {
    const std::string text = run::scenario_playbook_json(n);
    if (text.empty()) return set_error(PLCP_EINVAL, "scenario number must be 1..4");
    return out_string(json_out, text);
}

}  // extern "C"
