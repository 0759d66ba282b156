/*
 * Copyright (c) 2026 plcpivot contributors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * plcpivot -- simulated PLC fleets with PUT/GET function-block
 * communications, plus an attacker toolkit that enumerates, fingerprints,
 * hijacks and chains those communications to reach nested PLCs.
 *
 * This is the C surface of the shared library. Handles are opaque; every
 * function returns a plcp_status (PLCP_OK on success) and the most recent
 * failure message is available per thread via plcp_last_error(). Strings
 * returned through char** out-parameters are heap-allocated; release them
 * with plcp_string_free().
 *
 * Durations and timestamps are virtual-clock microseconds unless the fleet
 * is running in realtime mode.
 */

#ifndef PLCPIVOT_H
#define PLCPIVOT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct plcp_fleet plcp_fleet;
typedef struct plcp_session plcp_session;

typedef enum plcp_status {
    PLCP_OK = 0,
    PLCP_EINVAL = 1,       /* bad argument / usage error */
    PLCP_EIO = 2,          /* file / socket problem */
    PLCP_EPARSE = 3,       /* malformed frame, pointer, or JSON */
    PLCP_ELOAD = 4,        /* topology or playbook failed validation */
    PLCP_EUNREACHABLE = 5, /* delivery denied or no path */
    PLCP_ETIMEOUT = 6,     /* await/remote op hit its deadline */
    PLCP_EREFUSED = 7,     /* slot occupied and overwrite not set */
    PLCP_ECAPABILITY = 8,  /* pivot chain lacks a needed FB or spare slot */
    PLCP_EVERIFY = 9,      /* remote write read-back mismatch */
    PLCP_EASSERT = 10,     /* playbook ran, but a step failed */
    PLCP_ERANGE = 11,      /* probe walked past max_size */
    PLCP_EINTERNAL = 12
} plcp_status;

/* FB kinds for slot operations. */
#define PLCP_FB_GET 0
#define PLCP_FB_PUT 1

const char* plcp_version(void);
/* Message for the calling thread's most recent failure; empty if none. */
const char* plcp_last_error(void);
void plcp_string_free(char* s);

/* ----------------------------------------------------------- wire codec */

/* Classifies `data` as protocol frames; *json_out gets a JSON description
 * (decoded messages, or the malformed/incomplete verdict). */
plcp_status plcp_frame_decode_json(const uint8_t* data, size_t len,
                                   char** json_out);

/* P# literal -> 10-byte pointer, and back. */
plcp_status plcp_pointer_parse(const char* literal, uint8_t out[10]);
plcp_status plcp_pointer_format(const uint8_t bytes[10], char** literal_out);

/* ----------------------------------------------------------------- fleet */

plcp_status plcp_fleet_open(const char* topology_path, plcp_fleet** out);
plcp_status plcp_fleet_open_json(const char* topology_json, plcp_fleet** out);
void plcp_fleet_close(plcp_fleet* fleet);

uint64_t plcp_fleet_now(plcp_fleet* fleet);
plcp_status plcp_fleet_advance(plcp_fleet* fleet, uint64_t micros);
int plcp_fleet_plc_count(plcp_fleet* fleet);
int plcp_fleet_channel_count(plcp_fleet* fleet);

/* Direct memory oracle (bypasses the protocol; for harnesses and tests). */
plcp_status plcp_fleet_read_memory(plcp_fleet* fleet, const char* plc_id,
                                   uint16_t db, uint32_t start, uint32_t len,
                                   uint8_t* buf);
plcp_status plcp_fleet_write_memory(plcp_fleet* fleet, const char* plc_id,
                                    uint16_t db, uint32_t start,
                                    const uint8_t* data, uint32_t len);

/* Event log as JSONL (one record per exchange and per FB transfer). */
plcp_status plcp_fleet_event_log(plcp_fleet* fleet, char** jsonl_out);

/* Realtime mode: wall-clock pacing plus TCP listeners on attacker channels
 * that declare a tcp_port. */
plcp_status plcp_fleet_realtime_start(plcp_fleet* fleet);
plcp_status plcp_fleet_realtime_stop(plcp_fleet* fleet);

/* --------------------------------------------------------------- session */

/* channel_id may be NULL when the topology has exactly one attacker
 * channel. */
plcp_status plcp_session_open(plcp_fleet* fleet, const char* channel_id,
                              plcp_session** out);
void plcp_session_close(plcp_session* session);
plcp_status plcp_session_set_poll_interval(plcp_session* session, uint64_t us);
uint64_t plcp_session_request_count(plcp_session* session);
/* 1 when the request log holds read/write kinds only. */
int plcp_session_log_pure(plcp_session* session);
plcp_status plcp_session_request_log(plcp_session* session, char** jsonl_out);

/* size_out: the probed DB size, or -1 when the DB does not exist. */
plcp_status plcp_probe_db_size(plcp_session* session, uint16_t db,
                               uint32_t max_size, int64_t* size_out);

/* JSON fingerprint: {"db":99,"size":600,"class":"GET","evidence":[...],
 * "slots":[...]} */
plcp_status plcp_fingerprint_db(plcp_session* session, uint16_t db,
                                char** json_out);

plcp_status plcp_read_slot_usage(plcp_session* session, uint16_t db,
                                 char** json_out);

/* remote/local are P# literals; value may be NULL for GET. */
plcp_status plcp_configure_slot(plcp_session* session, uint16_t db, int fb_kind,
                                int slot, const char* remote, const char* local,
                                const uint8_t* value, size_t value_len,
                                int overwrite);

plcp_status plcp_await_execution(plcp_session* session, uint16_t db,
                                 uint64_t timeout_us, uint32_t* pulses_out,
                                 uint16_t* status_out);

plcp_status plcp_collect_result(plcp_session* session, const char* local,
                                uint8_t* buf, size_t buf_len, size_t* len_out);

plcp_status plcp_reset_slot(plcp_session* session, uint16_t db, int fb_kind,
                            int slot);

/* chain_json: [{"plc":"plc1","get_db":99,"put_db":77}, ...] */
plcp_status plcp_remote_read(plcp_session* session, const char* chain_json,
                             const char* target, uint8_t* buf, size_t buf_len,
                             size_t* len_out);
plcp_status plcp_remote_write(plcp_session* session, const char* chain_json,
                              const char* target, const uint8_t* data,
                              size_t len, int verify);

/* ------------------------------------------------------------------ runs */

/* Playbook run over a topology file. Outputs are optional (NULL/empty to
 * skip); *report_json_out (optional) gets the report. Returns PLCP_OK only
 * when every step passed. */
plcp_status plcp_run_playbook(const char* topology_path,
                              const char* playbook_path, uint64_t seed,
                              const char* log_path, const char* report_path,
                              char** report_json_out);

/* Bundled scenario pair (n in 1..4), same outputs as plcp_run_playbook. */
plcp_status plcp_run_scenario(int n, uint64_t seed, const char* log_path,
                              const char* report_path, char** report_json_out);

plcp_status plcp_scenario_topology(int n, char** json_out);
plcp_status plcp_scenario_playbook(int n, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* PLCPIVOT_H */
