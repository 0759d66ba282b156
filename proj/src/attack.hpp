// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * @file attack.hpp
 * @brief Attacker toolkit: DB size probing, PUT/GET fingerprinting by memory
 *        address interrogation, slot-usage decoding, spare-slot hijack, REQ
 *        monitoring, result collection, reset, and recursive multi-hop
 *        remote read/write over pivot chains.
 *
 * A session speaks the LP protocol over one attacker entry channel and never
 * emits anything but read and write requests. Every exchange is appended to
 * the session's request log.
 *
 * Fingerprinting classifies a DB as GET/PUT when its probed size matches a
 * known instance-DB profile, every probed unused offset reads zero, and
 * (optionally) the ADDR slots decode as valid pointers. The default probe
 * set is offsets 1 and 5, the first eight WORK bytes (88..95) and the last
 * four bytes of the DB.
 *
 * Multi-hop operations are defined recursively: a chain of length one
 * hijacks a spare slot on the entry PLC directly; longer chains use the
 * prefix chain's remote writes to configure the next hop's FB instance DB,
 * the prefix's remote reads to watch its REQ/STATUS and fetch scratch, and
 * clean up behind themselves. Hijack scratch lives in the WORK area of the
 * hop's own instance DB, above the probed offsets (byte 96 up), so a reset
 * slot re-fingerprints identically.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fabric.hpp"
#include "wire.hpp"

namespace plcpivot::attack {

using net::Fleet;
using net::Micros;

class SessionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Entry channel failure (denied, no such channel, peer down).
class UnreachableError : public SessionError {
  public:
    using SessionError::SessionError;
};

/// Peer answered with a protocol-error response or a shape violation.
class ProtocolError : public SessionError {
  public:
    using SessionError::SessionError;
};

/// probe_db_size walked past max_size without finding the end.
class ProbeLimitError : public SessionError {
  public:
    using SessionError::SessionError;
};

class SlotOccupiedError : public SessionError {
  public:
    using SessionError::SessionError;
};

/// A chain hop lacks the FB needed to go deeper; carries the hop index.
class ChainCapabilityError : public SessionError {
  public:
    ChainCapabilityError(int hop, const std::string& msg)
        : SessionError(msg), hop_index(hop) {}
    int hop_index;
};

/// Per-hop failure during a remote operation (timeout or FB error status).
class ChainHopError : public SessionError {
  public:
    ChainHopError(int hop, const std::string& msg, std::uint16_t status = 0,
                  bool timed_out = false)
        : SessionError(msg), hop_index(hop), status(status), timed_out(timed_out) {}
    int hop_index;
    std::uint16_t status;
    bool timed_out;
};

class VerifyMismatchError : public SessionError {
  public:
    using SessionError::SessionError;
};

enum class DbClass { Get, Put, Other, Absent };
const char* db_class_name(DbClass c);

struct ProbeSet {
    std::vector<std::uint32_t> fixed{1, 5, 88, 89, 90, 91, 92, 93, 94, 95};
    std::uint32_t tail_bytes = 4;  // also probe the last N bytes of the DB

    std::vector<std::uint32_t> offsets_for(std::uint32_t db_size) const;
};

struct SessionOptions {
    Micros poll_interval = 10'000;
    std::uint32_t max_probe_size = wire::kMaxByteOffset + 1;
    ProbeSet probes;
    bool validate_pointers = true;  // fingerprint step 5
    std::map<std::uint32_t, sim::FbKind> size_profiles{
        {sim::kGetDbSize, sim::FbKind::Get}, {sim::kPutDbSize, sim::FbKind::Put}};
};

struct DbFingerprint {
    std::uint16_t db_number = 0;
    std::optional<std::uint32_t> size_bytes;
    DbClass classification = DbClass::Other;
    std::vector<std::pair<std::uint32_t, std::uint8_t>> evidence;  // probed bytes
    std::array<wire::PointerDecode, sim::kSlotCount> decoded_slots{};  // ADDR region
    std::string note;
};

struct SlotUsage {
    std::array<wire::PointerDecode, sim::kSlotCount> addr{};
    std::array<wire::PointerDecode, sim::kSlotCount> local{};  // RD or SD
    std::set<int> spare;  // 1-based slots with both pointers UNUSED
};

struct ExecutionObservation {
    std::uint32_t pulses = 0;
    std::uint16_t last_status = 0;
    bool timed_out = false;
    Micros elapsed = 0;
};

struct Hop {
    std::string plc;
    std::optional<std::uint16_t> get_db;
    std::optional<std::uint16_t> put_db;
};

struct ChainOptions {
    Micros hop_timeout = 120'000'000;  // await budget per hop
    bool verify_writes = true;
};

// Scratch placement: above the probed WORK prefix, below the probed tail.
inline constexpr std::uint32_t kScratchOffset = 96;

struct LogRecord {
    Micros at = 0;
    wire::ProtocolMessage request;
    bool unreachable = false;
    wire::ProtocolMessage response;  // valid when !unreachable
};

class Session {
  public:
    /// Binds to the given attacker channel, or the only attacker channel
    /// when `entry_channel` is empty (throws if it is ambiguous or absent).
    Session(Fleet& fleet, std::string entry_channel = {}, SessionOptions opts = {});

    const std::string& entry_channel() const { return channel_; }
    /// PLC on the far side of the entry channel.
    const std::string& entry_plc() const { return entry_plc_; }
    Fleet& fleet() { return fleet_; }
    SessionOptions& options() { return opts_; }

    const std::vector<LogRecord>& request_log() const { return log_; }
    std::size_t request_count() const { return log_.size(); }
    /// True iff every logged message is a read/write request or response.
    bool log_kinds_pure() const;

    // --- protocol primitives (all logged) ---
    wire::ProtocolMessage exchange(wire::ProtocolMessage request);
    struct ReadOutcome {
        wire::ReturnCode code = wire::ReturnCode::Success;
        std::vector<std::uint8_t> data;
        bool ok() const { return code == wire::ReturnCode::Success; }
    };
    ReadOutcome read_bytes(std::uint16_t db, std::uint32_t start, std::uint16_t len);
    std::vector<wire::ResultItem> read_items(const std::vector<wire::AddressItem>& items);
    ReadOutcome read_bit(std::uint16_t db, std::uint32_t byte, std::uint8_t bit);
    wire::ReturnCode write_bytes(std::uint16_t db, std::uint32_t start,
                                 std::span<const std::uint8_t> data);

    // --- attack stages ---

    /// Smallest n where reading byte n fails out-of-range while n-1 reads;
    /// nullopt when the DB does not exist. Binary search inside, but the
    /// result matches the one-byte-at-a-time scan by construction.
    std::optional<std::uint32_t> probe_db_size(std::uint16_t db,
                                               std::uint32_t max_size);
    std::optional<std::uint32_t> probe_db_size(std::uint16_t db) {
        return probe_db_size(db, opts_.max_probe_size);
    }

    DbFingerprint fingerprint_db(std::uint16_t db);

    SlotUsage read_slot_usage(std::uint16_t db);

    /// Hijacks a spare slot. Write order never lets a scan fire with ADDR
    /// set but the destination unset: (GET) RD then ADDR; (PUT) payload,
    /// then SD, then ADDR. `value` is required for PUT and must be exactly
    /// total_bytes(local) long.
    void configure_slot(std::uint16_t db, sim::FbKind kind, int slot,
                        const wire::AnyPointer& remote, const wire::AnyPointer& local,
                        std::span<const std::uint8_t> value = {},
                        bool overwrite = false);

    /// Polls REQ until one full 0->1->0 pulse is seen (fresh by
    /// construction: the rising edge happened after polling began), then
    /// reads STATUS. Requires poll_interval < the FB's trigger interval.
    ExecutionObservation await_execution(std::uint16_t db, Micros timeout);

    std::vector<std::uint8_t> collect_result(const wire::AnyPointer& local);

    /// Zeroes ADDR first (no transfer may run with a dangling destination),
    /// then RD/SD. Idempotent.
    void reset_slot(std::uint16_t db, sim::FbKind kind, int slot);

    std::vector<std::uint8_t> remote_read(const std::vector<Hop>& chain,
                                          const wire::AnyPointer& target,
                                          const ChainOptions& opts = {});
    void remote_write(const std::vector<Hop>& chain, const wire::AnyPointer& target,
                      std::span<const std::uint8_t> data,
                      const ChainOptions& opts = {});

  private:
    wire::ProtocolMessage make_read(std::vector<wire::AddressItem> items);
    wire::ProtocolMessage make_write(const wire::AddressItem& item,
                                     std::span<const std::uint8_t> data);
    void check_response(const wire::ProtocolMessage& req,
                        const wire::ProtocolMessage& resp) const;

    Fleet& fleet_;
    std::string channel_;
    std::string entry_plc_;
    SessionOptions opts_;
    std::uint16_t next_seq_ = 1;
    std::vector<LogRecord> log_;
};

}  // namespace plcpivot::attack
