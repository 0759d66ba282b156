// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * @file plc.hpp
 * @brief Simulated PLC: numbered data blocks, PUT/GET FB instance layouts,
 *        and the request server for the LP wire protocol.
 *
 * A PUT/GET FB instance data block overlays this layout:
 *
 *   byte 0     REQ (bit 0; 1 while a transfer is executing)
 *   byte 1     unused, always 0
 *   bytes 2-3  connection id (word)
 *   byte 4     FLAGS (bit 0 NDR/DONE, bit 1 ERROR)
 *   byte 5     unused, always 0
 *   bytes 6-7  STATUS word (0 = ok)
 *   bytes 8-47 ADDR_1..ADDR_4, one 10-byte ANY pointer each
 *   bytes 48-87 RD_1..RD_4 (GET) or SD_1..SD_4 (PUT), 10 bytes each
 *   byte 88+   WORK scratch, zero-initialized
 *
 * GET instance DBs are 600 bytes, PUT instance DBs 616 (both overridable
 * through the topology's db_profile). Scan-cycle scheduling and transfer
 * delivery live in fabric.hpp; this module owns per-PLC state and the
 * pure request-serving path.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wire.hpp"

namespace plcpivot::sim {

using Micros = std::uint64_t;

// Instance DB field offsets.
inline constexpr std::uint32_t kOffReq = 0;
inline constexpr std::uint32_t kOffUnused1 = 1;
inline constexpr std::uint32_t kOffConnId = 2;
inline constexpr std::uint32_t kOffFlags = 4;
inline constexpr std::uint32_t kOffUnused5 = 5;
inline constexpr std::uint32_t kOffStatus = 6;
inline constexpr std::uint32_t kOffAddr = 8;
inline constexpr std::uint32_t kOffLocalPtr = 48;  // RD_x / SD_x
inline constexpr std::uint32_t kOffWork = 88;
inline constexpr int kSlotCount = 4;

inline constexpr std::uint32_t kGetDbSize = 600;
inline constexpr std::uint32_t kPutDbSize = 616;

inline constexpr std::uint8_t kFlagNdr = 0x01;
inline constexpr std::uint8_t kFlagError = 0x02;

// STATUS word values written on transfer completion.
inline constexpr std::uint16_t kStatusOk = 0x0000;
inline constexpr std::uint16_t kStatusIllFormedSlot = 0x0001;
inline constexpr std::uint16_t kStatusPeerError = 0x0002;
inline constexpr std::uint16_t kStatusUnreachable = 0x0003;
inline constexpr std::uint16_t kStatusConnUnknown = 0x0004;
inline constexpr std::uint16_t kStatusLengthMismatch = 0x0005;

inline std::uint32_t addr_offset(int slot) {  // slot is 1-based
    return kOffAddr + static_cast<std::uint32_t>(slot - 1) * wire::kPointerSize;
}
inline std::uint32_t local_ptr_offset(int slot) {
    return kOffLocalPtr + static_cast<std::uint32_t>(slot - 1) * wire::kPointerSize;
}

enum class FbKind { Get, Put };
const char* fb_kind_name(FbKind k);

struct DataBlock {
    std::uint16_t number = 0;
    std::vector<std::uint8_t> bytes;
};

struct FbSlotInit {
    int slot = 1;  // 1..4
    wire::AnyPointer remote;  // ADDR_x
    wire::AnyPointer local;   // RD_x / SD_x
};

struct FbInstanceConfig {
    FbKind kind = FbKind::Get;
    std::uint16_t instance_db = 0;
    std::uint16_t conn_id = 0;
    Micros trigger_interval = 1'000'000;
    std::vector<FbSlotInit> slots;
};

struct Plc {
    std::string id;
    Micros scan_interval = 50'000;
    std::map<std::uint16_t, DataBlock> data_blocks;
    std::vector<FbInstanceConfig> fb_instances;
    std::map<std::uint16_t, std::string> connections;  // conn_id -> channel id

    DataBlock* find_db(std::uint16_t number);
    const DataBlock* find_db(std::uint16_t number) const;
};

// Area access outcome: either data or a protocol return code.
struct AreaResult {
    wire::ReturnCode code = wire::ReturnCode::Success;
    std::vector<std::uint8_t> data;

    bool ok() const { return code == wire::ReturnCode::Success; }
};

/// Read per one request item. Bit items yield a single 0x00/0x01 byte.
AreaResult read_area(const Plc& plc, const wire::AddressItem& item);

/// Write per one request item; data length must equal item length.
wire::ReturnCode write_area(Plc& plc, const wire::AddressItem& item,
                            std::span<const std::uint8_t> data);

/// Serves a decoded request, producing the paired response (sequence
/// echoed, one result item per request item). A message that is not a
/// request kind yields the zero-item protocol-error response.
wire::ProtocolMessage serve_request(Plc& plc, const wire::ProtocolMessage& msg);

// Raw helpers used by the FB machinery and the test harness oracle.
std::optional<std::vector<std::uint8_t>> peek(const Plc& plc, std::uint16_t db,
                                              std::uint32_t start, std::uint32_t len);
bool poke(Plc& plc, std::uint16_t db, std::uint32_t start,
          std::span<const std::uint8_t> data);

/// Zeroes an instance DB, then writes CONN_ID and the initial slot pointers.
void init_instance_db(Plc& plc, const FbInstanceConfig& fb);

}  // namespace plcpivot::sim
