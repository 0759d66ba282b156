// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * @file wire.hpp
 * @brief Bit-exact codec for the LP read/write wire protocol and for typed
 *        area pointers ("ANY pointers") in binary and P# literal form.
 *
 * FRAME LAYOUT
 * ------------
 * Every frame is a 2-byte big-endian length prefix followed by that many
 * body bytes:
 *
 *   [len u16] [magic 0x4C 0x50 "LP"] [version 0x01] [kind u8]
 *   [sequence u16] [item count u8] [items ...]
 *
 * Kinds: 0x01 read request, 0x81 read response, 0x05 write request,
 * 0x85 write response. All multi-byte integers are big-endian.
 *
 * Request items (8 bytes, plus payload for writes):
 *
 *   [db u16] [start_byte u24] [flags u8] [length u16] ([data...] writes only)
 *
 * flags: bit 7 set = bit-granularity access, bits 0..2 = bit offset within
 * the start byte, bits 3..6 reserved zero. Bit items always use length 1 and
 * carry / return a single 0x00/0x01 byte. Write items carry exactly
 * `length` payload bytes after the flags/length fields.
 *
 * Response items:
 *
 *   [return code u8] [data length u16] [data ...]
 *
 * Return codes: 0xFF success, 0x05 address out of range, 0x0A object does
 * not exist, 0x06 access denied. Only successful read items carry data.
 *
 * ANY POINTERS
 * ------------
 * The 10-byte binary form:
 *
 *   [0]    0x10 syntax id
 *   [1]    element type code (BIT 0x01, BYTE 0x02, WORD 0x04, INT 0x05,
 *          DWORD 0x06, DINT 0x07, REAL 0x08)
 *   [2..3] repetition count u16
 *   [4..5] DB number u16
 *   [6]    0x84 (DB area)
 *   [7..9] 24-bit bit address = byte_offset * 8 + bit_offset
 *
 * Ten zero bytes are the distinguished UNUSED value (an empty FB slot).
 * The textual form is `P#DB<n>.DBX<byte>.<bit> <TYPE> <count>`.
 *
 * Decoding never throws on malformed input; every classification is a
 * returned status so arbitrary attacker bytes can be fed in safely.
 */

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace plcpivot::wire {

// ---------------------------------------------------------------- pointers

enum class ElemType : std::uint8_t {
    Bit = 0x01,
    Byte = 0x02,
    Word = 0x04,
    Int = 0x05,
    DWord = 0x06,
    DInt = 0x07,
    Real = 0x08,
};

/// Size of one element in bits (Bit -> 1, Byte -> 8, Word/Int -> 16, ...).
unsigned elem_bits(ElemType t);
const char* elem_name(ElemType t);
std::optional<ElemType> elem_from_code(std::uint8_t code);
std::optional<ElemType> elem_from_name(std::string_view name);

inline constexpr std::size_t kPointerSize = 10;
inline constexpr std::uint8_t kPointerSyntaxId = 0x10;
inline constexpr std::uint8_t kPointerAreaDb = 0x84;
inline constexpr std::uint32_t kMaxByteOffset = 2097151;  // 2^21 - 1

struct AnyPointer {
    std::uint16_t db_number = 0;
    std::uint32_t byte_offset = 0;
    std::uint8_t bit_offset = 0;  // 0 unless elem == Bit
    ElemType elem = ElemType::Byte;
    std::uint16_t count = 1;

    bool operator==(const AnyPointer&) const = default;
};

bool pointer_valid(const AnyPointer& p);

/// count * element size, in bits.
std::size_t total_bits(const AnyPointer& p);
/// Bytes needed to hold the pointed-at region (bit pointers round up).
std::size_t total_bytes(const AnyPointer& p);

/// Throws std::invalid_argument if !pointer_valid(p).
std::array<std::uint8_t, kPointerSize> encode_any_pointer(const AnyPointer& p);

struct PointerDecode {
    enum class Kind { Pointer, Unused, Invalid };
    Kind kind = Kind::Invalid;
    AnyPointer pointer{};
    std::string reason;  // set for Invalid

    bool is_pointer() const { return kind == Kind::Pointer; }
    bool is_unused() const { return kind == Kind::Unused; }
    bool is_invalid() const { return kind == Kind::Invalid; }
};

/// Input must be exactly 10 bytes (throws std::invalid_argument otherwise;
/// wrong length is a caller bug, not attacker data).
PointerDecode decode_any_pointer(std::span<const std::uint8_t> bytes);

/// Canonical literal, e.g. "P#DB1.DBX0.0 INT 1".
std::string format_pointer_literal(const AnyPointer& p);

struct PointerParse {
    std::optional<AnyPointer> pointer;
    std::string error;      // empty on success
    std::size_t position = 0;  // offset of the error in the input
};

PointerParse parse_pointer_literal(std::string_view text);

// ------------------------------------------------------------------ frames

enum class MsgKind : std::uint8_t {
    ReadRequest = 0x01,
    ReadResponse = 0x81,
    WriteRequest = 0x05,
    WriteResponse = 0x85,
};

bool is_request(MsgKind k);
bool is_response(MsgKind k);
/// ReadRequest -> ReadResponse, WriteRequest -> WriteResponse.
MsgKind response_kind_for(MsgKind request_kind);
const char* kind_name(MsgKind k);

enum class ReturnCode : std::uint8_t {
    Success = 0xFF,
    AddressOutOfRange = 0x05,
    AccessDenied = 0x06,
    ObjectDoesNotExist = 0x0A,
};

std::optional<ReturnCode> return_code_from(std::uint8_t v);
const char* return_code_name(ReturnCode c);

struct AddressItem {
    std::uint16_t db_number = 0;
    std::uint32_t start_byte = 0;  // fits in 24 bits
    std::uint8_t start_bit = 0;    // nonzero only when bit_access
    bool bit_access = false;
    std::uint16_t length_bytes = 1;

    bool operator==(const AddressItem&) const = default;
};

struct RequestItem {
    AddressItem address{};
    std::vector<std::uint8_t> data;  // write payload; empty for reads

    bool operator==(const RequestItem&) const = default;
};

struct ResultItem {
    ReturnCode code = ReturnCode::Success;
    std::vector<std::uint8_t> data;  // only successful read items carry data

    bool operator==(const ResultItem&) const = default;
};

struct ProtocolMessage {
    MsgKind kind = MsgKind::ReadRequest;
    std::uint16_t sequence = 0;
    std::vector<RequestItem> request_items;  // request kinds
    std::vector<ResultItem> result_items;    // response kinds

    bool operator==(const ProtocolMessage&) const = default;
    std::size_t item_count() const {
        return is_request(kind) ? request_items.size() : result_items.size();
    }
};

class EncodeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kFrameHeaderSize = 7;  // body bytes before items
inline constexpr std::size_t kMaxItemCount = 255;
inline constexpr std::size_t kMaxBodySize = 65535;

/// Full frame including the 2-byte length prefix. Throws EncodeError on an
/// ill-formed message (too many items, payload mismatch, oversize frame).
std::vector<std::uint8_t> encode_pdu(const ProtocolMessage& msg);

struct FrameDecode {
    enum class Status {
        Ok,          // message decoded, `consumed` bytes eaten
        Incomplete,  // need more bytes from the stream
        Malformed,   // structurally wrong; `reason` says why
    };
    Status status = Status::Malformed;
    ProtocolMessage message{};
    std::size_t consumed = 0;
    std::string reason;

    bool ok() const { return status == Status::Ok; }
};

FrameDecode decode_pdu(std::span<const std::uint8_t> bytes);

/// Decodes as many complete frames as the buffer holds. Stops at the first
/// malformed frame (reported in `reason`); trailing partial frames are left
/// unconsumed for the next read.
struct StreamDecode {
    std::vector<ProtocolMessage> messages;
    std::size_t consumed = 0;
    bool malformed = false;
    std::string reason;
};

StreamDecode decode_stream(std::span<const std::uint8_t> bytes);

// ----------------------------------------------------------------- helpers

/// Request item covering the region a pointer names. Bit pointers with
/// count 1 become bit items; multi-bit pointers need bit_offset 0 and become
/// byte items over ceil(count/8) bytes. Returns nullopt when no item can
/// express the pointer.
std::optional<AddressItem> to_address_item(const AnyPointer& p);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex);

}  // namespace plcpivot::wire
