// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include "wire.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace plcpivot::wire {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_u24(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t get_u24(std::span<const std::uint8_t> b, std::size_t at) {
    return (static_cast<std::uint32_t>(b[at]) << 16) |
           (static_cast<std::uint32_t>(b[at + 1]) << 8) | b[at + 2];
}

constexpr std::uint8_t kItemFlagBitAccess = 0x80;
constexpr std::uint8_t kItemBitMask = 0x07;
constexpr std::size_t kRequestItemSize = 8;
constexpr std::size_t kResultItemHeader = 3;

}  // namespace

// ---------------------------------------------------------------- pointers

unsigned elem_bits(ElemType t) {
    switch (t) {
        case ElemType::Bit: return 1;
        case ElemType::Byte: return 8;
        case ElemType::Word:
        case ElemType::Int: return 16;
        case ElemType::DWord:
        case ElemType::DInt:
        case ElemType::Real: return 32;
    }
    return 0;
}

const char* elem_name(ElemType t) {
    switch (t) {
        case ElemType::Bit: return "BIT";
        case ElemType::Byte: return "BYTE";
        case ElemType::Word: return "WORD";
        case ElemType::Int: return "INT";
        case ElemType::DWord: return "DWORD";
        case ElemType::DInt: return "DINT";
        case ElemType::Real: return "REAL";
    }
    return "?";
}

std::optional<ElemType> elem_from_code(std::uint8_t code) {
    switch (code) {
        case 0x01: return ElemType::Bit;
        case 0x02: return ElemType::Byte;
        case 0x04: return ElemType::Word;
        case 0x05: return ElemType::Int;
        case 0x06: return ElemType::DWord;
        case 0x07: return ElemType::DInt;
        case 0x08: return ElemType::Real;
        default: return std::nullopt;
    }
}

std::optional<ElemType> elem_from_name(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    for (ElemType t : {ElemType::Bit, ElemType::Byte, ElemType::Word,
                       ElemType::Int, ElemType::DWord, ElemType::DInt,
                       ElemType::Real}) {
        if (upper == elem_name(t)) return t;
    }
    return std::nullopt;
}

bool pointer_valid(const AnyPointer& p) {
    if (p.byte_offset > kMaxByteOffset) return false;
    if (p.bit_offset > 7) return false;
    if (p.elem != ElemType::Bit && p.bit_offset != 0) return false;
    if (p.count < 1) return false;
    return true;
}

std::size_t total_bits(const AnyPointer& p) {
    return static_cast<std::size_t>(p.count) * elem_bits(p.elem);
}

std::size_t total_bytes(const AnyPointer& p) {
    return (total_bits(p) + 7) / 8;
}

std::array<std::uint8_t, kPointerSize> encode_any_pointer(const AnyPointer& p) {
    if (!pointer_valid(p))
        throw std::invalid_argument("encode_any_pointer: invalid pointer");
    std::array<std::uint8_t, kPointerSize> out{};
    out[0] = kPointerSyntaxId;
    out[1] = static_cast<std::uint8_t>(p.elem);
    out[2] = static_cast<std::uint8_t>(p.count >> 8);
    out[3] = static_cast<std::uint8_t>(p.count & 0xFF);
    out[4] = static_cast<std::uint8_t>(p.db_number >> 8);
    out[5] = static_cast<std::uint8_t>(p.db_number & 0xFF);
    out[6] = kPointerAreaDb;
    const std::uint32_t bit_addr = p.byte_offset * 8 + p.bit_offset;
    out[7] = static_cast<std::uint8_t>((bit_addr >> 16) & 0xFF);
    out[8] = static_cast<std::uint8_t>((bit_addr >> 8) & 0xFF);
    out[9] = static_cast<std::uint8_t>(bit_addr & 0xFF);
    return out;
}

PointerDecode decode_any_pointer(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kPointerSize)
        throw std::invalid_argument("decode_any_pointer: need exactly 10 bytes");

    const bool all_zero =
        std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
    if (all_zero) return {PointerDecode::Kind::Unused, {}, {}};

    auto invalid = [](std::string reason) {
        PointerDecode d;
        d.kind = PointerDecode::Kind::Invalid;
        d.reason = std::move(reason);
        return d;
    };

    if (bytes[0] != kPointerSyntaxId) return invalid("bad syntax id");
    auto elem = elem_from_code(bytes[1]);
    if (!elem) return invalid("unknown element type code");
    if (bytes[6] != kPointerAreaDb) return invalid("unsupported area code");

    AnyPointer p;
    p.elem = *elem;
    p.count = get_u16(bytes, 2);
    p.db_number = get_u16(bytes, 4);
    const std::uint32_t bit_addr = get_u24(bytes, 7);
    p.byte_offset = bit_addr >> 3;
    p.bit_offset = static_cast<std::uint8_t>(bit_addr & 0x7);

    if (p.count == 0) return invalid("zero repetition count");
    if (p.elem != ElemType::Bit && p.bit_offset != 0)
        return invalid("bit offset on non-bit element");

    return {PointerDecode::Kind::Pointer, p, {}};
}

std::string format_pointer_literal(const AnyPointer& p) {
    std::string out = "P#DB" + std::to_string(p.db_number) + ".DBX" +
                      std::to_string(p.byte_offset) + "." +
                      std::to_string(p.bit_offset) + " " + elem_name(p.elem) +
                      " " + std::to_string(p.count);
    return out;
}

namespace {

// Small cursor over the literal text; every failure carries the offset.
struct Scanner {
    std::string_view text;
    std::size_t pos = 0;

    bool eat(std::string_view token) {
        if (text.substr(pos, token.size()) != token) return false;
        pos += token.size();
        return true;
    }

    std::optional<std::uint64_t> number() {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos == start) return std::nullopt;
        std::uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + pos, value);
        if (ec != std::errc{} || ptr != text.data() + pos) return std::nullopt;
        return value;
    }

    bool spaces() {
        std::size_t start = pos;
        while (pos < text.size() &&
               (text[pos] == ' ' || text[pos] == '\t'))
            ++pos;
        return pos > start;
    }

    std::string_view word() {
        std::size_t start = pos;
        while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos])))
            ++pos;
        return text.substr(start, pos - start);
    }
};

}  // namespace

PointerParse parse_pointer_literal(std::string_view text) {
    Scanner s{text};
    auto fail = [&](std::string msg) {
        PointerParse r;
        r.error = std::move(msg);
        r.position = s.pos;
        return r;
    };

    if (!s.eat("P#DB")) return fail("expected 'P#DB'");
    auto db = s.number();
    if (!db) return fail("expected DB number");
    if (*db > 0xFFFF) return fail("DB number out of range");
    if (!s.eat(".DBX")) return fail("expected '.DBX'");
    auto byte = s.number();
    if (!byte) return fail("expected byte offset");
    if (*byte > kMaxByteOffset) return fail("byte offset out of range");
    if (!s.eat(".")) return fail("expected '.'");
    auto bit = s.number();
    if (!bit) return fail("expected bit offset");
    if (*bit > 7) return fail("bit offset out of range");
    if (!s.spaces()) return fail("expected space before type");
    auto type_word = s.word();
    if (type_word.empty()) return fail("expected element type");
    auto elem = elem_from_name(type_word);
    if (!elem) {
        s.pos -= type_word.size();
        return fail("unknown element type");
    }
    if (!s.spaces()) return fail("expected space before count");
    auto count = s.number();
    if (!count) return fail("expected repetition count");
    if (*count < 1 || *count > 0xFFFF) return fail("count out of range");
    s.spaces();
    if (s.pos != text.size()) return fail("trailing characters");

    AnyPointer p;
    p.db_number = static_cast<std::uint16_t>(*db);
    p.byte_offset = static_cast<std::uint32_t>(*byte);
    p.bit_offset = static_cast<std::uint8_t>(*bit);
    p.elem = *elem;
    p.count = static_cast<std::uint16_t>(*count);
    if (!pointer_valid(p)) return fail("bit offset only valid for BIT type");

    PointerParse r;
    r.pointer = p;
    return r;
}

// ------------------------------------------------------------------ frames

bool is_request(MsgKind k) {
    return k == MsgKind::ReadRequest || k == MsgKind::WriteRequest;
}

bool is_response(MsgKind k) {
    return k == MsgKind::ReadResponse || k == MsgKind::WriteResponse;
}

MsgKind response_kind_for(MsgKind request_kind) {
    switch (request_kind) {
        case MsgKind::ReadRequest: return MsgKind::ReadResponse;
        case MsgKind::WriteRequest: return MsgKind::WriteResponse;
        default: return request_kind;
    }
}

const char* kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::ReadRequest: return "read_request";
        case MsgKind::ReadResponse: return "read_response";
        case MsgKind::WriteRequest: return "write_request";
        case MsgKind::WriteResponse: return "write_response";
    }
    return "?";
}

std::optional<ReturnCode> return_code_from(std::uint8_t v) {
    switch (v) {
        case 0xFF: return ReturnCode::Success;
        case 0x05: return ReturnCode::AddressOutOfRange;
        case 0x06: return ReturnCode::AccessDenied;
        case 0x0A: return ReturnCode::ObjectDoesNotExist;
        default: return std::nullopt;
    }
}

const char* return_code_name(ReturnCode c) {
    switch (c) {
        case ReturnCode::Success: return "success";
        case ReturnCode::AddressOutOfRange: return "address_out_of_range";
        case ReturnCode::AccessDenied: return "access_denied";
        case ReturnCode::ObjectDoesNotExist: return "object_does_not_exist";
    }
    return "?";
}

namespace {

void validate_address_item(const AddressItem& a) {
    if (a.start_byte > 0xFFFFFF)
        throw EncodeError("address item start_byte exceeds 24 bits");
    if (a.start_bit > 7) throw EncodeError("address item start_bit > 7");
    if (!a.bit_access && a.start_bit != 0)
        throw EncodeError("start_bit nonzero on byte-granularity item");
    if (a.length_bytes < 1) throw EncodeError("address item length < 1");
    if (a.bit_access && a.length_bytes != 1)
        throw EncodeError("bit item length must be 1");
}

void encode_address_item(std::vector<std::uint8_t>& out, const AddressItem& a) {
    put_u16(out, a.db_number);
    put_u24(out, a.start_byte);
    std::uint8_t flags = a.bit_access ? kItemFlagBitAccess : 0;
    flags |= (a.start_bit & kItemBitMask);
    out.push_back(flags);
    put_u16(out, a.length_bytes);
}

}  // namespace

std::vector<std::uint8_t> encode_pdu(const ProtocolMessage& msg) {
    const bool request = is_request(msg.kind);
    if (request && !msg.result_items.empty())
        throw EncodeError("request carries result items");
    if (!request && !msg.request_items.empty())
        throw EncodeError("response carries request items");
    if (msg.item_count() > kMaxItemCount)
        throw EncodeError("item count exceeds 255");

    std::vector<std::uint8_t> body;
    body.reserve(kFrameHeaderSize + 16 * msg.item_count());
    body.push_back(0x4C);
    body.push_back(0x50);
    body.push_back(0x01);
    body.push_back(static_cast<std::uint8_t>(msg.kind));
    put_u16(body, msg.sequence);
    body.push_back(static_cast<std::uint8_t>(msg.item_count()));

    if (request) {
        for (const auto& item : msg.request_items) {
            validate_address_item(item.address);
            if (msg.kind == MsgKind::ReadRequest && !item.data.empty())
                throw EncodeError("read request item carries data");
            if (msg.kind == MsgKind::WriteRequest &&
                item.data.size() != item.address.length_bytes)
                throw EncodeError("write item payload length mismatch");
            encode_address_item(body, item.address);
            body.insert(body.end(), item.data.begin(), item.data.end());
        }
    } else {
        for (const auto& item : msg.result_items) {
            const bool carries_data = msg.kind == MsgKind::ReadResponse &&
                                      item.code == ReturnCode::Success;
            if (!carries_data && !item.data.empty())
                throw EncodeError("result item must not carry data");
            if (item.data.size() > 0xFFFF)
                throw EncodeError("result item data exceeds 65535 bytes");
            body.push_back(static_cast<std::uint8_t>(item.code));
            put_u16(body, static_cast<std::uint16_t>(item.data.size()));
            body.insert(body.end(), item.data.begin(), item.data.end());
        }
    }

    if (body.size() > kMaxBodySize) throw EncodeError("frame body exceeds 65535 bytes");

    std::vector<std::uint8_t> frame;
    frame.reserve(body.size() + 2);
    put_u16(frame, static_cast<std::uint16_t>(body.size()));
    frame.insert(frame.end(), body.begin(), body.end());
    return frame;
}

FrameDecode decode_pdu(std::span<const std::uint8_t> bytes) {
    auto incomplete = [] {
        FrameDecode d;
        d.status = FrameDecode::Status::Incomplete;
        return d;
    };
    auto malformed = [](std::string reason) {
        FrameDecode d;
        d.status = FrameDecode::Status::Malformed;
        d.reason = std::move(reason);
        return d;
    };

    if (bytes.size() < 2) return incomplete();
    const std::size_t body_len = get_u16(bytes, 0);
    if (bytes.size() < 2 + body_len) return incomplete();

    std::span<const std::uint8_t> body = bytes.subspan(2, body_len);
    if (body.size() < kFrameHeaderSize) return malformed("body shorter than header");
    if (body[0] != 0x4C || body[1] != 0x50) return malformed("bad magic");
    if (body[2] != 0x01) return malformed("unsupported version");

    const std::uint8_t kind_byte = body[3];
    MsgKind kind;
    switch (kind_byte) {
        case 0x01: kind = MsgKind::ReadRequest; break;
        case 0x81: kind = MsgKind::ReadResponse; break;
        case 0x05: kind = MsgKind::WriteRequest; break;
        case 0x85: kind = MsgKind::WriteResponse; break;
        default: return malformed("unknown kind");
    }

    ProtocolMessage msg;
    msg.kind = kind;
    msg.sequence = get_u16(body, 4);
    const std::size_t count = body[6];

    std::size_t at = kFrameHeaderSize;
    if (is_request(kind)) {
        msg.request_items.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            if (body.size() - at < kRequestItemSize)
                return malformed("truncated request item");
            AddressItem a;
            a.db_number = get_u16(body, at);
            a.start_byte = get_u24(body, at + 2);
            const std::uint8_t flags = body[at + 5];
            if ((flags & ~(kItemFlagBitAccess | kItemBitMask)) != 0)
                return malformed("reserved item flag bits set");
            a.bit_access = (flags & kItemFlagBitAccess) != 0;
            a.start_bit = flags & kItemBitMask;
            if (!a.bit_access && a.start_bit != 0)
                return malformed("bit offset on byte-granularity item");
            a.length_bytes = get_u16(body, at + 6);
            if (a.length_bytes < 1) return malformed("zero-length item");
            if (a.bit_access && a.length_bytes != 1)
                return malformed("bit item length must be 1");
            at += kRequestItemSize;

            RequestItem item;
            item.address = a;
            if (kind == MsgKind::WriteRequest) {
                if (body.size() - at < a.length_bytes)
                    return malformed("truncated write payload");
                item.data.assign(body.begin() + at, body.begin() + at + a.length_bytes);
                at += a.length_bytes;
            }
            msg.request_items.push_back(std::move(item));
        }
    } else {
        msg.result_items.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            if (body.size() - at < kResultItemHeader)
                return malformed("truncated result item");
            auto code = return_code_from(body[at]);
            if (!code) return malformed("unknown return code");
            const std::size_t dlen = get_u16(body, at + 1);
            at += kResultItemHeader;
            const bool may_carry = kind == MsgKind::ReadResponse &&
                                   *code == ReturnCode::Success;
            if (!may_carry && dlen != 0)
                return malformed("unexpected data on result item");
            if (body.size() - at < dlen) return malformed("truncated result data");
            ResultItem item;
            item.code = *code;
            item.data.assign(body.begin() + at, body.begin() + at + dlen);
            at += dlen;
            msg.result_items.push_back(std::move(item));
        }
    }

    if (at != body.size()) return malformed("trailing bytes in frame body");

    FrameDecode d;
    d.status = FrameDecode::Status::Ok;
    d.message = std::move(msg);
    d.consumed = 2 + body_len;
    return d;
}

StreamDecode decode_stream(std::span<const std::uint8_t> bytes) {
    StreamDecode out;
    std::size_t at = 0;
    while (at < bytes.size()) {
        FrameDecode d = decode_pdu(bytes.subspan(at));
        if (d.status == FrameDecode::Status::Incomplete) break;
        if (d.status == FrameDecode::Status::Malformed) {
            out.malformed = true;
            out.reason = d.reason;
            break;
        }
        out.messages.push_back(std::move(d.message));
        at += d.consumed;
    }
    out.consumed = at;
    return out;
}

// ----------------------------------------------------------------- helpers

std::optional<AddressItem> to_address_item(const AnyPointer& p) {
    if (!pointer_valid(p)) return std::nullopt;
    AddressItem a;
    a.db_number = p.db_number;
    if (p.elem == ElemType::Bit && p.count == 1) {
        a.start_byte = p.byte_offset;
        a.start_bit = p.bit_offset;
        a.bit_access = true;
        a.length_bytes = 1;
        return a;
    }
    if (p.elem == ElemType::Bit && p.bit_offset != 0) return std::nullopt;
    const std::size_t len = total_bytes(p);
    if (len > 0xFFFF) return std::nullopt;
    a.start_byte = p.byte_offset;
    a.length_bytes = static_cast<std::uint16_t>(len);
    return a;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::vector<std::uint8_t> out;
    int hi = -1;
    for (char c : hex) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        int n = nibble(c);
        if (n < 0) return std::nullopt;
        if (hi < 0) {
            hi = n;
        } else {
            out.push_back(static_cast<std::uint8_t>((hi << 4) | n));
            hi = -1;
        }
    }
    if (hi >= 0) return std::nullopt;
    return out;
}

}  // namespace plcpivot::wire
