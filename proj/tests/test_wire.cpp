// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/gen.hpp"
#include "wire.hpp"

using namespace plcpivot;
using namespace wire;

namespace {

std::vector<std::uint8_t> hex(const std::string& s) {
    auto v = from_hex(s);
    REQUIRE(v.has_value());
    return *v;
}

}  // namespace

TEST_CASE("frame encoding: hand-encoded reference frames") {
    // Read request, seq 1, one item: DB 99, byte 0, length 1.
    ProtocolMessage read;
    read.kind = MsgKind::ReadRequest;
    read.sequence = 1;
    AddressItem item;
    item.db_number = 99;
    item.start_byte = 0;
    item.length_bytes = 1;
    read.request_items.push_back({item, {}});
    CHECK(to_hex(encode_pdu(read)) == "000f4c5001010001010063000000000001");

    // Write response, seq 7, zero items: the shortest legal frame.
    ProtocolMessage wresp;
    wresp.kind = MsgKind::WriteResponse;
    wresp.sequence = 7;
    CHECK(to_hex(encode_pdu(wresp)) == "00074c500185000700");

    // Read response, seq 1, one SUCCESS item carrying 0x5A.
    ProtocolMessage rresp;
    rresp.kind = MsgKind::ReadResponse;
    rresp.sequence = 1;
    rresp.result_items.push_back({ReturnCode::Success, {0x5A}});
    CHECK(to_hex(encode_pdu(rresp)) == "000b4c500181000101ff00015a");
}

TEST_CASE("frame decoding: reference frames decode back") {
    auto d = decode_pdu(hex("000f4c5001010001010063000000000001"));
    REQUIRE(d.ok());
    CHECK(d.message.kind == MsgKind::ReadRequest);
    CHECK(d.message.sequence == 1);
    REQUIRE(d.message.request_items.size() == 1);
    CHECK(d.message.request_items[0].address.db_number == 99);
    CHECK(d.message.request_items[0].address.length_bytes == 1);
    CHECK(d.consumed == 17);

    auto r = decode_pdu(hex("000b4c500181000101ff00015a"));
    REQUIRE(r.ok());
    CHECK(r.message.result_items[0].code == ReturnCode::Success);
    CHECK(r.message.result_items[0].data == std::vector<std::uint8_t>{0x5A});
}

TEST_CASE("frame decoding: malformed vs incomplete are distinguishable") {
    // Bad magic.
    auto bad_magic = decode_pdu(hex("000700004c850007 00"));
    CHECK(bad_magic.status == FrameDecode::Status::Malformed);

    // Length prefix larger than the available bytes.
    auto short_body = decode_pdu(hex("00404c5001850007"));
    CHECK(short_body.status == FrameDecode::Status::Incomplete);

    // A one-byte buffer cannot even hold the prefix.
    std::uint8_t one = 0x00;
    CHECK(decode_pdu({&one, 1}).status == FrameDecode::Status::Incomplete);

    // Unknown kind code.
    auto bad_kind = decode_pdu(hex("00074c5001440007 00"));
    CHECK(bad_kind.status == FrameDecode::Status::Malformed);

    // Wrong version.
    auto bad_version = decode_pdu(hex("00074c5002850007 00"));
    CHECK(bad_version.status == FrameDecode::Status::Malformed);

    // Trailing junk inside the declared body.
    auto trailing = decode_pdu(hex("00084c50018500070000"));
    CHECK(trailing.status == FrameDecode::Status::Malformed);

    // Item count promising more than the body holds.
    auto truncated_item = decode_pdu(hex("00074c5001010001 01"));
    CHECK(truncated_item.status == FrameDecode::Status::Malformed);
}

TEST_CASE("frame encoding: error paths") {
    ProtocolMessage m;
    m.kind = MsgKind::ReadRequest;
    AddressItem item;
    item.length_bytes = 1;
    for (int i = 0; i < 256; ++i) m.request_items.push_back({item, {}});
    CHECK_THROWS_AS(encode_pdu(m), EncodeError);

    ProtocolMessage w;
    w.kind = MsgKind::WriteRequest;
    AddressItem wi;
    wi.length_bytes = 4;
    w.request_items.push_back({wi, {0x01}});  // payload length mismatch
    CHECK_THROWS_AS(encode_pdu(w), EncodeError);

    ProtocolMessage mixed;
    mixed.kind = MsgKind::ReadRequest;
    mixed.result_items.push_back({ReturnCode::Success, {}});
    CHECK_THROWS_AS(encode_pdu(mixed), EncodeError);
}

TEST_CASE("round-trip: randomized messages and pointers") {
    std::mt19937 rng(0xC0FFEE);
    for (int i = 0; i < 2000; ++i) {
        ProtocolMessage m = testgen::random_message(rng);
        auto frame = encode_pdu(m);
        auto d = decode_pdu(frame);
        REQUIRE(d.ok());
        CHECK(d.message == m);
        CHECK(d.consumed == frame.size());
    }
    for (int i = 0; i < 2000; ++i) {
        AnyPointer p = testgen::random_pointer(rng);
        auto bytes = encode_any_pointer(p);
        auto d = decode_any_pointer(bytes);
        REQUIRE(d.is_pointer());
        CHECK(d.pointer == p);
    }
}

TEST_CASE("frames are self-delimiting: concatenation decodes in order") {
    std::mt19937 rng(42);
    std::vector<ProtocolMessage> msgs;
    std::vector<std::uint8_t> buffer;
    for (int i = 0; i < 16; ++i) {
        msgs.push_back(testgen::random_message(rng));
        auto frame = encode_pdu(msgs.back());
        buffer.insert(buffer.end(), frame.begin(), frame.end());
    }
    // Leave a partial frame dangling at the end.
    auto last = encode_pdu(msgs.front());
    buffer.insert(buffer.end(), last.begin(), last.end() - 3);

    StreamDecode sd = decode_stream(buffer);
    CHECK_FALSE(sd.malformed);
    REQUIRE(sd.messages.size() == msgs.size());
    for (std::size_t i = 0; i < msgs.size(); ++i) CHECK(sd.messages[i] == msgs[i]);
    CHECK(sd.consumed == buffer.size() - (last.size() - 3));
}

TEST_CASE("any-pointer binary layout") {
    AnyPointer byte1{1, 0, 0, ElemType::Byte, 1};
    CHECK(to_hex(encode_any_pointer(byte1)) == "10020001000184000000");

    // DB 12, byte 4 -> bit address 32 = 0x20.
    AnyPointer word12{12, 4, 0, ElemType::Word, 1};
    CHECK(to_hex(encode_any_pointer(word12)) == "10040001000c84000020");

    auto back = decode_any_pointer(hex("10020001000184000000"));
    REQUIRE(back.is_pointer());
    CHECK(back.pointer == byte1);

    // All-zero is the distinguished UNUSED value in both directions.
    std::array<std::uint8_t, 10> zeros{};
    CHECK(decode_any_pointer(zeros).is_unused());

    // Bad syntax id, unknown type code, wrong area.
    CHECK(decode_any_pointer(hex("11020001000184000000")).is_invalid());
    CHECK(decode_any_pointer(hex("10030001000184000000")).is_invalid());
    CHECK(decode_any_pointer(hex("10020001000183000000")).is_invalid());
    // Zero count and bit offset on a non-bit element.
    CHECK(decode_any_pointer(hex("10020000000184000000")).is_invalid());
    CHECK(decode_any_pointer(hex("10020001000184000001")).is_invalid());

    CHECK_THROWS_AS(decode_any_pointer(hex("1002")), std::invalid_argument);
}

TEST_CASE("total size accounting") {
    CHECK(total_bytes({1, 0, 0, ElemType::Byte, 1}) == 1);
    CHECK(total_bytes({1, 0, 0, ElemType::Int, 1}) == 2);
    CHECK(total_bytes({1, 0, 0, ElemType::Word, 3}) == 6);
    CHECK(total_bytes({1, 0, 0, ElemType::Real, 2}) == 8);
    CHECK(total_bits({1, 0, 3, ElemType::Bit, 1}) == 1);
    CHECK(total_bytes({1, 0, 0, ElemType::Bit, 9}) == 2);
}

TEST_CASE("pointer literals") {
    auto p1 = parse_pointer_literal("P#DB1.DBX0.0 INT 1");
    REQUIRE(p1.pointer.has_value());
    CHECK(p1.pointer->db_number == 1);
    CHECK(p1.pointer->byte_offset == 0);
    CHECK(p1.pointer->bit_offset == 0);
    CHECK(p1.pointer->elem == ElemType::Int);
    CHECK(p1.pointer->count == 1);

    auto p2 = parse_pointer_literal("P#DB100.DBX1.0 INT 1");
    REQUIRE(p2.pointer.has_value());
    CHECK(p2.pointer->db_number == 100);
    CHECK(p2.pointer->byte_offset == 1);

    CHECK(format_pointer_literal(*p1.pointer) == "P#DB1.DBX0.0 INT 1");

    // Parse errors carry a position.
    auto bad = parse_pointer_literal("P#DB1");
    CHECK_FALSE(bad.pointer.has_value());
    CHECK(bad.position == 5);
    CHECK_FALSE(parse_pointer_literal("P#DB1.DBX0.0").pointer.has_value());
    CHECK_FALSE(parse_pointer_literal("P#DB1.DBX0.0 ZZZ 1").pointer.has_value());
    CHECK_FALSE(parse_pointer_literal("P#DB1.DBX0.8 BIT 1").pointer.has_value());
    CHECK_FALSE(parse_pointer_literal("P#DB1.DBX0.3 BYTE 1").pointer.has_value());
    CHECK_FALSE(parse_pointer_literal("P#DB1.DBX0.0 INT 0").pointer.has_value());
    CHECK_FALSE(parse_pointer_literal("P#DB1.DBX0.0 INT 1 junk").pointer.has_value());

    // Round trip over random pointers.
    std::mt19937 rng(7);
    for (int i = 0; i < 500; ++i) {
        AnyPointer p = testgen::random_pointer(rng);
        auto parsed = parse_pointer_literal(format_pointer_literal(p));
        REQUIRE(parsed.pointer.has_value());
        CHECK(*parsed.pointer == p);
    }
}

TEST_CASE("fuzz smoke: random bytes never crash the decoder") {
    std::mt19937 rng(0xFADE);
    for (int i = 0; i < 20000; ++i) {
        auto junk = testgen::random_bytes(rng, rng() % 64);
        auto d = decode_pdu(junk);
        CHECK((d.status == FrameDecode::Status::Ok ||
               d.status == FrameDecode::Status::Incomplete ||
               d.status == FrameDecode::Status::Malformed));
    }
    // Mutations of valid frames.
    for (int i = 0; i < 5000; ++i) {
        auto frame = encode_pdu(testgen::random_message(rng));
        for (int m = 0; m < 3; ++m)
            frame[rng() % frame.size()] = static_cast<std::uint8_t>(rng());
        (void)decode_pdu(frame);
        (void)decode_stream(frame);
    }
}
