// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Seeded generators for randomized codec properties.

#include <random>

#include "wire.hpp"

namespace testgen {

using plcpivot::wire::AddressItem;
using plcpivot::wire::AnyPointer;
using plcpivot::wire::ElemType;
using plcpivot::wire::MsgKind;
using plcpivot::wire::ProtocolMessage;
using plcpivot::wire::RequestItem;
using plcpivot::wire::ResultItem;
using plcpivot::wire::ReturnCode;

inline ElemType random_elem(std::mt19937& rng) {
    static const ElemType kinds[] = {ElemType::Bit,   ElemType::Byte,
                                     ElemType::Word,  ElemType::Int,
                                     ElemType::DWord, ElemType::DInt,
                                     ElemType::Real};
    return kinds[rng() % 7];
}

inline AnyPointer random_pointer(std::mt19937& rng) {
    AnyPointer p;
    p.elem = random_elem(rng);
    p.db_number = static_cast<std::uint16_t>(rng() % 65536);
    p.byte_offset = rng() % (plcpivot::wire::kMaxByteOffset + 1);
    p.bit_offset = p.elem == ElemType::Bit ? static_cast<std::uint8_t>(rng() % 8) : 0;
    p.count = static_cast<std::uint16_t>(1 + rng() % 65535);
    return p;
}

inline AddressItem random_address_item(std::mt19937& rng) {
    AddressItem a;
    a.db_number = static_cast<std::uint16_t>(rng() % 65536);
    a.start_byte = rng() % 0x1000000;
    a.bit_access = (rng() % 4) == 0;
    if (a.bit_access) {
        a.start_bit = static_cast<std::uint8_t>(rng() % 8);
        a.length_bytes = 1;
    } else {
        a.start_bit = 0;
        a.length_bytes = static_cast<std::uint16_t>(1 + rng() % 64);
    }
    return a;
}

inline std::vector<std::uint8_t> random_bytes(std::mt19937& rng, std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng());
    return out;
}

inline ProtocolMessage random_message(std::mt19937& rng) {
    ProtocolMessage m;
    static const MsgKind kinds[] = {MsgKind::ReadRequest, MsgKind::ReadResponse,
                                    MsgKind::WriteRequest, MsgKind::WriteResponse};
    m.kind = kinds[rng() % 4];
    m.sequence = static_cast<std::uint16_t>(rng() % 65536);
    const std::size_t items = rng() % 6;
    for (std::size_t i = 0; i < items; ++i) {
        if (plcpivot::wire::is_request(m.kind)) {
            RequestItem item;
            item.address = random_address_item(rng);
            if (m.kind == MsgKind::WriteRequest)
                item.data = random_bytes(rng, item.address.length_bytes);
            m.request_items.push_back(std::move(item));
        } else {
            ResultItem item;
            static const ReturnCode codes[] = {
                ReturnCode::Success, ReturnCode::AddressOutOfRange,
                ReturnCode::AccessDenied, ReturnCode::ObjectDoesNotExist};
            item.code = codes[rng() % 4];
            if (m.kind == MsgKind::ReadResponse && item.code == ReturnCode::Success)
                item.data = random_bytes(rng, rng() % 96);
            m.result_items.push_back(std::move(item));
        }
    }
    return m;
}

}  // namespace testgen
