// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include "jsonio.hpp"

namespace plcpivot::jsonio {

json describe_message(const wire::ProtocolMessage& msg) {
    json j;
    j["kind"] = wire::kind_name(msg.kind);
    j["seq"] = msg.sequence;
    json items = json::array();
    if (wire::is_request(msg.kind)) {
        for (const auto& item : msg.request_items) {
            json ji;
            ji["db"] = item.address.db_number;
            ji["start"] = item.address.start_byte;
            if (item.address.bit_access) ji["bit"] = item.address.start_bit;
            ji["len"] = item.address.length_bytes;
            if (!item.data.empty()) ji["data"] = wire::to_hex(item.data);
            items.push_back(std::move(ji));
        }
    } else {
        for (const auto& item : msg.result_items) {
            json ji;
            ji["code"] = wire::return_code_name(item.code);
            ji["len"] = item.data.size();
            if (!item.data.empty()) ji["data"] = wire::to_hex(item.data);
            items.push_back(std::move(ji));
        }
    }
    j["items"] = std::move(items);
    return j;
}

json describe_pointer(const wire::AnyPointer& p) {
    json j;
    j["literal"] = wire::format_pointer_literal(p);
    j["db"] = p.db_number;
    j["byte"] = p.byte_offset;
    j["bit"] = p.bit_offset;
    j["type"] = wire::elem_name(p.elem);
    j["count"] = p.count;
    j["total_bytes"] = wire::total_bytes(p);
    return j;
}

json describe_pointer_decode(const wire::PointerDecode& d) {
    json j;
    switch (d.kind) {
        case wire::PointerDecode::Kind::Unused:
            j["state"] = "unused";
            break;
        case wire::PointerDecode::Kind::Invalid:
            j["state"] = "invalid";
            j["reason"] = d.reason;
            break;
        case wire::PointerDecode::Kind::Pointer:
            j["state"] = "pointer";
            j["pointer"] = describe_pointer(d.pointer);
            break;
    }
    return j;
}

json describe_frame_bytes(std::span<const std::uint8_t> bytes) {
    json out;
    json frames = json::array();
    std::size_t at = 0;
    while (at < bytes.size()) {
        wire::FrameDecode d = wire::decode_pdu(bytes.subspan(at));
        if (d.status == wire::FrameDecode::Status::Ok) {
            json jf;
            jf["offset"] = at;
            jf["bytes"] = d.consumed;
            jf["message"] = describe_message(d.message);
            frames.push_back(std::move(jf));
            at += d.consumed;
            continue;
        }
        json jf;
        jf["offset"] = at;
        jf["error"] = d.status == wire::FrameDecode::Status::Incomplete
                          ? "incomplete"
                          : "malformed";
        if (!d.reason.empty()) jf["reason"] = d.reason;
        frames.push_back(std::move(jf));
        break;
    }
    out["frames"] = std::move(frames);
    out["consumed"] = at;
    out["total"] = bytes.size();
    return out;
}

}  // namespace plcpivot::jsonio
