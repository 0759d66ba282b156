// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include "plc.hpp"

#include <algorithm>
#include <cstring>

namespace plcpivot::sim {

const char* fb_kind_name(FbKind k) {
    return k == FbKind::Get ? "GET" : "PUT";
}

DataBlock* Plc::find_db(std::uint16_t number) {
    auto it = data_blocks.find(number);
    return it == data_blocks.end() ? nullptr : &it->second;
}

const DataBlock* Plc::find_db(std::uint16_t number) const {
    auto it = data_blocks.find(number);
    return it == data_blocks.end() ? nullptr : &it->second;
}

AreaResult read_area(const Plc& plc, const wire::AddressItem& item) {
    const DataBlock* db = plc.find_db(item.db_number);
    if (!db) return {wire::ReturnCode::ObjectDoesNotExist, {}};

    if (item.bit_access) {
        if (item.start_byte >= db->bytes.size())
            return {wire::ReturnCode::AddressOutOfRange, {}};
        const std::uint8_t byte = db->bytes[item.start_byte];
        const std::uint8_t bit = (byte >> item.start_bit) & 1;
        return {wire::ReturnCode::Success, {bit}};
    }

    const std::uint64_t end =
        static_cast<std::uint64_t>(item.start_byte) + item.length_bytes;
    if (end > db->bytes.size()) return {wire::ReturnCode::AddressOutOfRange, {}};

    AreaResult r;
    r.data.assign(db->bytes.begin() + item.start_byte, db->bytes.begin() + end);
    return r;
}

wire::ReturnCode write_area(Plc& plc, const wire::AddressItem& item,
                            std::span<const std::uint8_t> data) {
    DataBlock* db = plc.find_db(item.db_number);
    if (!db) return wire::ReturnCode::ObjectDoesNotExist;

    if (item.bit_access) {
        if (item.start_byte >= db->bytes.size())
            return wire::ReturnCode::AddressOutOfRange;
        std::uint8_t& byte = db->bytes[item.start_byte];
        const std::uint8_t mask = static_cast<std::uint8_t>(1u << item.start_bit);
        if (!data.empty() && data[0] != 0)
            byte |= mask;
        else
            byte &= static_cast<std::uint8_t>(~mask);
        return wire::ReturnCode::Success;
    }

    const std::uint64_t end =
        static_cast<std::uint64_t>(item.start_byte) + item.length_bytes;
    if (end > db->bytes.size()) return wire::ReturnCode::AddressOutOfRange;

    std::copy(data.begin(), data.end(), db->bytes.begin() + item.start_byte);
    return wire::ReturnCode::Success;
}

wire::ProtocolMessage serve_request(Plc& plc, const wire::ProtocolMessage& msg) {
    wire::ProtocolMessage resp;
    resp.sequence = msg.sequence;

    if (!wire::is_request(msg.kind)) {
        // Protocol-error response: zero items, sequence echoed.
        resp.kind = msg.kind;  // already a response kind
        return resp;
    }

    resp.kind = wire::response_kind_for(msg.kind);
    for (const auto& item : msg.request_items) {
        wire::ResultItem out;
        if (msg.kind == wire::MsgKind::ReadRequest) {
            AreaResult r = read_area(plc, item.address);
            out.code = r.code;
            out.data = std::move(r.data);
        } else {
            out.code = write_area(plc, item.address, item.data);
        }
        resp.result_items.push_back(std::move(out));
    }
    return resp;
}

std::optional<std::vector<std::uint8_t>> peek(const Plc& plc, std::uint16_t db,
                                              std::uint32_t start, std::uint32_t len) {
    const DataBlock* block = plc.find_db(db);
    if (!block) return std::nullopt;
    if (static_cast<std::uint64_t>(start) + len > block->bytes.size())
        return std::nullopt;
    return std::vector<std::uint8_t>(block->bytes.begin() + start,
                                     block->bytes.begin() + start + len);
}

bool poke(Plc& plc, std::uint16_t db, std::uint32_t start,
          std::span<const std::uint8_t> data) {
    DataBlock* block = plc.find_db(db);
    if (!block) return false;
    if (static_cast<std::uint64_t>(start) + data.size() > block->bytes.size())
        return false;
    std::copy(data.begin(), data.end(), block->bytes.begin() + start);
    return true;
}

void init_instance_db(Plc& plc, const FbInstanceConfig& fb) {
    DataBlock* db = plc.find_db(fb.instance_db);
    if (!db) return;
    std::fill(db->bytes.begin(), db->bytes.end(), 0);
    db->bytes[kOffConnId] = static_cast<std::uint8_t>(fb.conn_id >> 8);
    db->bytes[kOffConnId + 1] = static_cast<std::uint8_t>(fb.conn_id & 0xFF);
    for (const auto& slot : fb.slots) {
        auto remote = wire::encode_any_pointer(slot.remote);
        auto local = wire::encode_any_pointer(slot.local);
        std::copy(remote.begin(), remote.end(),
                  db->bytes.begin() + addr_offset(slot.slot));
        std::copy(local.begin(), local.end(),
                  db->bytes.begin() + local_ptr_offset(slot.slot));
    }
}

}  // namespace plcpivot::sim
