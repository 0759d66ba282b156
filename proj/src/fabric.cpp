// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include "fabric.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "jsonio.hpp"

namespace plcpivot::net {

using nlohmann::json;

// ------------------------------------------------------------ topology load

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

const json& member(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "/" + key, "missing required field");
    return *it;
}

const json* member_opt(const json& j, const char* key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

std::uint64_t as_uint(const json& j, const std::string& path,
                      std::uint64_t max_value) {
    if (!j.is_number_unsigned())
        fail(path, "expected a non-negative integer");
    std::uint64_t v = j.get<std::uint64_t>();
    if (v > max_value) fail(path, "value out of range");
    return v;
}

std::string as_str(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

wire::AnyPointer as_pointer(const json& j, const std::string& path) {
    std::string text = as_str(j, path);
    auto parsed = wire::parse_pointer_literal(text);
    if (!parsed.pointer)
        fail(path, "bad pointer literal at offset " +
                       std::to_string(parsed.position) + ": " + parsed.error);
    return *parsed.pointer;
}

}  // namespace

Topology load_topology(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded()) throw ConfigError("/: not valid JSON");
    if (!root.is_object()) fail("/", "expected a JSON object");

    Topology topo;

    if (const json* prof = member_opt(root, "db_profile")) {
        if (const json* g = member_opt(*prof, "get_size_bytes"))
            topo.profile.get_db_size = static_cast<std::uint32_t>(
                as_uint(*g, "/db_profile/get_size_bytes", 1 << 21));
        if (const json* p = member_opt(*prof, "put_size_bytes"))
            topo.profile.put_db_size = static_cast<std::uint32_t>(
                as_uint(*p, "/db_profile/put_size_bytes", 1 << 21));
    }

    // Channels first: PLC connection tables reference them by id.
    std::set<std::string> channel_ids;
    if (const json* channels = member_opt(root, "channels")) {
        if (!channels->is_array()) fail("/channels", "expected an array");
        for (std::size_t i = 0; i < channels->size(); ++i) {
            const json& jc = (*channels)[i];
            const std::string path = "/channels/" + std::to_string(i);
            ChannelDef ch;
            ch.id = as_str(member(jc, path, "id"), path + "/id");
            if (ch.id.empty()) fail(path + "/id", "empty channel id");
            if (!channel_ids.insert(ch.id).second)
                fail(path + "/id", "duplicate channel id '" + ch.id + "'");
            std::string kind = as_str(member(jc, path, "kind"), path + "/kind");
            if (kind == "IP")
                ch.kind = ChannelKind::Ip;
            else if (kind == "SERIAL")
                ch.kind = ChannelKind::Serial;
            else
                fail(path + "/kind", "expected \"IP\" or \"SERIAL\"");
            const json& eps = member(jc, path, "endpoints");
            if (!eps.is_array() || eps.size() != 2)
                fail(path + "/endpoints", "expected exactly two endpoints");
            ch.endpoints[0] = as_str(eps[0], path + "/endpoints/0");
            ch.endpoints[1] = as_str(eps[1], path + "/endpoints/1");
            if (ch.endpoints[0] == ch.endpoints[1])
                fail(path + "/endpoints", "endpoints must differ");
            ch.delay = as_uint(member(jc, path, "delay_us"), path + "/delay_us",
                               3'600'000'000ULL);
            if (const json* rate = member_opt(jc, "bytes_per_second")) {
                if (ch.kind != ChannelKind::Serial)
                    fail(path + "/bytes_per_second",
                         "only valid for SERIAL channels");
                ch.bytes_per_second = static_cast<std::uint32_t>(
                    as_uint(*rate, path + "/bytes_per_second", 1'000'000'000ULL));
                if (ch.bytes_per_second == 0)
                    fail(path + "/bytes_per_second", "must be >= 1");
            } else if (ch.kind == ChannelKind::Serial) {
                fail(path, "SERIAL channel requires bytes_per_second");
            }
            if (const json* port = member_opt(jc, "tcp_port"))
                ch.tcp_port = static_cast<std::uint16_t>(
                    as_uint(*port, path + "/tcp_port", 65535));
            topo.channels.push_back(std::move(ch));
        }
    }

    std::set<std::string> plc_ids;
    if (const json* plcs = member_opt(root, "plcs")) {
        if (!plcs->is_array()) fail("/plcs", "expected an array");
        for (std::size_t i = 0; i < plcs->size(); ++i) {
            const json& jp = (*plcs)[i];
            const std::string path = "/plcs/" + std::to_string(i);
            Plc plc;
            plc.id = as_str(member(jp, path, "id"), path + "/id");
            if (plc.id.empty()) fail(path + "/id", "empty PLC id");
            if (plc.id == kAttackerId)
                fail(path + "/id", "'ATTACKER' is reserved");
            if (!plc_ids.insert(plc.id).second)
                fail(path + "/id", "duplicate PLC id '" + plc.id + "'");
            if (const json* si = member_opt(jp, "scan_interval_us")) {
                plc.scan_interval = as_uint(*si, path + "/scan_interval_us",
                                            3'600'000'000ULL);
                if (plc.scan_interval == 0)
                    fail(path + "/scan_interval_us", "must be > 0");
            }

            if (const json* dbs = member_opt(jp, "data_blocks")) {
                if (!dbs->is_array()) fail(path + "/data_blocks", "expected an array");
                for (std::size_t d = 0; d < dbs->size(); ++d) {
                    const json& jd = (*dbs)[d];
                    const std::string dpath = path + "/data_blocks/" + std::to_string(d);
                    sim::DataBlock db;
                    db.number = static_cast<std::uint16_t>(
                        as_uint(member(jd, dpath, "number"), dpath + "/number", 65535));
                    if (db.number == 0) fail(dpath + "/number", "DB numbers start at 1");
                    std::uint64_t size = as_uint(member(jd, dpath, "size"),
                                                 dpath + "/size", 1 << 21);
                    if (size == 0) fail(dpath + "/size", "size must be >= 1");
                    db.bytes.assign(size, 0);
                    if (const json* init = member_opt(jd, "init")) {
                        if (!init->is_array()) fail(dpath + "/init", "expected an array");
                        for (std::size_t k = 0; k < init->size(); ++k) {
                            const json& je = (*init)[k];
                            const std::string epath =
                                dpath + "/init/" + std::to_string(k);
                            std::uint64_t off = as_uint(member(je, epath, "offset"),
                                                        epath + "/offset", 1 << 21);
                            auto bytes = wire::from_hex(
                                as_str(member(je, epath, "hex"), epath + "/hex"));
                            if (!bytes) fail(epath + "/hex", "bad hex string");
                            if (off + bytes->size() > db.bytes.size())
                                fail(epath, "init data exceeds DB size");
                            std::copy(bytes->begin(), bytes->end(),
                                      db.bytes.begin() + off);
                        }
                    }
                    if (plc.data_blocks.count(db.number))
                        fail(dpath + "/number", "duplicate DB number");
                    plc.data_blocks.emplace(db.number, std::move(db));
                }
            }

            if (const json* conns = member_opt(jp, "connections")) {
                if (!conns->is_array()) fail(path + "/connections", "expected an array");
                for (std::size_t c = 0; c < conns->size(); ++c) {
                    const json& jc = (*conns)[c];
                    const std::string cpath = path + "/connections/" + std::to_string(c);
                    auto conn_id = static_cast<std::uint16_t>(
                        as_uint(member(jc, cpath, "conn_id"), cpath + "/conn_id", 65535));
                    std::string chan =
                        as_str(member(jc, cpath, "channel"), cpath + "/channel");
                    if (!channel_ids.count(chan))
                        fail(cpath + "/channel", "no such channel '" + chan + "'");
                    if (plc.connections.count(conn_id))
                        fail(cpath + "/conn_id", "duplicate conn_id");
                    plc.connections.emplace(conn_id, std::move(chan));
                }
            }

            if (const json* fbs = member_opt(jp, "fb_instances")) {
                if (!fbs->is_array()) fail(path + "/fb_instances", "expected an array");
                std::set<std::uint16_t> used_instance_dbs;
                for (std::size_t f = 0; f < fbs->size(); ++f) {
                    const json& jf = (*fbs)[f];
                    const std::string fpath = path + "/fb_instances/" + std::to_string(f);
                    sim::FbInstanceConfig fb;
                    std::string kind = as_str(member(jf, fpath, "kind"), fpath + "/kind");
                    if (kind == "GET")
                        fb.kind = sim::FbKind::Get;
                    else if (kind == "PUT")
                        fb.kind = sim::FbKind::Put;
                    else
                        fail(fpath + "/kind", "expected \"GET\" or \"PUT\"");
                    fb.instance_db = static_cast<std::uint16_t>(as_uint(
                        member(jf, fpath, "instance_db"), fpath + "/instance_db", 65535));
                    fb.conn_id = static_cast<std::uint16_t>(
                        as_uint(member(jf, fpath, "conn_id"), fpath + "/conn_id", 65535));
                    fb.trigger_interval =
                        as_uint(member(jf, fpath, "trigger_interval_us"),
                                fpath + "/trigger_interval_us", 3'600'000'000ULL);
                    if (fb.trigger_interval == 0)
                        fail(fpath + "/trigger_interval_us", "must be > 0");

                    if (!plc.connections.count(fb.conn_id))
                        fail(fpath + "/conn_id",
                             "conn_id " + std::to_string(fb.conn_id) +
                                 " not in this PLC's connection table");
                    auto db_it = plc.data_blocks.find(fb.instance_db);
                    if (db_it == plc.data_blocks.end())
                        fail(fpath + "/instance_db",
                             "instance DB " + std::to_string(fb.instance_db) +
                                 " is not declared in data_blocks");
                    const std::uint32_t want = topo.profile.size_for(fb.kind);
                    if (db_it->second.bytes.size() != want)
                        fail(fpath + "/instance_db",
                             "instance DB " + std::to_string(fb.instance_db) +
                                 " must be exactly " + std::to_string(want) +
                                 " bytes for " + kind);
                    if (!used_instance_dbs.insert(fb.instance_db).second)
                        fail(fpath + "/instance_db", "instance DB already bound");

                    if (const json* slots = member_opt(jf, "slots")) {
                        if (!slots->is_array()) fail(fpath + "/slots", "expected an array");
                        std::set<int> seen;
                        for (std::size_t s = 0; s < slots->size(); ++s) {
                            const json& js = (*slots)[s];
                            const std::string spath =
                                fpath + "/slots/" + std::to_string(s);
                            sim::FbSlotInit slot;
                            slot.slot = static_cast<int>(as_uint(
                                member(js, spath, "slot"), spath + "/slot", 4));
                            if (slot.slot < 1) fail(spath + "/slot", "slots are 1..4");
                            if (!seen.insert(slot.slot).second)
                                fail(spath + "/slot", "duplicate slot");
                            slot.remote =
                                as_pointer(member(js, spath, "remote"), spath + "/remote");
                            slot.local =
                                as_pointer(member(js, spath, "local"), spath + "/local");
                            fb.slots.push_back(std::move(slot));
                        }
                    }
                    plc.fb_instances.push_back(std::move(fb));
                }
            }
            topo.plcs.push_back(std::move(plc));
        }
    }

    // Cross checks.
    for (std::size_t i = 0; i < topo.channels.size(); ++i) {
        const std::string path = "/channels/" + std::to_string(i);
        for (int e = 0; e < 2; ++e) {
            const std::string& ep = topo.channels[i].endpoints[e];
            if (ep != kAttackerId && !plc_ids.count(ep))
                fail(path + "/endpoints/" + std::to_string(e),
                     "unknown endpoint '" + ep + "'");
        }
    }
    if (!topo.channels.empty()) {
        bool attacker_seen = false;
        for (const auto& ch : topo.channels)
            attacker_seen = attacker_seen || ch.has_endpoint(kAttackerId);
        if (!attacker_seen)
            fail("/channels", "no channel exposes the ATTACKER endpoint");
    }
    // Every connection-table channel must actually touch its PLC.
    for (std::size_t i = 0; i < topo.plcs.size(); ++i) {
        const Plc& plc = topo.plcs[i];
        for (const auto& [conn_id, chan_id] : plc.connections) {
            auto it = std::find_if(topo.channels.begin(), topo.channels.end(),
                                   [&](const ChannelDef& c) { return c.id == chan_id; });
            if (it == topo.channels.end() || !it->has_endpoint(plc.id))
                fail("/plcs/" + std::to_string(i) + "/connections",
                     "conn_id " + std::to_string(conn_id) + " resolves to channel '" +
                         chan_id + "' which does not include PLC '" + plc.id + "'");
        }
    }

    if (const json* sites = member_opt(root, "sites")) {
        if (!sites->is_object()) fail("/sites", "expected an object");
        for (auto it = sites->begin(); it != sites->end(); ++it) {
            if (!it.value().is_array())
                fail("/sites/" + it.key(), "expected an array of PLC ids");
            std::vector<std::string> members_list;
            for (std::size_t k = 0; k < it.value().size(); ++k) {
                std::string id = as_str(it.value()[k],
                                        "/sites/" + it.key() + "/" + std::to_string(k));
                if (!plc_ids.count(id))
                    fail("/sites/" + it.key() + "/" + std::to_string(k),
                         "unknown PLC '" + id + "'");
                members_list.push_back(std::move(id));
            }
            topo.sites.emplace(it.key(), std::move(members_list));
        }
    }

    if (const json* reach = member_opt(root, "reachability")) {
        if (!reach->is_array()) fail("/reachability", "expected an array");
        topo.has_reachability = true;
        for (std::size_t i = 0; i < reach->size(); ++i) {
            const json& jr = (*reach)[i];
            const std::string path = "/reachability/" + std::to_string(i);
            if (!jr.is_array() || jr.size() != 2)
                fail(path, "expected a [from, to] pair");
            std::string from = as_str(jr[0], path + "/0");
            std::string to = as_str(jr[1], path + "/1");
            for (const std::string* ep : {&from, &to}) {
                if (*ep != kAttackerId && !plc_ids.count(*ep))
                    fail(path, "unknown endpoint '" + *ep + "'");
            }
            topo.reachability.emplace_back(std::move(from), std::move(to));
        }
    }

    // Bake initial instance-DB contents into the definitions.
    for (auto& plc : topo.plcs)
        for (const auto& fb : plc.fb_instances) sim::init_instance_db(plc, fb);

    return topo;
}

Topology load_topology_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open topology file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_topology(ss.str());
}

// ------------------------------------------------------------------- fleet

Fleet::Fleet(Topology topology) : topo_(std::move(topology)) {
    plcs_ = topo_.plcs;
    for (std::size_t i = 0; i < plcs_.size(); ++i) plc_index_[plcs_[i].id] = i;
    for (const auto& ch : topo_.channels) channels_.emplace(ch.id, ChannelState{ch, 0});
    plc_seq_.assign(plcs_.size(), 1);
    for (std::size_t i = 0; i < plcs_.size(); ++i) {
        for (const auto& fb : plcs_[i].fb_instances) {
            FbRuntime rt;
            rt.cfg = fb;
            rt.plc_index = i;
            fbs_.push_back(std::move(rt));
        }
        schedule(plcs_[i].scan_interval, [this, i] { plc_scan(i); });
    }
}

Fleet::~Fleet() { realtime_stop(); }

void Fleet::schedule(Micros at, std::function<void()> fn) {
    queue_.push(Event{at, event_seq_++, std::move(fn)});
}

void Fleet::run_ready(Micros limit) {
    while (!queue_.empty() && queue_.top().at <= limit) {
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.at;
        ev.fn();
    }
    if (limit > now_) now_ = limit;
}

void Fleet::advance(Micros duration) { run_ready(now_ + duration); }

DeliveryResult Fleet::deliver(const std::string& channel_id, const std::string& from,
                              const wire::ProtocolMessage& request) {
    std::optional<DeliveryResult> result;
    start_exchange(channel_id, from, request,
                   [&result](DeliveryResult r) { result = std::move(r); });
    while (!result) {
        if (queue_.empty())
            throw std::logic_error("event queue drained while awaiting a response");
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.at;
        ev.fn();
    }
    return std::move(*result);
}

const ChannelDef* Fleet::find_channel(const std::string& id) const {
    auto it = channels_.find(id);
    return it == channels_.end() ? nullptr : &it->second.def;
}

std::vector<std::string> Fleet::attacker_channels() const {
    std::vector<std::string> out;
    for (const auto& ch : topo_.channels)
        if (ch.has_endpoint(kAttackerId)) out.push_back(ch.id);
    return out;
}

std::optional<std::string> Fleet::attacker_channel_to(const std::string& plc_id) const {
    for (const auto& ch : topo_.channels)
        if (ch.has_endpoint(kAttackerId) && ch.has_endpoint(plc_id)) return ch.id;
    return std::nullopt;
}

std::optional<std::string> Fleet::resolve_connection(const std::string& plc_id,
                                                     std::uint16_t conn_id) const {
    const Plc* plc = find_plc(plc_id);
    if (!plc) return std::nullopt;
    auto it = plc->connections.find(conn_id);
    if (it == plc->connections.end()) return std::nullopt;
    return it->second;
}

Plc* Fleet::find_plc(const std::string& id) {
    auto it = plc_index_.find(id);
    return it == plc_index_.end() ? nullptr : &plcs_[it->second];
}

const Plc* Fleet::find_plc(const std::string& id) const {
    auto it = plc_index_.find(id);
    return it == plc_index_.end() ? nullptr : &plcs_[it->second];
}

std::optional<std::vector<std::uint8_t>> Fleet::read_memory(const std::string& plc_id,
                                                            std::uint16_t db,
                                                            std::uint32_t start,
                                                            std::uint32_t len) const {
    const Plc* plc = find_plc(plc_id);
    if (!plc) return std::nullopt;
    return sim::peek(*plc, db, start, len);
}

bool Fleet::write_memory(const std::string& plc_id, std::uint16_t db,
                         std::uint32_t start, std::span<const std::uint8_t> data) {
    Plc* plc = find_plc(plc_id);
    if (!plc) return false;
    return sim::poke(*plc, db, start, data);
}

std::string Fleet::event_log_jsonl() const {
    std::string out;
    for (const auto& rec : log_) {
        out += rec.dump();
        out += '\n';
    }
    return out;
}

void Fleet::clear_logs() {
    log_.clear();
    transfers_.clear();
}

bool Fleet::reachable(const std::string& from, const std::string& to) const {
    if (!topo_.has_reachability) return true;
    for (const auto& [f, t] : topo_.reachability)
        if (f == from && t == to) return true;
    return false;
}

Micros Fleet::tx_time(const ChannelState& ch, std::size_t frame_bytes) const {
    if (ch.def.kind != ChannelKind::Serial) return 0;
    const std::uint64_t rate = ch.def.bytes_per_second;
    return (static_cast<std::uint64_t>(frame_bytes) * 1'000'000ULL + rate - 1) / rate;
}

std::uint16_t Fleet::next_plc_sequence(std::size_t plc_index) {
    return plc_seq_[plc_index]++;
}

void Fleet::finish_unreachable(Micros at, const std::string& channel_id,
                               const std::string& from, const std::string& to,
                               const wire::ProtocolMessage& request,
                               std::string reason, ExchangeCallback cb) {
    schedule(at, [this, channel_id, from, to, request, reason = std::move(reason),
                  cb = std::move(cb), at]() {
        DeliveryResult r;
        r.unreachable = true;
        r.reason = reason;
        log_exchange(at, now_, channel_id, from, to, request, r);
        cb(std::move(r));
    });
}

void Fleet::start_exchange(const std::string& channel_id, const std::string& from,
                           const wire::ProtocolMessage& request, ExchangeCallback cb) {
    const Micros t0 = now_;
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) {
        finish_unreachable(t0, channel_id, from, "", request, "no such channel",
                           std::move(cb));
        return;
    }
    ChannelState& ch = it->second;
    if (!ch.def.has_endpoint(from)) {
        finish_unreachable(t0, channel_id, from, "", request,
                           "sender is not an endpoint of this channel", std::move(cb));
        return;
    }
    const std::string to = ch.def.peer_of(from);
    if (!reachable(from, to)) {
        finish_unreachable(t0, channel_id, from, to, request,
                           "denied by reachability rules", std::move(cb));
        return;
    }
    if (to == kAttackerId) {
        finish_unreachable(t0, channel_id, from, to, request,
                           "peer endpoint serves no requests", std::move(cb));
        return;
    }
    auto peer_it = plc_index_.find(to);
    if (peer_it == plc_index_.end()) {
        finish_unreachable(t0, channel_id, from, to, request, "peer down",
                           std::move(cb));
        return;
    }

    const std::vector<std::uint8_t> frame = wire::encode_pdu(request);
    const std::size_t req_bytes = frame.size();
    const Micros start = std::max(t0, ch.free_at);
    const Micros tx_req = tx_time(ch, req_bytes);
    ch.free_at = start + tx_req;
    const Micros arrive = start + tx_req + ch.def.delay;
    const std::size_t peer_index = peer_it->second;

    schedule(arrive, [this, peer_index, request, cb = std::move(cb), t0, channel_id,
                      from, to, req_bytes]() {
        wire::ProtocolMessage resp = sim::serve_request(plcs_[peer_index], request);
        const std::size_t resp_bytes = wire::encode_pdu(resp).size();
        ChannelState& ch = channels_.at(channel_id);
        const Micros resp_start = std::max(now_, ch.free_at);
        const Micros tx_resp = tx_time(ch, resp_bytes);
        ch.free_at = resp_start + tx_resp;
        const Micros done = resp_start + tx_resp + ch.def.delay;
        schedule(done, [this, resp, cb, t0, channel_id, from, to, req_bytes,
                        resp_bytes, request]() {
            DeliveryResult r;
            r.response = resp;
            r.elapsed = now_ - t0;
            r.request_bytes = req_bytes;
            r.response_bytes = resp_bytes;
            log_exchange(t0, now_, channel_id, from, to, request, r);
            cb(std::move(r));
        });
    });
}

// ----------------------------------------------------------- FB transfers

void Fleet::plc_scan(std::size_t plc_index) {
    Plc& plc = plcs_[plc_index];
    for (std::size_t f = 0; f < fbs_.size(); ++f) {
        FbRuntime& fb = fbs_[f];
        if (fb.plc_index != plc_index || fb.in_flight) continue;
        if (now_ - fb.last_trigger < fb.cfg.trigger_interval) continue;
        fb.last_trigger = now_;
        fb_trigger(plc_index, f);
    }
    schedule(now_ + plc.scan_interval, [this, plc_index] { plc_scan(plc_index); });
}

namespace {

// Local side of a slot: read the payload / store the collected bytes.
std::optional<std::vector<std::uint8_t>> read_local(const Plc& plc,
                                                    const wire::AnyPointer& ptr,
                                                    std::size_t len) {
    if (ptr.elem == wire::ElemType::Bit && ptr.count == 1) {
        wire::AddressItem item;
        item.db_number = ptr.db_number;
        item.start_byte = ptr.byte_offset;
        item.start_bit = ptr.bit_offset;
        item.bit_access = true;
        item.length_bytes = 1;
        sim::AreaResult r = sim::read_area(plc, item);
        if (!r.ok()) return std::nullopt;
        return r.data;
    }
    return sim::peek(plc, ptr.db_number, ptr.byte_offset, static_cast<std::uint32_t>(len));
}

bool write_local(Plc& plc, const wire::AnyPointer& ptr,
                 std::span<const std::uint8_t> data) {
    if (ptr.elem == wire::ElemType::Bit && ptr.count == 1) {
        wire::AddressItem item;
        item.db_number = ptr.db_number;
        item.start_byte = ptr.byte_offset;
        item.start_bit = ptr.bit_offset;
        item.bit_access = true;
        item.length_bytes = 1;
        return sim::write_area(plc, item, data) == wire::ReturnCode::Success;
    }
    const std::size_t len = std::min(data.size(), wire::total_bytes(ptr));
    return sim::poke(plc, ptr.db_number, ptr.byte_offset, data.subspan(0, len));
}

}  // namespace

void Fleet::fb_trigger(std::size_t plc_index, std::size_t fb_index) {
    FbRuntime& fb = fbs_[fb_index];
    Plc& plc = plcs_[plc_index];
    sim::DataBlock* db = plc.find_db(fb.cfg.instance_db);
    if (!db) return;

    fb.in_flight = true;
    db->bytes[sim::kOffReq] |= 0x01;

    auto job = std::make_shared<TransferJob>();
    job->plc_index = plc_index;
    job->fb_index = fb_index;
    job->started = now_;
    job->outcomes.fill("unused");

    // Snapshot the slot pointers; writes landing mid-transfer take effect
    // on the next trigger.
    for (int s = 1; s <= sim::kSlotCount; ++s) {
        auto addr_bytes = sim::peek(plc, fb.cfg.instance_db, sim::addr_offset(s),
                                    wire::kPointerSize);
        auto local_bytes = sim::peek(plc, fb.cfg.instance_db,
                                     sim::local_ptr_offset(s), wire::kPointerSize);
        wire::PointerDecode addr = wire::decode_any_pointer(*addr_bytes);
        if (addr.is_unused()) continue;  // inactive slot
        wire::PointerDecode local = wire::decode_any_pointer(*local_bytes);
        if (!addr.is_pointer() || !local.is_pointer()) {
            job->outcomes[s - 1] = "ill_formed";
            job->slot_status[s - 1] = sim::kStatusIllFormedSlot;
            continue;
        }
        SlotPlan sp;
        sp.slot = s;
        sp.remote = addr.pointer;
        sp.local = local.pointer;
        sp.length_mismatch =
            wire::total_bits(sp.remote) != wire::total_bits(sp.local);
        job->plan.push_back(std::move(sp));
    }

    auto chan = resolve_connection(plc.id, fb.cfg.conn_id);
    if (!chan) {
        for (const auto& sp : job->plan) {
            job->outcomes[sp.slot - 1] = "unreachable";
            job->slot_status[sp.slot - 1] = sim::kStatusConnUnknown;
        }
        job->plan.clear();
        schedule(now_ + plc.scan_interval,
                 [this, job] { finish_transfer(job, sim::kStatusConnUnknown); });
        return;
    }
    job->channel_id = *chan;

    if (job->plan.empty()) {
        // Nothing to exchange; a no-op handshake still holds REQ for the
        // round-trip window.
        const Micros delay = channels_.at(*chan).def.delay;
        schedule(now_ + 2 * delay, [this, job] { finish_transfer(job, 0); });
        return;
    }
    run_slot(job);
}

void Fleet::run_slot(const std::shared_ptr<TransferJob>& job) {
    if (job->next >= job->plan.size()) {
        finish_transfer(job, 0);
        return;
    }
    const SlotPlan sp = job->plan[job->next++];
    Plc& plc = plcs_[job->plc_index];
    FbRuntime& fb = fbs_[job->fb_index];
    const int idx = sp.slot - 1;

    const std::size_t min_len =
        std::min(wire::total_bytes(sp.remote), wire::total_bytes(sp.local));
    auto item_opt = wire::to_address_item(sp.remote);
    if (!item_opt) {
        job->outcomes[idx] = "ill_formed";
        job->slot_status[idx] = sim::kStatusIllFormedSlot;
        run_slot(job);
        return;
    }
    wire::AddressItem item = *item_opt;
    if (!item.bit_access) item.length_bytes = static_cast<std::uint16_t>(min_len);

    auto settle = [this, job, sp, idx](bool peer_ok, bool local_ok) {
        if (!peer_ok) {
            job->outcomes[idx] = "peer_error";
            job->slot_status[idx] = sim::kStatusPeerError;
        } else if (!local_ok) {
            job->outcomes[idx] = "ill_formed";
            job->slot_status[idx] = sim::kStatusIllFormedSlot;
        } else if (sp.length_mismatch) {
            job->outcomes[idx] = "length_mismatch";
            job->slot_status[idx] = sim::kStatusLengthMismatch;
        } else {
            job->outcomes[idx] = "ok";
        }
        run_slot(job);
    };

    if (fb.cfg.kind == sim::FbKind::Get) {
        wire::ProtocolMessage req;
        req.kind = wire::MsgKind::ReadRequest;
        req.sequence = next_plc_sequence(job->plc_index);
        req.request_items.push_back({item, {}});
        start_exchange(job->channel_id, plc.id, req,
                       [this, job, sp, idx, settle](DeliveryResult r) {
            if (r.unreachable) {
                job->outcomes[idx] = "unreachable";
                job->slot_status[idx] = sim::kStatusUnreachable;
                run_slot(job);
                return;
            }
            if (r.response.result_items.size() != 1 ||
                r.response.result_items[0].code != wire::ReturnCode::Success) {
                settle(false, true);
                return;
            }
            Plc& local_plc = plcs_[job->plc_index];
            const bool stored =
                write_local(local_plc, sp.local, r.response.result_items[0].data);
            settle(true, stored);
        });
    } else {
        auto payload = read_local(plc, sp.local, min_len);
        if (!payload) {
            job->outcomes[idx] = "ill_formed";
            job->slot_status[idx] = sim::kStatusIllFormedSlot;
            run_slot(job);
            return;
        }
        payload->resize(item.bit_access ? 1 : item.length_bytes, 0);
        wire::ProtocolMessage req;
        req.kind = wire::MsgKind::WriteRequest;
        req.sequence = next_plc_sequence(job->plc_index);
        req.request_items.push_back({item, std::move(*payload)});
        start_exchange(job->channel_id, plc.id, req,
                       [this, job, idx, settle](DeliveryResult r) {
            if (r.unreachable) {
                job->outcomes[idx] = "unreachable";
                job->slot_status[idx] = sim::kStatusUnreachable;
                run_slot(job);
                return;
            }
            const bool peer_ok =
                r.response.result_items.size() == 1 &&
                r.response.result_items[0].code == wire::ReturnCode::Success;
            settle(peer_ok, true);
        });
    }
}

void Fleet::finish_transfer(const std::shared_ptr<TransferJob>& job,
                            std::uint16_t forced_status) {
    FbRuntime& fb = fbs_[job->fb_index];
    Plc& plc = plcs_[job->plc_index];
    sim::DataBlock* db = plc.find_db(fb.cfg.instance_db);

    std::uint16_t status = forced_status;
    bool any_error = forced_status != 0;
    for (int s = 0; s < sim::kSlotCount; ++s) {
        const std::string& o = job->outcomes[s];
        if (o == "unused" || o == "ok") continue;
        any_error = true;
        if (status == 0) status = job->slot_status[s];
    }

    if (db) {
        db->bytes[sim::kOffFlags] = any_error ? sim::kFlagError : sim::kFlagNdr;
        db->bytes[sim::kOffStatus] = static_cast<std::uint8_t>(status >> 8);
        db->bytes[sim::kOffStatus + 1] = static_cast<std::uint8_t>(status & 0xFF);
        db->bytes[sim::kOffReq] &= ~std::uint8_t{0x01};
    }
    fb.in_flight = false;

    TransferEvent ev;
    ev.plc_id = plc.id;
    ev.instance_db = fb.cfg.instance_db;
    ev.kind = fb.cfg.kind;
    ev.started = job->started;
    ev.completed = now_;
    ev.status = status;
    ev.ndr = !any_error;
    ev.error = any_error;
    ev.slots = job->outcomes;
    transfers_.push_back(ev);
    log_transfer(ev);
}

// ------------------------------------------------------------------- logs

void Fleet::log_exchange(Micros t0, Micros t1, const std::string& channel_id,
                         const std::string& from, const std::string& to,
                         const wire::ProtocolMessage& req, const DeliveryResult& r) {
    if (!log_enabled_) return;
    nlohmann::ordered_json rec;
    rec["type"] = "exchange";
    rec["t_start"] = t0;
    rec["t_end"] = t1;
    rec["channel"] = channel_id;
    rec["from"] = from;
    rec["to"] = to;
    if (r.unreachable) {
        rec["unreachable"] = true;
        rec["reason"] = r.reason;
        rec["req"] = jsonio::describe_message(req);
    } else {
        rec["elapsed_us"] = r.elapsed;
        rec["req_bytes"] = r.request_bytes;
        rec["resp_bytes"] = r.response_bytes;
        rec["req"] = jsonio::describe_message(req);
        rec["resp"] = jsonio::describe_message(r.response);
    }
    log_.push_back(std::move(rec));
}

void Fleet::log_transfer(const TransferEvent& ev) {
    if (!log_enabled_) return;
    nlohmann::ordered_json rec;
    rec["type"] = "transfer";
    rec["t_start"] = ev.started;
    rec["t_end"] = ev.completed;
    rec["plc"] = ev.plc_id;
    rec["instance_db"] = ev.instance_db;
    rec["fb"] = sim::fb_kind_name(ev.kind);
    rec["status"] = ev.status;
    rec["ndr"] = ev.ndr;
    rec["error"] = ev.error;
    nlohmann::ordered_json slots = nlohmann::ordered_json::array();
    for (const auto& s : ev.slots) slots.push_back(s);
    rec["slots"] = std::move(slots);
    log_.push_back(std::move(rec));
}

// --------------------------------------------------------------- realtime

struct Fleet::RealtimeState {
    std::atomic<bool> stop{false};
    std::thread clock_thread;
    std::vector<std::thread> servers;
    std::vector<int> listen_fds;
};

namespace {

int open_listener(std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return -1;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd, 4) != 0) {
        ::close(fd);
        return -1;
    }
    return fd;
}

bool send_all(int fd, std::span<const std::uint8_t> data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

}  // namespace

void Fleet::realtime_start() {
    if (realtime_running_) return;
    realtime_ = std::make_unique<RealtimeState>();

    struct Listener {
        int fd;
        std::string channel;
    };
    std::vector<Listener> listeners;
    for (const auto& ch : topo_.channels) {
        if (!ch.tcp_port || !ch.has_endpoint(kAttackerId)) continue;
        int fd = open_listener(*ch.tcp_port);
        if (fd < 0) {
            for (const auto& l : listeners) ::close(l.fd);
            realtime_.reset();
            throw ConfigError("cannot bind TCP port " + std::to_string(*ch.tcp_port) +
                              " for channel '" + ch.id + "'");
        }
        listeners.push_back({fd, ch.id});
        realtime_->listen_fds.push_back(fd);
    }

    realtime_running_ = true;

    realtime_->clock_thread = std::thread([this] {
        auto last = std::chrono::steady_clock::now();
        while (!realtime_->stop.load()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
            auto t = std::chrono::steady_clock::now();
            auto us = std::chrono::duration_cast<std::chrono::microseconds>(t - last);
            last = t;
            std::lock_guard<std::mutex> lock(mu_);
            advance(static_cast<Micros>(us.count()));
        }
    });

    for (const auto& l : listeners) {
        realtime_->servers.emplace_back([this, l] {
            while (!realtime_->stop.load()) {
                pollfd pfd{l.fd, POLLIN, 0};
                if (::poll(&pfd, 1, 100) <= 0) continue;
                int client = ::accept(l.fd, nullptr, nullptr);
                if (client < 0) continue;
                std::vector<std::uint8_t> buf;
                std::uint8_t chunk[4096];
                while (!realtime_->stop.load()) {
                    pollfd cfd{client, POLLIN, 0};
                    if (::poll(&cfd, 1, 100) <= 0) continue;
                    ssize_t n = ::recv(client, chunk, sizeof(chunk), 0);
                    if (n <= 0) break;
                    buf.insert(buf.end(), chunk, chunk + n);
                    wire::StreamDecode sd = wire::decode_stream(buf);
                    bool closed = false;
                    for (const auto& msg : sd.messages) {
                        DeliveryResult r;
                        {
                            std::lock_guard<std::mutex> lock(mu_);
                            r = deliver(l.channel, kAttackerId, msg);
                        }
                        if (r.unreachable) continue;  // nothing comes back
                        if (!send_all(client, wire::encode_pdu(r.response))) {
                            closed = true;
                            break;
                        }
                    }
                    if (closed || sd.malformed) break;
                    buf.erase(buf.begin(), buf.begin() + sd.consumed);
                }
                ::close(client);
            }
            ::close(l.fd);
        });
    }
}

void Fleet::realtime_stop() {
    if (!realtime_running_ || !realtime_) return;
    realtime_->stop.store(true);
    if (realtime_->clock_thread.joinable()) realtime_->clock_thread.join();
    for (auto& t : realtime_->servers)
        if (t.joinable()) t.join();
    realtime_.reset();
    realtime_running_ = false;
}

}  // namespace plcpivot::net
