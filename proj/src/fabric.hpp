// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * @file fabric.hpp
 * @brief Topology construction and message delivery over a discrete-event
 *        fleet simulation with a virtual microsecond clock.
 *
 * The fleet runs every PLC as a logical executor: scan steps, request
 * handling and transfer completions are events processed one at a time in
 * timestamp order, so request handling never overlaps a scan step on the
 * same PLC and no read can observe a torn write. Channels are point-to-point
 * (IP or serial); serial channels add frame transmission time at the
 * configured byte rate on top of the propagation delay, and every channel
 * serializes its frames.
 *
 * Topologies load from a JSON document (see README for the schema). All
 * invariants are checked eagerly at load time with the JSON path of the
 * offending entry in the error message.
 */

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "plc.hpp"
#include "wire.hpp"

namespace plcpivot::net {

using Micros = std::uint64_t;
using sim::Plc;

inline constexpr const char* kAttackerId = "ATTACKER";

enum class ChannelKind { Ip, Serial };

struct ChannelDef {
    std::string id;
    ChannelKind kind = ChannelKind::Ip;
    std::array<std::string, 2> endpoints;
    Micros delay = 0;                    // one-way propagation delay
    std::uint32_t bytes_per_second = 0;  // serial only
    std::optional<std::uint16_t> tcp_port;  // realtime mode listener

    bool has_endpoint(const std::string& e) const {
        return endpoints[0] == e || endpoints[1] == e;
    }
    const std::string& peer_of(const std::string& e) const {
        return endpoints[0] == e ? endpoints[1] : endpoints[0];
    }
};

// Instance-DB size expectations, overridable per topology.
struct DbProfile {
    std::uint32_t get_db_size = sim::kGetDbSize;
    std::uint32_t put_db_size = sim::kPutDbSize;

    std::uint32_t size_for(sim::FbKind k) const {
        return k == sim::FbKind::Get ? get_db_size : put_db_size;
    }
};

struct Topology {
    std::vector<Plc> plcs;
    std::vector<ChannelDef> channels;
    std::map<std::string, std::vector<std::string>> sites;
    bool has_reachability = false;  // absent section = adjacency governs
    std::vector<std::pair<std::string, std::string>> reachability;
    DbProfile profile;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

Topology load_topology(const std::string& json_text);
Topology load_topology_file(const std::string& path);

struct DeliveryResult {
    bool unreachable = false;
    std::string reason;
    wire::ProtocolMessage response;
    Micros elapsed = 0;
    std::size_t request_bytes = 0;
    std::size_t response_bytes = 0;

    bool ok() const { return !unreachable; }
};

/// One completed FB transfer, as recorded in the event log.
struct TransferEvent {
    std::string plc_id;
    std::uint16_t instance_db = 0;
    sim::FbKind kind = sim::FbKind::Get;
    Micros started = 0;
    Micros completed = 0;
    std::uint16_t status = 0;
    bool ndr = false;
    bool error = false;
    // per 1-based slot: "unused", "ok", "ill_formed", "peer_error",
    // "unreachable", "length_mismatch"
    std::array<std::string, sim::kSlotCount> slots;
};

class Fleet {
  public:
    explicit Fleet(Topology topology);
    ~Fleet();

    Fleet(const Fleet&) = delete;
    Fleet& operator=(const Fleet&) = delete;

    Micros now() const { return now_; }

    /// Processes all events up to now()+duration and advances the clock.
    void advance(Micros duration);

    /// Synchronous exchange from `from` over the named channel: encodes the
    /// request, models transmission/delay, lets the peer serve it, and runs
    /// the event loop until the response (or unreachable verdict) lands.
    DeliveryResult deliver(const std::string& channel_id, const std::string& from,
                           const wire::ProtocolMessage& request);

    const Topology& topology() const { return topo_; }
    const ChannelDef* find_channel(const std::string& id) const;
    std::vector<std::string> attacker_channels() const;
    /// Channel connecting the attacker to the given PLC, if any exists.
    std::optional<std::string> attacker_channel_to(const std::string& plc_id) const;
    /// Channel a PLC's conn_id resolves to; nullopt for unknown ids.
    std::optional<std::string> resolve_connection(const std::string& plc_id,
                                                  std::uint16_t conn_id) const;

    Plc* find_plc(const std::string& id);
    const Plc* find_plc(const std::string& id) const;

    // Direct memory access for the harness oracle; bypasses the protocol.
    std::optional<std::vector<std::uint8_t>> read_memory(const std::string& plc_id,
                                                         std::uint16_t db,
                                                         std::uint32_t start,
                                                         std::uint32_t len) const;
    bool write_memory(const std::string& plc_id, std::uint16_t db,
                      std::uint32_t start, std::span<const std::uint8_t> data);

    // Event log: one record per protocol exchange and per FB transfer.
    void set_event_log_enabled(bool on) { log_enabled_ = on; }
    const std::vector<nlohmann::ordered_json>& event_log() const { return log_; }
    const std::vector<TransferEvent>& transfer_log() const { return transfers_; }
    std::string event_log_jsonl() const;
    void clear_logs();

    // Realtime mode: paces the virtual clock against the wall clock and
    // serves attacker channels with a tcp_port on local TCP sockets.
    void realtime_start();
    void realtime_stop();
    bool realtime_running() const { return realtime_running_; }

    /// Guards external access when the realtime thread is live.
    std::mutex& mutex() { return mu_; }

  private:
    struct Event {
        Micros at;
        std::uint64_t seq;
        std::function<void()> fn;
    };
    struct EventOrder {
        bool operator()(const Event& a, const Event& b) const {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };

    struct ChannelState {
        ChannelDef def;
        Micros free_at = 0;  // frame serialization point
    };

    struct FbRuntime {
        sim::FbInstanceConfig cfg;
        std::size_t plc_index = 0;
        Micros last_trigger = 0;
        bool in_flight = false;
    };

    // In-flight transfer job (one FB trigger).
    struct SlotPlan {
        int slot = 1;  // 1-based
        wire::AnyPointer remote;
        wire::AnyPointer local;
        bool length_mismatch = false;
    };
    struct TransferJob {
        std::size_t plc_index = 0;
        std::size_t fb_index = 0;
        Micros started = 0;
        std::string channel_id;
        std::vector<SlotPlan> plan;
        std::size_t next = 0;
        std::array<std::string, sim::kSlotCount> outcomes;
        std::array<std::uint16_t, sim::kSlotCount> slot_status{};
    };

    void schedule(Micros at, std::function<void()> fn);
    void run_ready(Micros limit);  // run events with at <= limit

    using ExchangeCallback = std::function<void(DeliveryResult)>;
    void start_exchange(const std::string& channel_id, const std::string& from,
                        const wire::ProtocolMessage& request, ExchangeCallback cb);
    void finish_unreachable(Micros at, const std::string& channel_id,
                            const std::string& from, const std::string& to,
                            const wire::ProtocolMessage& request,
                            std::string reason, ExchangeCallback cb);

    bool reachable(const std::string& from, const std::string& to) const;
    Micros tx_time(const ChannelState& ch, std::size_t frame_bytes) const;

    void plc_scan(std::size_t plc_index);
    void fb_trigger(std::size_t plc_index, std::size_t fb_index);
    void run_slot(const std::shared_ptr<TransferJob>& job);
    void finish_transfer(const std::shared_ptr<TransferJob>& job,
                         std::uint16_t forced_status);

    void log_exchange(Micros t0, Micros t1, const std::string& channel_id,
                      const std::string& from, const std::string& to,
                      const wire::ProtocolMessage& req, const DeliveryResult& r);
    void log_transfer(const TransferEvent& ev);

    std::uint16_t next_plc_sequence(std::size_t plc_index);

    Topology topo_;
    std::vector<Plc> plcs_;  // live instances (topology keeps the definitions)
    std::map<std::string, std::size_t> plc_index_;
    std::map<std::string, ChannelState> channels_;
    std::vector<FbRuntime> fbs_;
    std::vector<std::uint16_t> plc_seq_;

    Micros now_ = 0;
    std::uint64_t event_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;

    bool log_enabled_ = true;
    std::vector<nlohmann::ordered_json> log_;
    std::vector<TransferEvent> transfers_;

    std::mutex mu_;
    bool realtime_running_ = false;
    struct RealtimeState;
    std::unique_ptr<RealtimeState> realtime_;
};

}  // namespace plcpivot::net
