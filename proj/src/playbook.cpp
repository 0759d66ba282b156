// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#include "playbook.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace plcpivot::run {

using nlohmann::json;

const char* step_op_name(Step::Op op) {
    switch (op) {
        case Step::Op::Probe: return "probe";
        case Step::Op::FingerprintRange: return "fingerprint_range";
        case Step::Op::ReadUsage: return "read_usage";
        case Step::Op::Configure: return "configure";
        case Step::Op::Await: return "await";
        case Step::Op::Collect: return "collect";
        case Step::Op::Reset: return "reset";
        case Step::Op::RemoteRead: return "remote_read";
        case Step::Op::RemoteWrite: return "remote_write";
        case Step::Op::AssertEquals: return "assert_equals";
    }
    return "?";
}

// ------------------------------------------------------------------ parse

namespace {

[[noreturn]] void fail(std::size_t step, const std::string& msg) {
    throw PlaybookError("step " + std::to_string(step) + ": " + msg);
}

const json& member(const json& j, std::size_t step, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(step, std::string("missing field '") + key + "'");
    return *it;
}

const json* member_opt(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

std::uint64_t as_uint(const json& j, std::size_t step, const char* key,
                      std::uint64_t max_value) {
    if (!j.is_number_unsigned()) fail(step, std::string(key) + ": expected integer");
    std::uint64_t v = j.get<std::uint64_t>();
    if (v > max_value) fail(step, std::string(key) + ": out of range");
    return v;
}

std::string as_str(const json& j, std::size_t step, const char* key) {
    if (!j.is_string()) fail(step, std::string(key) + ": expected string");
    return j.get<std::string>();
}

wire::AnyPointer as_pointer(const json& j, std::size_t step, const char* key) {
    auto parsed = wire::parse_pointer_literal(as_str(j, step, key));
    if (!parsed.pointer)
        fail(step, std::string(key) + ": bad pointer literal: " + parsed.error);
    return *parsed.pointer;
}

std::vector<std::uint8_t> as_hex(const json& j, std::size_t step, const char* key) {
    auto bytes = wire::from_hex(as_str(j, step, key));
    if (!bytes) fail(step, std::string(key) + ": bad hex string");
    return *bytes;
}

Step::Operand parse_operand(const json& j, std::size_t step, const char* key) {
    Step::Operand op;
    std::string text = as_str(j, step, key);
    if (!text.empty() && text[0] == '$') {
        op.is_ref = true;
        op.ref = text.substr(1);
        if (op.ref.empty()) fail(step, std::string(key) + ": empty reference");
        return op;
    }
    auto bytes = wire::from_hex(text);
    if (!bytes) fail(step, std::string(key) + ": expected $name or hex bytes");
    op.bytes = std::move(*bytes);
    return op;
}

std::vector<attack::Hop> parse_chain(const json& j, std::size_t step) {
    if (!j.is_array() || j.empty()) fail(step, "chain: expected a non-empty array");
    std::vector<attack::Hop> chain;
    for (const auto& jh : j) {
        attack::Hop hop;
        hop.plc = as_str(member(jh, step, "plc"), step, "plc");
        if (const json* g = member_opt(jh, "get_db"))
            hop.get_db = static_cast<std::uint16_t>(as_uint(*g, step, "get_db", 65535));
        if (const json* p = member_opt(jh, "put_db"))
            hop.put_db = static_cast<std::uint16_t>(as_uint(*p, step, "put_db", 65535));
        chain.push_back(std::move(hop));
    }
    return chain;
}

}  // namespace

Playbook parse_playbook(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded()) throw PlaybookError("playbook is not valid JSON");
    if (!root.is_object()) throw PlaybookError("playbook must be a JSON object");

    Playbook pb;
    if (const json* name = member_opt(root, "name"))
        pb.name = name->is_string() ? name->get<std::string>() : "";
    if (const json* entry = member_opt(root, "entry_channel"))
        pb.entry_channel = entry->is_string() ? entry->get<std::string>() : "";

    auto steps_it = root.find("steps");
    if (steps_it == root.end() || !steps_it->is_array())
        throw PlaybookError("playbook needs a 'steps' array");

    for (std::size_t i = 0; i < steps_it->size(); ++i) {
        const json& js = (*steps_it)[i];
        if (!js.is_object()) fail(i, "step must be an object");
        Step s;
        const std::string op = as_str(member(js, i, "op"), i, "op");

        if (op == "probe") {
            s.op = Step::Op::Probe;
            s.db = static_cast<std::uint16_t>(
                as_uint(member(js, i, "db"), i, "db", 65535));
            if (const json* p = member_opt(js, "plc")) s.plc = as_str(*p, i, "plc");
            if (const json* m = member_opt(js, "max_size"))
                s.max_size = static_cast<std::uint32_t>(
                    as_uint(*m, i, "max_size", wire::kMaxByteOffset + 1));
            if (const json* e = member_opt(js, "expect_size")) {
                s.expect = Step::Expect::Size;
                s.expect_size = static_cast<std::uint32_t>(
                    as_uint(*e, i, "expect_size", wire::kMaxByteOffset + 1));
            } else if (const json* x = member_opt(js, "expect")) {
                std::string w = as_str(*x, i, "expect");
                if (w == "absent")
                    s.expect = Step::Expect::Absent;
                else if (w == "unreachable")
                    s.expect = Step::Expect::Unreachable;
                else
                    fail(i, "expect: must be \"absent\" or \"unreachable\"");
            }
        } else if (op == "fingerprint_range") {
            s.op = Step::Op::FingerprintRange;
            s.from_db = static_cast<std::uint16_t>(
                as_uint(member(js, i, "from_db"), i, "from_db", 65535));
            s.to_db = static_cast<std::uint16_t>(
                as_uint(member(js, i, "to_db"), i, "to_db", 65535));
            if (s.from_db > s.to_db) fail(i, "from_db > to_db");
            if (const json* e = member_opt(js, "expect")) {
                if (!e->is_object()) fail(i, "expect: expected an object");
                for (auto it = e->begin(); it != e->end(); ++it) {
                    int db = std::atoi(it.key().c_str());
                    if (db < 1 || db > 65535) fail(i, "expect: bad DB key");
                    s.expect_classes[static_cast<std::uint16_t>(db)] =
                        it.value().get<std::string>();
                }
            }
        } else if (op == "read_usage") {
            s.op = Step::Op::ReadUsage;
            s.db = static_cast<std::uint16_t>(
                as_uint(member(js, i, "db"), i, "db", 65535));
            if (const json* e = member_opt(js, "expect_spare")) {
                if (!e->is_array()) fail(i, "expect_spare: expected an array");
                std::set<int> spare;
                for (const auto& v : *e)
                    spare.insert(static_cast<int>(as_uint(v, i, "expect_spare", 4)));
                s.expect_spare = std::move(spare);
            }
        } else if (op == "configure") {
            s.op = Step::Op::Configure;
            s.db = static_cast<std::uint16_t>(
                as_uint(member(js, i, "db"), i, "db", 65535));
            s.slot = static_cast<int>(as_uint(member(js, i, "slot"), i, "slot", 4));
            s.remote = as_pointer(member(js, i, "remote"), i, "remote");
            s.local = as_pointer(member(js, i, "local"), i, "local");
            if (const json* v = member_opt(js, "value_hex")) {
                s.value = as_hex(*v, i, "value_hex");
                s.has_value = true;
            }
            if (const json* o = member_opt(js, "overwrite"))
                s.overwrite = o->is_boolean() && o->get<bool>();
        } else if (op == "await") {
            s.op = Step::Op::Await;
            s.db = static_cast<std::uint16_t>(
                as_uint(member(js, i, "db"), i, "db", 65535));
            s.timeout = as_uint(member(js, i, "timeout_us"), i, "timeout_us",
                                3'600'000'000ULL);
        } else if (op == "collect") {
            s.op = Step::Op::Collect;
            s.local = as_pointer(member(js, i, "local"), i, "local");
            s.save_as = as_str(member(js, i, "save_as"), i, "save_as");
        } else if (op == "reset") {
            s.op = Step::Op::Reset;
            s.db = static_cast<std::uint16_t>(
                as_uint(member(js, i, "db"), i, "db", 65535));
            s.slot = static_cast<int>(as_uint(member(js, i, "slot"), i, "slot", 4));
        } else if (op == "remote_read") {
            s.op = Step::Op::RemoteRead;
            s.chain = parse_chain(member(js, i, "chain"), i);
            s.target = as_pointer(member(js, i, "target"), i, "target");
            s.save_as = as_str(member(js, i, "save_as"), i, "save_as");
            if (const json* t = member_opt(js, "hop_timeout_us"))
                s.hop_timeout = as_uint(*t, i, "hop_timeout_us", 3'600'000'000ULL);
        } else if (op == "remote_write") {
            s.op = Step::Op::RemoteWrite;
            s.chain = parse_chain(member(js, i, "chain"), i);
            s.target = as_pointer(member(js, i, "target"), i, "target");
            s.value = as_hex(member(js, i, "value_hex"), i, "value_hex");
            if (const json* v = member_opt(js, "verify"))
                s.verify = !v->is_boolean() || v->get<bool>();
            if (const json* t = member_opt(js, "hop_timeout_us"))
                s.hop_timeout = as_uint(*t, i, "hop_timeout_us", 3'600'000'000ULL);
        } else if (op == "assert_equals") {
            s.op = Step::Op::AssertEquals;
            s.left = parse_operand(member(js, i, "left"), i, "left");
            s.right = parse_operand(member(js, i, "right"), i, "right");
        } else {
            fail(i, "unknown op '" + op + "'");
        }
        pb.steps.push_back(std::move(s));
    }
    return pb;
}

Playbook parse_playbook_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PlaybookError("cannot open playbook file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_playbook(ss.str());
}

// --------------------------------------------------------------- validate

namespace {

std::string fact_fingerprint(std::uint16_t db) { return "fp:" + std::to_string(db); }
std::string fact_local(const wire::AnyPointer& p) {
    return "local:" + wire::format_pointer_literal(p);
}
std::string fact_var(const std::string& name) { return "var:" + name; }

// Facts a step consumes / establishes; shared by static validation and the
// runtime dependency skipping.
void step_facts(const Step& s, std::vector<std::string>& uses,
                std::vector<std::string>& establishes) {
    switch (s.op) {
        case Step::Op::Probe:
            break;
        case Step::Op::FingerprintRange:
            for (std::uint32_t db = s.from_db; db <= s.to_db; ++db)
                establishes.push_back(fact_fingerprint(static_cast<std::uint16_t>(db)));
            break;
        case Step::Op::ReadUsage:
        case Step::Op::Await:
        case Step::Op::Reset:
            uses.push_back(fact_fingerprint(s.db));
            break;
        case Step::Op::Configure:
            uses.push_back(fact_fingerprint(s.db));
            establishes.push_back(fact_local(*s.local));
            break;
        case Step::Op::Collect:
            uses.push_back(fact_local(*s.local));
            establishes.push_back(fact_var(s.save_as));
            break;
        case Step::Op::RemoteRead:
        case Step::Op::RemoteWrite:
            if (s.chain.front().get_db)
                uses.push_back(fact_fingerprint(*s.chain.front().get_db));
            if (s.chain.front().put_db)
                uses.push_back(fact_fingerprint(*s.chain.front().put_db));
            if (s.op == Step::Op::RemoteRead)
                establishes.push_back(fact_var(s.save_as));
            break;
        case Step::Op::AssertEquals:
            if (s.left.is_ref) uses.push_back(fact_var(s.left.ref));
            if (s.right.is_ref) uses.push_back(fact_var(s.right.ref));
            break;
    }
}

}  // namespace

void validate_playbook(const Playbook& pb) {
    std::set<std::string> established;
    for (std::size_t i = 0; i < pb.steps.size(); ++i) {
        std::vector<std::string> uses, establishes;
        step_facts(pb.steps[i], uses, establishes);
        for (const auto& fact : uses) {
            if (!established.count(fact))
                fail(i, std::string(step_op_name(pb.steps[i].op)) +
                            " references '" + fact +
                            "' which no earlier step establishes");
        }
        for (auto& fact : establishes) established.insert(std::move(fact));
    }
}

// -------------------------------------------------------------------- run

namespace {

struct RunState {
    std::map<std::uint16_t, attack::DbClass> classes;
    std::map<std::string, std::vector<std::uint8_t>> saved;
    std::set<std::string> poisoned;
    bool probes_pure = true;  // temp direct-attempt sessions stayed read/write
};

bool intersects(const std::vector<std::string>& uses,
                const std::set<std::string>& poisoned) {
    return std::any_of(uses.begin(), uses.end(), [&](const std::string& f) {
        return poisoned.count(f) != 0;
    });
}

std::string spare_to_string(const std::set<int>& spare) {
    std::string out = "{";
    for (int s : spare) {
        if (out.size() > 1) out += ",";
        out += std::to_string(s);
    }
    return out + "}";
}

// Probe against a PLC other than the entry peer: requires a channel of its
// own, and usually exists only to prove there is none (or that rules deny it).
struct ProbeOutcome {
    bool unreachable = false;
    std::optional<std::uint32_t> size;
    std::string detail;
};

ProbeOutcome run_probe(net::Fleet& fleet, attack::Session& session, const Step& s,
                       RunState& state) {
    ProbeOutcome out;
    if (s.plc && *s.plc != session.entry_plc()) {
        auto channel = fleet.attacker_channel_to(*s.plc);
        if (!channel) {
            out.unreachable = true;
            out.detail = "no channel to " + *s.plc;
            return out;
        }
        attack::Session direct(fleet, *channel, session.options());
        try {
            out.size = direct.probe_db_size(s.db, s.max_size);
        } catch (const attack::UnreachableError& e) {
            out.unreachable = true;
            out.detail = e.what();
        }
        state.probes_pure = state.probes_pure && direct.log_kinds_pure();
        if (out.unreachable) return out;
    } else {
        out.size = session.probe_db_size(s.db, s.max_size);
    }
    out.detail = out.size ? "size " + std::to_string(*out.size) : "absent";
    return out;
}

}  // namespace

RunReport run_playbook(net::Fleet& fleet, const Playbook& pb, std::uint64_t seed) {
    validate_playbook(pb);

    RunReport report;
    report.playbook = pb.name;
    report.seed = seed;

    attack::Session session(fleet, pb.entry_channel);
    RunState state;
    const Micros run_start = fleet.now();

    for (std::size_t i = 0; i < pb.steps.size(); ++i) {
        const Step& s = pb.steps[i];
        StepReport sr;
        sr.index = i;
        sr.op = step_op_name(s.op);
        sr.t_start = fleet.now();
        const std::size_t exchanges_before = session.request_count();

        std::vector<std::string> uses, establishes;
        step_facts(s, uses, establishes);
        if (intersects(uses, state.poisoned)) {
            sr.outcome = "skipped";
            sr.detail = "depends on a failed step";
            for (const auto& f : establishes) state.poisoned.insert(f);
            sr.t_end = fleet.now();
            report.steps.push_back(std::move(sr));
            continue;
        }

        bool ok = true;
        std::string detail;
        const bool is_assertion = s.expect != Step::Expect::None ||
                                  !s.expect_classes.empty() ||
                                  s.expect_spare.has_value() ||
                                  s.op == Step::Op::AssertEquals;
        try {
            switch (s.op) {
                case Step::Op::Probe: {
                    ProbeOutcome out = run_probe(fleet, session, s, state);
                    detail = out.detail;
                    switch (s.expect) {
                        case Step::Expect::Size:
                            ok = out.size && *out.size == s.expect_size;
                            break;
                        case Step::Expect::Absent:
                            ok = !out.unreachable && !out.size;
                            break;
                        case Step::Expect::Unreachable:
                            ok = out.unreachable;
                            break;
                        case Step::Expect::None:
                            ok = !out.unreachable;
                            break;
                    }
                    break;
                }
                case Step::Op::FingerprintRange: {
                    std::map<std::string, int> tally;
                    for (std::uint32_t db = s.from_db; db <= s.to_db; ++db) {
                        attack::DbFingerprint fp =
                            session.fingerprint_db(static_cast<std::uint16_t>(db));
                        state.classes[static_cast<std::uint16_t>(db)] =
                            fp.classification;
                        tally[attack::db_class_name(fp.classification)]++;
                    }
                    for (const auto& [db, want] : s.expect_classes) {
                        const char* got = attack::db_class_name(state.classes[db]);
                        if (want != got) {
                            ok = false;
                            detail += "DB " + std::to_string(db) + " classified " +
                                      got + ", expected " + want + "; ";
                        }
                    }
                    if (ok) {
                        for (const auto& [name, n] : tally)
                            detail += name + "=" + std::to_string(n) + " ";
                    }
                    break;
                }
                case Step::Op::ReadUsage: {
                    attack::SlotUsage usage = session.read_slot_usage(s.db);
                    detail = "spare " + spare_to_string(usage.spare);
                    if (s.expect_spare && usage.spare != *s.expect_spare) {
                        ok = false;
                        detail += ", expected " + spare_to_string(*s.expect_spare);
                    }
                    break;
                }
                case Step::Op::Configure: {
                    auto cls = state.classes.find(s.db);
                    if (cls == state.classes.end() ||
                        (cls->second != attack::DbClass::Get &&
                         cls->second != attack::DbClass::Put)) {
                        ok = false;
                        detail = "DB not classified as GET or PUT";
                        break;
                    }
                    const sim::FbKind kind = cls->second == attack::DbClass::Get
                                                 ? sim::FbKind::Get
                                                 : sim::FbKind::Put;
                    session.configure_slot(s.db, kind, s.slot, *s.remote, *s.local,
                                           s.value, s.overwrite);
                    detail = std::string(sim::fb_kind_name(kind)) + " slot " +
                             std::to_string(s.slot) + " -> " +
                             wire::format_pointer_literal(*s.remote);
                    break;
                }
                case Step::Op::Await: {
                    attack::ExecutionObservation obs =
                        session.await_execution(s.db, s.timeout);
                    detail = obs.timed_out
                                 ? "timed out"
                                 : "pulses=" + std::to_string(obs.pulses) +
                                       " status=" + std::to_string(obs.last_status);
                    ok = !obs.timed_out;
                    break;
                }
                case Step::Op::Collect: {
                    std::vector<std::uint8_t> bytes = session.collect_result(*s.local);
                    detail = wire::to_hex(bytes);
                    state.saved[s.save_as] = std::move(bytes);
                    break;
                }
                case Step::Op::Reset: {
                    auto cls = state.classes.find(s.db);
                    const sim::FbKind kind =
                        cls != state.classes.end() && cls->second == attack::DbClass::Put
                            ? sim::FbKind::Put
                            : sim::FbKind::Get;
                    session.reset_slot(s.db, kind, s.slot);
                    detail = "slot " + std::to_string(s.slot) + " cleared";
                    break;
                }
                case Step::Op::RemoteRead: {
                    attack::ChainOptions copts;
                    copts.hop_timeout = s.hop_timeout;
                    std::vector<std::uint8_t> bytes =
                        session.remote_read(s.chain, *s.target, copts);
                    detail = wire::to_hex(bytes);
                    state.saved[s.save_as] = std::move(bytes);
                    break;
                }
                case Step::Op::RemoteWrite: {
                    attack::ChainOptions copts;
                    copts.hop_timeout = s.hop_timeout;
                    copts.verify_writes = s.verify;
                    session.remote_write(s.chain, *s.target, s.value, copts);
                    detail = std::to_string(s.value.size()) + " bytes -> " +
                             wire::format_pointer_literal(*s.target);
                    break;
                }
                case Step::Op::AssertEquals: {
                    auto resolve =
                        [&](const Step::Operand& o) -> const std::vector<std::uint8_t>& {
                        if (!o.is_ref) return o.bytes;
                        return state.saved.at(o.ref);
                    };
                    const auto& lhs = resolve(s.left);
                    const auto& rhs = resolve(s.right);
                    ok = lhs == rhs;
                    detail = wire::to_hex(lhs) +
                             (ok ? " == " : " != ") + wire::to_hex(rhs);
                    break;
                }
            }
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }

        if (is_assertion) {
            if (ok)
                report.assertions_passed++;
            else
                report.assertions_failed++;
        }

        sr.outcome = ok ? "ok" : "failed";
        sr.detail = detail;
        sr.t_end = fleet.now();
        sr.exchanges = session.request_count() - exchanges_before;
        if (!ok)
            for (const auto& f : establishes) state.poisoned.insert(f);
        report.steps.push_back(std::move(sr));
    }

    report.virtual_elapsed = fleet.now() - run_start;
    report.exchanges = session.request_count();
    report.transfers = fleet.transfer_log().size();
    report.lotp_pure = session.log_kinds_pure() && state.probes_pure;
    report.success = std::all_of(
        report.steps.begin(), report.steps.end(),
        [](const StepReport& sr) { return sr.outcome == "ok"; });
    return report;
}

nlohmann::ordered_json RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["playbook"] = playbook;
    j["seed"] = seed;
    j["success"] = success;
    j["virtual_elapsed_us"] = virtual_elapsed;
    j["exchanges"] = exchanges;
    j["transfers"] = transfers;
    j["assertions"] = {{"passed", assertions_passed}, {"failed", assertions_failed}};
    j["lotp_pure"] = lotp_pure;
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const auto& s : this->steps) {
        nlohmann::ordered_json js;
        js["index"] = s.index;
        js["op"] = s.op;
        js["outcome"] = s.outcome;
        js["detail"] = s.detail;
        js["t_start"] = s.t_start;
        js["t_end"] = s.t_end;
        js["exchanges"] = s.exchanges;
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    return j;
}

RunReport run_playbook_files(const std::string& topology_path,
                             const std::string& playbook_path, std::uint64_t seed,
                             const std::string& log_path,
                             const std::string& report_path) {
    net::Topology topo = net::load_topology_file(topology_path);
    Playbook pb = parse_playbook_file(playbook_path);
    net::Fleet fleet(std::move(topo));
    RunReport report = run_playbook(fleet, pb, seed);

    if (!log_path.empty()) {
        std::ofstream out(log_path, std::ios::binary);
        if (!out) throw net::ConfigError("cannot write event log: " + log_path);
        out << fleet.event_log_jsonl();
    }
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw net::ConfigError("cannot write report: " + report_path);
        out << report.to_json().dump(2) << "\n";
    }
    return report;
}

}  // namespace plcpivot::run
