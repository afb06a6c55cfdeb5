#pragma once

// Agent message impact.
//
// A message received by agent B opens a window at its receipt and the window
// closes at B's next receipt from any sender (self-messages included). The
// impact of the message is the summed duration of B's activities starting inside
// that window. Windows are half-open on (timestamp, seq) keys; B's final window
// runs to the end of the session and keeps every later activity. Messages B
// sends never close a window.

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "spotter/trace.hpp"

namespace spotter {

class LookupError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct Window {
    MessageId msg_id = 0;
    Timestamp start;
    /// Next receipt, or the session end for the last window.
    Timestamp end;
    /// True when the window is closed by the session end rather than a receipt.
    bool open_ended = false;
    friend bool operator==(const Window&, const Window&) = default;
};

struct MessageImpact {
    MessageId msg_id = 0;
    AgentId emitter;
    AgentId receiver;
    Timestamp window_start;
    Timestamp window_end;
    bool open_ended = false;
    Duration impact;
    std::int64_t activity_count = 0;
    friend bool operator==(const MessageImpact&, const MessageImpact&) = default;
};

struct PairImpact {
    AgentId emitter;
    AgentId receiver;
    Duration total;
    std::int64_t message_count = 0;
    friend bool operator==(const PairImpact&, const PairImpact&) = default;
};

struct AgentImpact {
    AgentId emitter;
    Duration total;
    std::int64_t receiver_count = 0;
    friend bool operator==(const AgentImpact&, const AgentImpact&) = default;
};

struct SessionImpact {
    Duration total_impact;
    Duration total_activity;
    Duration pre_message_activity;
    std::int64_t agent_count = 0;
    friend bool operator==(const SessionImpact&, const SessionImpact&) = default;
};

/// Every aggregation level. per_message follows msg_id order, per_pair is keyed by
/// (emitter, receiver) and per_emitter lists every registered agent by name.
struct ImpactTable {
    std::vector<MessageImpact> per_message;
    std::vector<PairImpact> per_pair;
    std::vector<AgentImpact> per_emitter;
    SessionImpact session;
    friend bool operator==(const ImpactTable&, const ImpactTable&) = default;

    const MessageImpact* find_message(MessageId id) const {
        auto it = std::lower_bound(per_message.begin(), per_message.end(), id,
                                   [](const MessageImpact& m, MessageId v) { return m.msg_id < v; });
        return it != per_message.end() && it->msg_id == id ? &*it : nullptr;
    }
};

namespace detail {

inline void require_agent(const Snapshot& s, const AgentId& name) {
    if (!s.has_agent(name)) throw LookupError("unknown agent '" + name + "'");
}

inline std::vector<const MessageRecord*> receipts_of(const Snapshot& s, const AgentId& receiver) {
    std::vector<const MessageRecord*> in;
    for (const auto& m : s.messages) {
        if (m.receiver == receiver) in.push_back(&m);
    }
    std::sort(in.begin(), in.end(),
              [](const MessageRecord* a, const MessageRecord* b) { return receipt_key(*a) < receipt_key(*b); });
    return in;
}

inline std::vector<const ActivityRecord*> activities_of(const Snapshot& s, const AgentId& agent) {
    std::vector<const ActivityRecord*> out;
    for (const auto& a : s.activities) {
        if (a.agent == agent) out.push_back(&a);
    }
    return out;
}

struct ReceiverSweep {
    std::vector<MessageImpact> impacts;
    Duration pre_message;
};

/// Sorts one agent's receipts and activities by key, then merges them in a single pass.
inline ReceiverSweep sweep(const AgentId& receiver, std::vector<const MessageRecord*>& in,
                           std::vector<const ActivityRecord*>& acts, Timestamp session_end) {
    std::sort(in.begin(), in.end(),
              [](const MessageRecord* a, const MessageRecord* b) { return receipt_key(*a) < receipt_key(*b); });
    std::sort(acts.begin(), acts.end(),
              [](const ActivityRecord* a, const ActivityRecord* b) { return start_key(*a) < start_key(*b); });
    ReceiverSweep out;
    out.impacts.reserve(in.size());
    std::size_t ai = 0;
    while (ai < acts.size() && (in.empty() || start_key(*acts[ai]) < receipt_key(*in.front()))) {
        out.pre_message += acts[ai++]->duration;
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
        const bool last = i + 1 == in.size();
        MessageImpact mi{in[i]->msg_id, in[i]->sender, receiver, in[i]->recv_ts,
                         last ? session_end : in[i + 1]->recv_ts, last, {}, 0};
        while (ai < acts.size() && (last || start_key(*acts[ai]) < receipt_key(*in[i + 1]))) {
            mi.impact += acts[ai++]->duration;
            ++mi.activity_count;
        }
        out.impacts.push_back(std::move(mi));
    }
    return out;
}

inline ReceiverSweep sweep_receiver(const Snapshot& s, const AgentId& receiver) {
    auto in = receipts_of(s, receiver);
    auto acts = activities_of(s, receiver);
    return sweep(receiver, in, acts, Timestamp{s.header.duration.micros});
}

}  // namespace detail

/// Receipt windows of `receiver`, ordered by receipt.
inline std::vector<Window> segment_windows(const Snapshot& s, const AgentId& receiver) {
    detail::require_agent(s, receiver);
    const auto in = detail::receipts_of(s, receiver);
    std::vector<Window> out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const bool last = i + 1 == in.size();
        out.push_back(Window{in[i]->msg_id, in[i]->recv_ts,
                             last ? Timestamp{s.header.duration.micros} : in[i + 1]->recv_ts, last});
    }
    return out;
}

inline MessageImpact message_impact(const Snapshot& s, MessageId msg_id) {
    auto it = std::find_if(s.messages.begin(), s.messages.end(),
                           [&](const MessageRecord& m) { return m.msg_id == msg_id; });
    if (it == s.messages.end()) throw LookupError("unknown msg_id " + std::to_string(msg_id));
    auto sweep = detail::sweep_receiver(s, it->receiver);
    for (auto& mi : sweep.impacts) {
        if (mi.msg_id == msg_id) return std::move(mi);
    }
    throw LookupError("unknown msg_id " + std::to_string(msg_id));
}

inline PairImpact pair_impact(const Snapshot& s, const AgentId& emitter, const AgentId& receiver) {
    detail::require_agent(s, emitter);
    detail::require_agent(s, receiver);
    PairImpact p{emitter, receiver, {}, 0};
    for (const auto& mi : detail::sweep_receiver(s, receiver).impacts) {
        if (mi.emitter != emitter) continue;
        p.total += mi.impact;
        ++p.message_count;
    }
    return p;
}

inline AgentImpact agent_impact(const Snapshot& s, const AgentId& emitter) {
    detail::require_agent(s, emitter);
    AgentImpact out{emitter, {}, 0};
    std::set<AgentId> receivers;
    for (const auto& m : s.messages) {
        if (m.sender == emitter) receivers.insert(m.receiver);
    }
    for (const auto& r : receivers) out.total += pair_impact(s, emitter, r).total;
    out.receiver_count = static_cast<std::int64_t>(receivers.size());
    return out;
}

inline SessionImpact session_impact(const Snapshot& s) {
    SessionImpact out;
    out.agent_count = static_cast<std::int64_t>(s.agents.size());
    for (const auto& a : s.agents) {
        auto sw = detail::sweep_receiver(s, a.name);
        out.pre_message_activity += sw.pre_message;
        for (const auto& mi : sw.impacts) out.total_impact += mi.impact;
    }
    out.total_activity = out.total_impact + out.pre_message_activity;
    return out;
}

/// All levels in one pass per receiver: O(E log E).
inline ImpactTable compute_impact_table(const Snapshot& s) {
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < s.agents.size(); ++i) index.emplace(s.agents[i].name, i);

    std::vector<std::vector<const MessageRecord*>> receipts(s.agents.size());
    std::vector<std::vector<const ActivityRecord*>> acts(s.agents.size());
    for (const auto& m : s.messages) receipts.at(index.at(m.receiver)).push_back(&m);
    for (const auto& a : s.activities) acts.at(index.at(a.agent)).push_back(&a);

    ImpactTable t;
    t.session.agent_count = static_cast<std::int64_t>(s.agents.size());
    for (std::size_t r = 0; r < s.agents.size(); ++r) {
        auto sw = detail::sweep(s.agents[r].name, receipts[r], acts[r], Timestamp{s.header.duration.micros});
        t.session.pre_message_activity += sw.pre_message;
        for (auto& mi : sw.impacts) t.per_message.push_back(std::move(mi));
    }
    std::sort(t.per_message.begin(), t.per_message.end(),
              [](const MessageImpact& a, const MessageImpact& b) { return a.msg_id < b.msg_id; });

    std::map<std::pair<AgentId, AgentId>, PairImpact> pairs;
    for (const auto& mi : t.per_message) {
        auto& p = pairs[{mi.emitter, mi.receiver}];
        p.emitter = mi.emitter;
        p.receiver = mi.receiver;
        p.total += mi.impact;
        ++p.message_count;
        t.session.total_impact += mi.impact;
    }
    std::map<AgentId, AgentImpact> emitters;
    for (const auto& a : s.agents) emitters[a.name] = AgentImpact{a.name, {}, 0};
    for (auto& [key, p] : pairs) {
        auto& e = emitters[p.emitter];
        e.total += p.total;
        ++e.receiver_count;
        t.per_pair.push_back(std::move(p));
    }
    for (auto& [name, e] : emitters) t.per_emitter.push_back(std::move(e));
    t.session.total_activity = t.session.total_impact + t.session.pre_message_activity;
    return t;
}

}  // namespace spotter
